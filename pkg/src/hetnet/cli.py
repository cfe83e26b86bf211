"""Command-line driver.

Subcommands::

    hetnet analyze  CONFIG [--out PREFIX]
    hetnet simulate CONFIG [--trials N] [--seed S] [--radius R] [--beta-db B ...]
                           [--activation MODE] [--workers W] [--out FILE]
    hetnet sweep    CONFIG --param P --lo LO --hi HI [--points N] [--scale linear|log]
                           [--metrics M ...] [--workers W] --out FILE
    hetnet validate CONFIG [simulate options]
    hetnet replay   SIDECAR [--out FILE]

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 simulation disagrees with the analysis (``validate`` only).

Configuration file
------------------
UTF-8 text, ``key = value`` per line, ``#`` starts a comment.  Top-level keys
come first, then one ``[tier]`` section per tier.

Top level:
    user_density                     users per m^2 (required)
    access_threshold_dbm | _w        minimum biased received power; ``-inf`` or
                                     omitted means no threshold
    noise_dbm | noise_w              noise power (default 0)
    amp_efficiency                   power-amplifier efficiency (default 1)
    circuit_power_w                  per-antenna circuit power (default 0)
    static_power_w                   per-BS static power (default 0)
    pathloss_exp, sinr_threshold_db | sinr_threshold, antennas, bias
                                     defaults for tiers that omit them

Per ``[tier]``:
    power (with dBm/W/mW suffix) | power_dbm | power_w
    antennas                         integer (default 1)
    bias | bias_db                   association bias (default 1)
    density                          BSs per m^2
    pathloss_exp                     > 2
    sinr_threshold_db | sinr_threshold

Numbers may be arithmetic expressions over ``pi``, ``e``, the tier densities
``lambda1 .. lambdaK`` and, outside density keys, ``lambda_u``.

Sweep parameters: ``access_threshold``, ``noise``, ``user_density``,
``amp_efficiency``, ``circuit_power``, ``static_power``, ``sinr_threshold``
and ``pathloss_exp`` (all tiers), or ``tier[k].power|antennas|bias|density|
pathloss_exp|sinr_threshold`` (k from 1).  Bounds take the same expressions
and an optional unit (``dBm``, ``dB``, ``W``, ``mW``).  ``--scale`` sets the
spacing in linear units, so ``log`` between dBm bounds is uniform in dBm.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

from . import __version__
from .association import assoc_report
from .configfile import dump_config, eval_expr, load_config, parse_config, split_unit
from .efficiency import aar, aar_overall, ant, area_power, energy_efficiency, f_zero, ft_inf, optimal_threshold
from .errors import ConfigError, NumericsError, PreconditionError
from .model import as_dict, db_to_linear, dbm_to_watts, derive, linear_to_db, validate, watts_to_dbm
from .outage import outage_bounds, outage_exact, outage_int, outage_overall
from .simulator import ACTIVATION_MODES, run_campaign

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICS, EXIT_MISMATCH = 0, 1, 2, 3
SIGMAS = 3.0
METRICS = ("assoc", "activation", "outage_exact", "outage_int", "bounds", "ant", "aar", "energy_eff", "trans_eff")

_TOP_PARAMS = {
    "access_threshold": ("access_threshold", "dBm"),
    "noise": ("noise_watts", "dBm"),
    "user_density": ("user_density", None),
    "amp_efficiency": ("amp_efficiency", None),
    "circuit_power": ("circuit_power_watts", "dBm"),
    "static_power": ("static_power_watts", "dBm"),
}
_TIER_PARAMS = {
    "power": ("power_watts", "dBm"),
    "antennas": ("antennas", None),
    "bias": ("bias", "dB"),
    "density": ("density", None),
    "pathloss_exp": ("pathloss_exp", None),
    "sinr_threshold": ("sinr_threshold", "dB"),
}
_TIER_RE = re.compile(r"^tier\[(\d+)\]\.(\w+)$")


def fmt(v):
    """Fixed 12-significant-digit rendering.

    ``None`` (not applicable) prints empty; NaN (no estimate) prints ``undefined``.
    """
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "undefined"
    return format(v, ".12g")


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_sidecar(csv_path, meta):
    with open(csv_path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _meta(command, config, **extra):
    return {
        "tool": "hetnet",
        "version": __version__,
        "command": command,
        "config": as_dict(config),
        "config_text": dump_config(config),
        **extra,
    }


# -- analyze ---------------------------------------------------------------


TIER_COLUMNS = ("tier", "T_k", "A_k", "active_density", "O_exact", "O_int", "O_L", "O_U", "method")


def _efficiency_pair(config):
    try:
        return energy_efficiency(config)
    except NumericsError:
        # no active BS or no power draw at all: the ratios have no value
        return math.nan, math.nan


def analysis_tables(config):
    """(tier rows, network rows) of the full analytic report."""
    ar = assoc_report(config)
    orp = outage_overall(config)
    tiers = []
    for k in range(config.num_tiers):
        tiers.append(
            (
                k + 1,
                ar.assoc[k],
                ar.activation[k],
                ar.active_density[k],
                orp.exact[k],
                orp.interference_limited[k],
                orp.lower[k],
                orp.upper[k],
                f"exact:{orp.exact_methods[k]};int:{orp.int_methods[k]}",
            )
        )
    opt = optimal_threshold(config)
    u, per = aar_overall(config)
    F, FT = _efficiency_pair(config)
    net = {
        "no_coverage": ar.no_coverage_prob,
        "lambda_cap": ar.lambda_cap,
        "O_exact": orp.overall_exact,
        "O_int": orp.overall_int,
        "O_L": orp.overall_lower,
        "O_U": orp.overall_upper,
        "ant": ant(config),
        "eps_star_w": opt.eps_star,
        "eps_star_dbm": watts_to_dbm(opt.eps_star),
        "ant_star": opt.ant_star,
        "eps_star_at_boundary": opt.at_boundary,
        "aar": u,
        "area_power": area_power(config),
        "energy_eff": F,
        "trans_eff": FT,
        "f_zero": f_zero(config) if config.equal_alpha else None,
        "ft_inf": ft_inf(config) if config.equal_alpha else None,
    }
    for k, v in enumerate(per, start=1):
        net[f"aar_{k}"] = v
    return tiers, sorted(net.items())


def _summary_text(config, tiers, net):
    lines = [f"hetnet {__version__} analytic report", ""]
    lines.append(f"tiers: {config.num_tiers}   user density: {fmt(config.user_density)} /m^2")
    eps = "none" if config.access_threshold == 0 else f"{fmt(watts_to_dbm(config.access_threshold))} dBm"
    noise = "none" if config.noise_watts == 0 else f"{fmt(watts_to_dbm(config.noise_watts))} dBm"
    lines.append(f"access threshold: {eps}   noise: {noise}")
    lines.append("")
    lines.append(" ".join(f"{h:>16}" for h in TIER_COLUMNS[:-1]) + "  method")
    for r in tiers:
        lines.append(" ".join(f"{fmt(x):>16}" for x in r[:-1]) + "  " + r[-1])
    lines.append("")
    width = max(len(k) for k, _ in net)
    for k, v in net:
        lines.append(f"{k:<{width}}  {fmt(v)}")
    return "\n".join(lines) + "\n"


def cmd_analyze(args):
    config = load_config(args.config)
    tiers, net = analysis_tables(config)
    prefix = args.out or os.path.splitext(args.config)[0]
    tier_csv = prefix + "_tiers.csv"
    net_csv = prefix + "_network.csv"
    _write(tier_csv, _csv_text(TIER_COLUMNS, tiers))
    _write(net_csv, _csv_text(("metric", "value"), net))
    summary = _summary_text(config, tiers, net)
    _write(prefix + "_summary.txt", summary)
    meta = _meta("analyze", config)
    _write_sidecar(tier_csv, meta)
    _write_sidecar(net_csv, meta)
    sys.stdout.write(summary)
    return EXIT_OK


# -- simulate / validate ---------------------------------------------------


SIM_COLUMNS = ("quantity", "tier", "beta_db", "analytic", "empirical", "se", "n", "delta", "verdict")


def _row(quantity, tier, beta_db, analytic, est):
    delta = est.value - analytic
    if est.n < 2 or not math.isfinite(est.se) or not math.isfinite(delta):
        verdict = "undefined"
    else:
        verdict = "pass" if est.within(analytic, SIGMAS) else "fail"
    return (quantity, tier, beta_db, analytic, est.value, est.se, est.n, delta, verdict)


def comparison_rows(config, rep, betas_db=None):
    """Analytic value, estimate, SE and verdict for every simulated quantity."""
    d = derive(config)
    rows = []
    K = config.num_tiers
    for k in range(K):
        rows.append(_row("assoc", k + 1, None, d[k].assoc_prob, rep.assoc(k)))
    rows.append(_row("no_coverage", "all", None, assoc_report(config).no_coverage_prob, rep.no_coverage()))
    for k in range(K):
        rows.append(_row("activation", k + 1, None, d[k].activation_prob, rep.activation_frac(k)))
    for k, t in enumerate(config.tiers):
        if d[k].assoc_prob == 0.0:
            continue
        for b_db in betas_db if betas_db else (linear_to_db(t.sinr_threshold),):
            b = db_to_linear(b_db)
            c = config.with_tier(k, sinr_threshold=b)
            rows.append(_row("outage_int", k + 1, b_db, outage_int(c, k), rep.outage(k, b, noise=False)))
            if config.noise_watts > 0:
                rows.append(_row("outage_exact", k + 1, b_db, outage_exact(c, k), rep.outage(k, b, noise=True)))
    noisy = config.noise_watts > 0
    u, per = aar_overall(config)
    for k in range(K):
        if d[k].assoc_prob > 0.0:
            rows.append(_row("aar", k + 1, None, per[k], rep.aar(k, noise=noisy)))
    rows.append(_row("aar", "all", None, u, rep.aar(None, noise=noisy)))
    rows.append(_row("ant", "all", None, ant(config), rep.ant(noise=False)))
    return rows


def _campaign(args, config):
    if args.trials < 1:
        raise ConfigError("must be >= 1", key="--trials")
    return run_campaign(
        config,
        args.trials,
        args.seed,
        r_sim=args.radius,
        activation=args.activation,
        workers=args.workers,
    )


def cmd_simulate(args):
    config = load_config(args.config)
    rep = _campaign(args, config)
    rows = comparison_rows(config, rep, args.beta_db)
    _write(args.out, _csv_text(SIM_COLUMNS, rows))
    if args.out and args.out != "-":
        _write_sidecar(
            args.out,
            _meta(
                "simulate",
                config,
                trials=args.trials,
                seed=args.seed,
                radius=rep.r_sim,
                activation=args.activation,
                beta_db=args.beta_db,
            ),
        )
    return EXIT_OK


def cmd_validate(args):
    config = load_config(args.config)
    rep = _campaign(args, config)
    rows = comparison_rows(config, rep, args.beta_db)
    text = _csv_text(SIM_COLUMNS, rows)
    _write(args.out, text)
    failed = [r for r in rows if r[-1] == "fail"]
    msg = sys.stderr if args.out in (None, "-") else sys.stdout
    print(
        f"{len(rows) - len(failed)}/{len(rows)} quantities within {SIGMAS:g} SE "
        f"({rep.trials} trials, seed {rep.seed}, radius {fmt(rep.r_sim)} m, activation {rep.activation})",
        file=msg,
    )
    for r in failed:
        print(f"  MISMATCH {r[0]} tier {r[1]}: analytic {fmt(r[3])} vs {fmt(r[4])} +- {fmt(r[5])}", file=msg)
    return EXIT_MISMATCH if failed else EXIT_OK


# -- sweep -----------------------------------------------------------------


def resolve_param(path, config):
    """(tier index or None, attribute, natural log unit) for a sweep path."""
    if path in ("sinr_threshold", "pathloss_exp"):
        return "all", path, _TIER_PARAMS[path][1]
    if path in _TOP_PARAMS:
        attr, unit = _TOP_PARAMS[path]
        return None, attr, unit
    m = _TIER_RE.match(path)
    if m and m.group(2) in _TIER_PARAMS:
        k = int(m.group(1))
        if not 1 <= k <= config.num_tiers:
            raise ConfigError(f"tier index out of range 1..{config.num_tiers}", key=path)
        attr, unit = _TIER_PARAMS[m.group(2)]
        return k - 1, attr, unit
    raise ConfigError("unknown sweep parameter", key=path)


def parse_bound(text, config, unit_kind):
    """Bound text to (linear value, unit suffix or None)."""
    names = {f"lambda{i}": t.density for i, t in enumerate(config.tiers, start=1)}
    names["lambda_u"] = config.user_density
    body, unit = split_unit(text, ("dBm", "dB", "mW", "W"))
    if unit in ("dbm", "mw", "w") and unit_kind != "dBm":
        raise ConfigError(f"unit '{unit}' does not apply to this parameter", key=text)
    if unit == "db" and unit_kind != "dB":
        raise ConfigError("dB bounds need a dimensionless gain parameter", key=text)
    try:
        v = eval_expr(body, names)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ConfigError(str(exc), key=text) from None
    if unit == "dbm":
        return dbm_to_watts(v), unit
    if unit == "mw":
        return v * 1e-3, unit
    if unit == "db":
        return db_to_linear(v), unit
    return v, unit


def sweep_grid(lo, hi, points, scale):
    import numpy as np

    if points < 2:
        raise ConfigError("must be >= 2", key="--points")
    if not lo < hi:
        raise ConfigError("need lo < hi", key="--lo/--hi")
    if scale == "log":
        if lo <= 0:
            raise ConfigError("log scale needs positive bounds", key="--lo")
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


def apply_param(config, target, attr, value):
    if attr == "antennas":
        if abs(value - round(value)) > 1e-9:
            raise ConfigError(f"antenna count must be an integer, got {value!r}", key=attr)
        value = int(round(value))
    else:
        value = float(value)
    if target is None:
        return config.replace(**{attr: value})
    if target == "all":
        return config.with_all_tiers(**{attr: value})
    return config.with_tier(target, **{attr: value})


def metric_columns(config, metrics):
    K = range(1, config.num_tiers + 1)
    cols = []
    for m in metrics:
        if m == "assoc":
            cols += [f"T_{k}" for k in K] + ["no_coverage"]
        elif m == "activation":
            cols += [f"A_{k}" for k in K]
        elif m == "outage_exact":
            cols += [f"O_exact_{k}" for k in K] + ["O_exact"]
        elif m == "outage_int":
            cols += [f"O_int_{k}" for k in K] + ["O_int"]
        elif m == "bounds":
            cols += [f"O_L_{k}" for k in K] + [f"O_U_{k}" for k in K] + ["O_L", "O_U"]
        elif m == "aar":
            cols += [f"aar_{k}" for k in K] + ["aar"]
        else:
            cols.append(m)
    return cols


def metric_values(config, metrics):
    """Row of metric values, in :func:`metric_columns` order."""
    d = derive(config)
    K = range(config.num_tiers)
    T = [x.assoc_prob for x in d]
    vals = []
    ee = None
    for m in metrics:
        if m == "assoc":
            vals += T + [assoc_report(config).no_coverage_prob]
        elif m == "activation":
            vals += [x.activation_prob for x in d]
        elif m in ("outage_exact", "outage_int"):
            fn = outage_exact if m == "outage_exact" else outage_int
            o = [fn(config, k) for k in K]
            vals += o + [math.fsum(t * v for t, v in zip(T, o))]
        elif m == "bounds":
            b = [outage_bounds(config, k) for k in K]
            lo = [x[0] for x in b]
            hi = [x[1] for x in b]
            vals += lo + hi + [math.fsum(t * v for t, v in zip(T, lo)), math.fsum(t * v for t, v in zip(T, hi))]
        elif m == "ant":
            vals.append(ant(config))
        elif m == "aar":
            per = [aar(config, k) for k in K]
            vals += per + [math.fsum(t * v for t, v in zip(T, per))]
        elif m in ("energy_eff", "trans_eff"):
            if ee is None:
                ee = _efficiency_pair(config)
            vals.append(ee[0] if m == "energy_eff" else ee[1])
    return vals


def run_sweep(config, param, lo_text, hi_text, points, scale, metrics, workers=1):
    """Header and rows of a one-parameter sweep; deterministic in its inputs."""
    bad = [m for m in metrics if m not in METRICS]
    if bad:
        raise ConfigError(f"unknown metric(s) {', '.join(bad)}; choose from {', '.join(METRICS)}", key="--metrics")
    metrics = list(dict.fromkeys(metrics))
    target, attr, unit_kind = resolve_param(param, config)
    lo, lo_unit = parse_bound(lo_text, config, unit_kind)
    hi, hi_unit = parse_bound(hi_text, config, unit_kind)
    if lo_unit != hi_unit:
        raise ConfigError("both bounds need the same unit", key="--lo/--hi")
    grid = sweep_grid(lo, hi, points, scale)
    configs = [validate(apply_param(config, target, attr, v)) for v in grid]
    header = [param]
    show_db = lo_unit in ("dbm", "db")
    if show_db:
        header.append(f"{param}_{'dbm' if lo_unit == 'dbm' else 'db'}")
    header += metric_columns(config, metrics)
    fn = partial(metric_values, metrics=metrics)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(fn, configs))
    else:
        results = [fn(c) for c in configs]
    rows = []
    for v, c, res in zip(grid, configs, results):
        x = getattr(c, attr) if target is None else getattr(c.tiers[0 if target == "all" else target], attr)
        lead = [x]
        if show_db:
            lead.append(watts_to_dbm(x) if lo_unit == "dbm" else linear_to_db(x))
        rows.append(lead + res)
    return header, rows


def _sweep_to_file(config, spec, out, workers):
    header, rows = run_sweep(
        config, spec["param"], spec["lo"], spec["hi"], spec["points"], spec["scale"], spec["metrics"], workers
    )
    _write(out, _csv_text(header, rows))
    _write_sidecar(out, _meta("sweep", config, sweep=spec))


def cmd_sweep(args):
    config = load_config(args.config)
    spec = {
        "param": args.param,
        "lo": args.lo,
        "hi": args.hi,
        "points": args.points,
        "scale": args.scale,
        "metrics": list(args.metrics),
    }
    _sweep_to_file(config, spec, args.out, args.workers)
    return EXIT_OK


def cmd_replay(args):
    try:
        with open(args.sidecar, encoding="utf-8") as fh:
            meta = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read sidecar {args.sidecar}: {exc}") from None
    if meta.get("command") != "sweep":
        raise ConfigError("only sweep sidecars can be replayed", key="command")
    config = parse_config(meta["config_text"])
    out = args.out
    if out is None and args.sidecar.endswith(".meta.json"):
        out = args.sidecar[: -len(".meta.json")]
    if not out:
        raise ConfigError("give --out", key="--out")
    _sweep_to_file(config, meta["sweep"], out, args.workers)
    return EXIT_OK


# -- entry point -----------------------------------------------------------


def _sim_options(p):
    p.add_argument("--trials", type=int, default=10000, help="Monte Carlo snapshots (default 10000)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--radius", type=float, default=None, help="simulation disk radius in m (default: automatic)")
    p.add_argument("--beta-db", type=float, nargs="+", default=None, help="SINR thresholds for outage rows")
    p.add_argument("--activation", choices=ACTIVATION_MODES, default="association", help="BS activity model")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")


def build_parser():
    ap = argparse.ArgumentParser(prog="hetnet", description="Multi-tier multi-antenna network analysis")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analytic report")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="output prefix (default: config path without extension)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte Carlo estimates beside the analysis")
    p.add_argument("config")
    _sim_options(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="simulate and exit 3 on any mismatch")
    p.add_argument("config")
    _sim_options(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="one-parameter sweep to CSV")
    p.add_argument("config")
    p.add_argument("--param", required=True)
    p.add_argument("--lo", required=True)
    p.add_argument("--hi", required=True)
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--scale", choices=("linear", "log"), default="linear")
    p.add_argument("--metrics", nargs="+", default=["outage_int"], help=f"any of {', '.join(METRICS)}")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="CSV path; a .meta.json sidecar is written next to it")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="re-run a sweep from its sidecar")
    p.add_argument("sidecar")
    p.add_argument("--out", default=None, help="CSV path (default: the sidecar's CSV)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_replay)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericsError, PreconditionError) as exc:
        print(f"numerics error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
