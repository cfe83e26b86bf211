"""Plain-text network description: ``key = value`` lines and ``[tier]`` sections.

Example::

    user_density = 20 * lambda1
    access_threshold_dbm = -80
    noise_dbm = -90
    sinr_threshold_db = 5        # default for tiers that do not set one
    pathloss_exp = 4

    [tier]
    power = 30 dBm
    antennas = 4
    density = 1 / (pi * 500**2)

    [tier]
    power = 10 dBm
    antennas = 2
    bias = 2
    density = 4 * lambda1

Numeric values may be arithmetic expressions over ``pi``, ``e`` and the tier
densities ``lambda1 .. lambdaK`` (and ``lambda_u`` outside density keys).
Powers accept a ``dBm``, ``W`` or ``mW`` suffix; a bare number is watts.
"""
from __future__ import annotations

import ast
import math
import operator

from .errors import ConfigError
from .model import NetworkConfig, TierParams, db_to_linear, dbm_to_watts, validate

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_CONSTS = {"pi": math.pi, "e": math.e, "inf": math.inf}

TIER_KEYS = {
    "power", "power_dbm", "power_w", "antennas", "bias", "bias_db", "density",
    "pathloss_exp", "sinr_threshold_db", "sinr_threshold",
}
TOP_KEYS = {
    "user_density", "access_threshold_dbm", "access_threshold_w", "noise_dbm", "noise_w",
    "amp_efficiency", "circuit_power_w", "static_power_w",
    # defaults inherited by every tier
    "pathloss_exp", "sinr_threshold_db", "sinr_threshold", "antennas", "bias",
}


class _Unresolved(Exception):
    def __init__(self, name):
        self.name = name


def eval_expr(text, names=None):
    """Evaluate a numeric expression with a whitelisted grammar.

    >>> eval_expr("2 * lambda1", {"lambda1": 0.5})
    1.0
    """
    names = {**_CONSTS, **(names or {})}
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in names:
                v = names[node.id]
                if v is None:
                    raise _Unresolved(node.id)
                return float(v)
            raise ValueError(f"unknown name {node.id!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported syntax in {text!r}")

    return ev(tree)


def split_unit(text, units):
    """Split a trailing unit suffix (case-insensitive) off ``text``."""
    s = text.strip()
    low = s.lower()
    for u in sorted(units, key=len, reverse=True):
        if low.endswith(u.lower()):
            head = s[: len(s) - len(u)].strip()
            if head:
                return head, u.lower()
    return s, None


def power_watts(text, names=None):
    """Parse a power with optional dBm / W / mW suffix into watts."""
    num, unit = split_unit(text, ("dBm", "mW", "W"))
    v = eval_expr(num, names)
    if unit == "dbm":
        return dbm_to_watts(v)
    if unit == "mw":
        return v * 1e-3
    return v


class _Entry:
    __slots__ = ("key", "value", "line")

    def __init__(self, key, value, line):
        self.key, self.value, self.line = key, value, line


def _scan(text):
    top, tiers = {}, []
    current = top
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line.lower() != "[tier]":
                raise ConfigError(f"unknown section {line!r}", line=lineno)
            current = {}
            tiers.append(current)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.lower()
        allowed = TOP_KEYS if current is top else TIER_KEYS
        if key not in allowed:
            where = "top level" if current is top else "[tier] section"
            raise ConfigError(f"unknown key at {where}", key=key, line=lineno)
        if not value:
            raise ConfigError("empty value", key=key, line=lineno)
        if key in current:
            raise ConfigError(f"duplicate key (first on line {current[key].line})", key=key, line=lineno)
        current[key] = _Entry(key, value, lineno)
    return top, tiers


def _one_of(section, keys, what, line_hint=None):
    found = [section[k] for k in keys if k in section]
    if len(found) > 1:
        raise ConfigError(
            f"give only one of {', '.join(keys)}", key=found[1].key, line=found[1].line
        )
    if not found:
        return None
    return found[0]


def _resolve_densities(tiers):
    """Densities may refer to each other by name; resolve in dependency order."""
    names = {f"lambda{i}": None for i in range(1, len(tiers) + 1)}
    pending = list(range(len(tiers)))
    while pending:
        progressed = False
        for i in list(pending):
            ent = tiers[i].get("density")
            if ent is None:
                raise ConfigError(f"tier {i + 1} has no density", key="density")
            try:
                names[f"lambda{i + 1}"] = eval_expr(ent.value, names)
            except _Unresolved:
                continue
            except (ValueError, ZeroDivisionError, OverflowError) as exc:
                raise ConfigError(str(exc), key="density", line=ent.line) from None
            pending.remove(i)
            progressed = True
        if not progressed:
            ent = tiers[pending[0]]["density"]
            raise ConfigError("circular density references", key="density", line=ent.line)
    return names


def parse_config(text):
    """Parse configuration text into a validated :class:`NetworkConfig`."""
    top, tiers = _scan(text)
    if not tiers:
        raise ConfigError("no [tier] sections", key="tier")
    names = _resolve_densities(tiers)
    names_u = dict(names)

    def num(ent, extra=None):
        try:
            return eval_expr(ent.value, extra or names)
        except _Unresolved as exc:
            raise ConfigError(f"'{exc.name}' is not defined here", key=ent.key, line=ent.line) from None
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ConfigError(str(exc), key=ent.key, line=ent.line) from None

    ud = top.get("user_density")
    if ud is None:
        raise ConfigError("missing", key="user_density")
    user_density = num(ud)
    names_u["lambda_u"] = user_density

    def dbm_or_w(key_dbm, key_w, default):
        ent = _one_of(top, (key_dbm, key_w), key_dbm)
        if ent is None:
            return default
        if ent.key == key_dbm:
            if ent.value.strip().lower() in ("-inf", "off", "none"):
                return 0.0
            return dbm_to_watts(num(ent, names_u))
        return num(ent, names_u)

    eps = dbm_or_w("access_threshold_dbm", "access_threshold_w", 0.0)
    noise = dbm_or_w("noise_dbm", "noise_w", 0.0)
    eta = num(top["amp_efficiency"], names_u) if "amp_efficiency" in top else 1.0
    pc = num(top["circuit_power_w"], names_u) if "circuit_power_w" in top else 0.0
    ps = num(top["static_power_w"], names_u) if "static_power_w" in top else 0.0

    params = []
    for i, sec in enumerate(tiers, start=1):
        merged = {k: v for k, v in top.items() if k in TIER_KEYS}
        # a tier's own threshold overrides either spelling of the default
        if "sinr_threshold" in sec or "sinr_threshold_db" in sec:
            merged.pop("sinr_threshold", None)
            merged.pop("sinr_threshold_db", None)
        merged.update(sec)

        p_ent = _one_of(merged, ("power", "power_dbm", "power_w"), "power")
        if p_ent is None:
            raise ConfigError(f"tier {i} has no power", key="power")
        try:
            if p_ent.key == "power":
                pw = power_watts(p_ent.value, names_u)
            elif p_ent.key == "power_dbm":
                pw = dbm_to_watts(eval_expr(p_ent.value, names_u))
            else:
                pw = eval_expr(p_ent.value, names_u)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ConfigError(str(exc), key=p_ent.key, line=p_ent.line) from None

        b_ent = _one_of(merged, ("sinr_threshold", "sinr_threshold_db"), "sinr_threshold")
        if b_ent is None:
            raise ConfigError(f"tier {i} has no SINR threshold", key="sinr_threshold_db")
        beta = num(b_ent, names_u)
        if b_ent.key == "sinr_threshold_db":
            beta = db_to_linear(beta)

        bias_ent = _one_of(merged, ("bias", "bias_db"), "bias")
        bias = 1.0 if bias_ent is None else num(bias_ent, names_u)
        if bias_ent is not None and bias_ent.key == "bias_db":
            bias = db_to_linear(bias)

        if "pathloss_exp" not in merged:
            raise ConfigError(f"tier {i} has no path-loss exponent", key="pathloss_exp")
        alpha = num(merged["pathloss_exp"], names_u)
        ant = num(merged["antennas"], names_u) if "antennas" in merged else 1.0
        if ant != int(ant):
            ent = merged["antennas"]
            raise ConfigError(f"must be an integer, got {ent.value!r}", key="antennas", line=ent.line)
        params.append(
            TierParams(
                power_watts=pw,
                antennas=int(ant),
                bias=bias,
                density=names[f"lambda{i}"],
                pathloss_exp=alpha,
                sinr_threshold=beta,
            )
        )
    cfg = NetworkConfig(
        tiers=tuple(params),
        user_density=user_density,
        access_threshold=eps,
        noise_watts=noise,
        amp_efficiency=eta,
        circuit_power_watts=pc,
        static_power_watts=ps,
    )
    return validate(cfg)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def dump_config(config):
    """Serialise in linear units with ``repr`` floats, so parsing round-trips exactly."""
    lines = [
        f"user_density = {config.user_density!r}",
        f"access_threshold_w = {config.access_threshold!r}",
        f"noise_w = {config.noise_watts!r}",
        f"amp_efficiency = {config.amp_efficiency!r}",
        f"circuit_power_w = {config.circuit_power_watts!r}",
        f"static_power_w = {config.static_power_watts!r}",
    ]
    for t in config.tiers:
        lines += [
            "",
            "[tier]",
            f"power_w = {t.power_watts!r}",
            f"antennas = {t.antennas:d}",
            f"bias = {t.bias!r}",
            f"density = {t.density!r}",
            f"pathloss_exp = {t.pathloss_exp!r}",
            f"sinr_threshold = {t.sinr_threshold!r}",
        ]
    return "\n".join(lines) + "\n"
