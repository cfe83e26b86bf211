"""Throughput, achievable rate and energy metrics built on the outage analysis."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import NumericsError
from .model import derive, validate
from .numerics import integrate
from .outage import outage_exact, outage_int

AAR_REL_TOL = 1e-6
GRID_POINTS = 200
GRID_SPAN = 1e-12


def _outage_fn(kind):
    if kind == "int":
        return outage_int
    if kind == "exact":
        return outage_exact
    raise ValueError(f"outage kind must be 'int' or 'exact', got {kind!r}")


def rate(tier):
    return math.log2(1.0 + tier.sinr_threshold)


def ant(config, outage="int"):
    """Area network throughput in bits/s/Hz/m^2.

    Sums, over tiers, the density of active BSs times the success
    probability times the fixed rate log2(1 + beta_k).  ``outage`` selects the
    interference-limited ("int", default) or noisy ("exact") outage.
    """
    validate(config)
    d = derive(config)
    fn = _outage_fn(outage)
    terms = []
    for k, t in enumerate(config.tiers):
        if d[k].activation_prob == 0.0:
            continue
        terms.append(t.density * d[k].activation_prob * (1.0 - fn(config, k)) * rate(t))
    return math.fsum(terms)


def threshold_grid(config, points=GRID_POINTS):
    """Log-spaced thresholds over [1e-12 min Omega, min Omega)."""
    hi = min(t.omega for t in config.tiers)
    return np.geomspace(GRID_SPAN * hi, hi, points, endpoint=False)


@dataclass(frozen=True)
class ThresholdOptimum:
    eps_star: float
    ant_star: float
    at_boundary: bool
    grid: np.ndarray
    values: np.ndarray


def optimal_threshold(config, grid_points=GRID_POINTS, outage="int"):
    """Access threshold maximising the area throughput.

    A log grid search is the guarantee; a golden-section pass in log(eps)
    over the two grid cells around the best point refines it.  When the best
    grid point is an end point, or the throughput is flat, the grid point is
    returned with ``at_boundary`` set.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    validate(config)
    grid = threshold_grid(config, grid_points)

    def w(eps):
        return ant(config.replace(access_threshold=float(eps)), outage)

    vals = np.array([w(e) for e in grid])
    i = int(np.argmax(vals))
    flat = vals.max() - vals.min() <= 1e-12 * abs(vals.max())
    if flat or i == 0 or i == grid_points - 1:
        return ThresholdOptimum(float(grid[i]), float(vals[i]), True, grid, vals)
    lg = np.log(grid)
    best_eps, best_val = float(grid[i]), float(vals[i])
    try:
        res = optimize.minimize_scalar(
            lambda s: -w(math.exp(s)),
            bracket=(lg[i - 1], lg[i], lg[i + 1]),
            method="golden",
            options={"xtol": 1e-10},
        )
        if res.success and -res.fun > best_val and lg[i - 1] <= res.x <= lg[i + 1]:
            best_eps, best_val = math.exp(res.x), float(-res.fun)
    except ValueError:
        # ties on the grid leave no strict bracket; keep the grid maximiser
        pass
    return ThresholdOptimum(best_eps, best_val, False, grid, vals)


def coverage_at(config, k, beta, outage="int"):
    """P{SINR > beta} for a tier-k user, with tier k's threshold set to ``beta``."""
    if beta == 0.0:
        return 1.0
    c = config.with_tier(k, sinr_threshold=float(beta))
    return 1.0 - _outage_fn(outage)(c, k)


def aar(config, k, rel_tol=AAR_REL_TOL):
    """Average achievable rate (bits/s/Hz) of a user served by tier ``k``.

    (1/ln 2) int_0^inf P{SINR > b}/(1+b) db, integrated over b = t/(1-t).
    Noise-free common-exponent networks use the closed interference-limited
    coverage; otherwise the noisy coverage is integrated over distance first
    and over the threshold second.
    """
    validate(config)
    if derive(config)[k].assoc_prob == 0.0:
        return 0.0
    kind = "int" if (config.noise_watts == 0 and config.equal_alpha) else "exact"

    def f(b):
        return coverage_at(config, k, b, kind) / (1.0 + b)

    val = integrate(f, 0.0, math.inf, rel_tol, scale=1.0)
    return float(val) / math.log(2.0)


def aar_overall(config):
    """Association-weighted average achievable rate and the per-tier values."""
    d = derive(config)
    per = tuple(aar(config, k) for k in range(config.num_tiers))
    return math.fsum(x.assoc_prob * u for x, u in zip(d, per)), per


def _dynamic_power(config, activation):
    eta = config.amp_efficiency
    return math.fsum(
        t.density * a * (t.power_watts / eta + t.antennas * config.circuit_power_watts)
        for t, a in zip(config.tiers, activation)
    )


def area_power(config):
    """Area power consumption in W/m^2: gated dynamic power plus static power."""
    d = derive(config)
    dyn = _dynamic_power(config, [x.activation_prob for x in d])
    static = math.fsum(t.density * config.static_power_watts for t in config.tiers)
    return dyn + static


def energy_efficiency(config, outage="int"):
    """(F, F_T): throughput per area power, and per dynamic power only."""
    validate(config)
    d = derive(config)
    w = ant(config, outage)
    total = area_power(config)
    dyn = _dynamic_power(config, [x.activation_prob for x in d])
    if total <= 0.0:
        raise NumericsError("area power consumption is zero; energy efficiency undefined")
    if dyn <= 0.0:
        raise NumericsError("no active BS carries dynamic power; transmission efficiency undefined")
    return w / total, w / dyn


def f_zero(config):
    """Energy efficiency in the limit of a vanishing access threshold."""
    validate(config)
    if not config.equal_alpha:
        raise ValueError("the zero-threshold limit needs a common path-loss exponent")
    c0 = config.replace(access_threshold=0.0)
    lam = config.lambda_cap
    dl = config.delta
    act = [-math.expm1(-config.user_density / lam * t.omega**dl) for t in config.tiers]
    num = math.fsum(
        t.density * a * (1.0 - outage_int(c0, k)) * rate(t)
        for k, (t, a) in enumerate(zip(config.tiers, act))
    )
    static = math.fsum(t.density * config.static_power_watts for t in config.tiers)
    return num / (_dynamic_power(config, act) + static)


def ft_inf(config):
    """Transmission efficiency as the access threshold grows without bound."""
    validate(config)
    if not config.equal_alpha:
        raise ValueError("the large-threshold limit needs a common path-loss exponent")
    dl = config.delta
    # lambda_k Omega_k^delta plays the role of the active density
    share = [t.omega**dl for t in config.tiers]
    num = math.fsum(t.density * s * rate(t) for s, t in zip(share, config.tiers))
    return num / _dynamic_power(config, share)


@dataclass(frozen=True)
class EfficiencyReport:
    ant: float
    eps_star: float
    ant_star: float
    eps_at_boundary: bool
    aar: float
    aar_per_tier: tuple
    area_power: float
    energy_eff: float
    trans_eff: float
    f_zero: float | None
    ft_inf: float | None


def efficiency_report(config, grid_points=GRID_POINTS):
    validate(config)
    opt = optimal_threshold(config, grid_points)
    u, per = aar_overall(config)
    F, FT = energy_efficiency(config)
    return EfficiencyReport(
        ant=ant(config),
        eps_star=opt.eps_star,
        ant_star=opt.ant_star,
        eps_at_boundary=opt.at_boundary,
        aar=u,
        aar_per_tier=per,
        area_power=area_power(config),
        energy_eff=F,
        trans_eff=FT,
        f_zero=f_zero(config) if config.equal_alpha else None,
        ft_inf=ft_inf(config) if config.equal_alpha else None,
    )


__all__ = [
    "EfficiencyReport",
    "ThresholdOptimum",
    "aar",
    "aar_overall",
    "ant",
    "area_power",
    "coverage_at",
    "efficiency_report",
    "energy_efficiency",
    "f_zero",
    "ft_inf",
    "optimal_threshold",
    "rate",
    "threshold_grid",
]
