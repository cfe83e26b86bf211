"""Outage probability of a user served by a given tier.

A tier-k user with squared serving distance ``x`` sees desired gain
Gamma(M_k, 1) and exponentially faded interference from active BSs outside
the association exclusion region.  Coverage is written as

    P{SINR > beta | x} = sum_n y_n(x) * Poisson_{<= M_k-1-n}(sigma_k x^(alpha_k/2))

where ``y_n/y_0`` is entry n of the first column of sum_i (pi^i/i!) Q(x)^i
and Q(x) is the strictly lower-triangular Toeplitz matrix built from the
interference coefficients g_{k,1..M_k-1}(x).

For a common path-loss exponent g_{k,n}(x) = theta_{k,n} x and the integral
over ``x`` has closed or one-dimensional forms, normalised here by
``u = pi Z_k x`` to keep every intermediate quantity O(1).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .association import exclusion_terms
from .errors import NumericsError, PrecisionWarning, PreconditionError
from .model import derive, serving_radius_sq, validate
from .numerics import (
    hyp2f1_neg_scaled,
    integrate,
    lower_inc_gamma_span_scaled,
    one_norm,
    power_columns,
    reg_lower_inc_gamma,
    ToeplitzL,
)

CLAMP_TOL = 1e-9
PRECISION_RATIO = 1e12
# the completed-square closed form is used only below this cancellation ratio
CLOSED_FORM_MAX_COND = 1e6
EXACT_REL_TOL = 1e-11
EQ23_TOL = 1e-12


def phi_value(n, delta, tau):
    """Interference integral delta tau^delta int_0^tau u^(n-delta-1)/(1+u)^(n+1) du.

    The n = 0 integrand is u^-delta/(1+u).  Written through 2F1 at -tau.
    """
    if tau == 0:
        return 0.0
    if n == 0:
        return delta * hyp2f1_neg_scaled(1.0, 1.0 - delta, 2.0 - delta, tau, 1) / (1.0 - delta)
    return delta * hyp2f1_neg_scaled(n + 1.0, n - delta, n + 1.0 - delta, tau, n) / (n - delta)


def _tau(config, j, k, beta=None):
    tj, tk = config.tiers[j], config.tiers[k]
    b = tk.sinr_threshold if beta is None else beta
    return b / ((tj.antennas / tk.antennas) * (tj.bias / tk.bias))


def phi(j, k, n, config):
    """phi_{j,k}(n) for interferer tier ``j`` and serving tier ``k`` (0-based)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return phi_value(n, config.tiers[j].delta, _tau(config, j, k))


def _is_uniform_mb(config):
    t0 = config.tiers[0]
    return all(t.antennas == t0.antennas and t.bias == t0.bias for t in config.tiers)


@dataclass(frozen=True)
class PhiTable:
    """Per serving tier: phi values, interference coefficients and Z_k.

    ``coef[j, n]`` is A_j lambda_j Omega_{j,k}^delta_j phi_{j,k}(n), so that
    g_{k,n}(x) = sum_j coef[j, n] x**power[j].  ``theta``/``z``/``lambda_over``
    are filled only for a common path-loss exponent.
    """

    k: int
    tau: tuple
    phi: np.ndarray
    coef: np.ndarray
    power: tuple
    void: tuple
    sigma: float
    theta: np.ndarray | None
    z: float | None
    lambda_over: float | None  # Lambda / Omega_k^delta


@lru_cache(maxsize=4096)
def phi_table(config, k):
    validate(config)
    d = derive(config)
    tk = config.tiers[k]
    mk = tk.antennas
    K = config.num_tiers
    tau = tuple(_tau(config, j, k) for j in range(K))
    ph = np.array(
        [[phi_value(n, config.tiers[j].delta, tau[j]) for n in range(mk)] for j in range(K)]
    )
    dens = np.array(
        [
            d[j].activation_prob * config.tiers[j].density
            * (config.tiers[j].omega / tk.omega) ** config.tiers[j].delta
            for j in range(K)
        ]
    )
    coef = dens[:, None] * ph
    void = exclusion_terms(config, k)
    power = tuple(p for _, p in void)
    sigma = tk.sinr_threshold * config.noise_watts / tk.power_watts
    theta = z = lam = None
    if config.equal_alpha:
        theta = np.array([math.fsum(coef[:, n]) for n in range(mk)])
        lam = config.lambda_cap / tk.omega**config.delta
        z = theta[0] + lam
    return PhiTable(k, tau, ph, coef, power, tuple(void), sigma, theta, z, lam)


def z_trig(config, k, beta=None):
    """Z_k for uniform M, B and alpha = 4 via the arctangent form."""
    d = derive(config)
    tk = config.tiers[k]
    b = tk.sinr_threshold if beta is None else beta
    rb = math.sqrt(b)
    return math.fsum(
        t.density * math.sqrt(t.power_watts / tk.power_watts) * (1.0 + d[j].activation_prob * rb * math.atan(rb))
        for j, t in enumerate(config.tiers)
    )


def clamp_probability(v, what="probability"):
    v = float(v)
    if 0.0 <= v <= 1.0:
        return v
    if -CLAMP_TOL <= v < 0.0:
        return 0.0
    if 1.0 < v <= 1.0 + CLAMP_TOL:
        return 1.0
    raise NumericsError(f"{what} = {v!r} lies outside [0, 1] beyond roundoff")


def _poisson_cdf_terms(lam, count):
    """e^-lam lam^p / p! for p = 0..count-1."""
    if lam == 0:
        out = np.zeros(count)
        out[0] = 1.0
        return out
    p = np.arange(count)
    logs = -lam + p * math.log(lam) - np.array([math.lgamma(q + 1.0) for q in p])
    return np.exp(logs)


def _noise_weights(tab, config, x):
    tk = config.tiers[tab.k]
    s = tab.sigma * x ** (tk.pathloss_exp / 2.0)
    mk = tk.antennas
    pois = _poisson_cdf_terms(s, mk)
    # weight for y_n is P{Poisson(s) <= M_k - 1 - n}
    return np.cumsum(pois)[::-1]


def _coverage_general(config, k, noise=True):
    """Coverage of a tier-k user by quadrature over squared distance."""
    d = derive(config)
    tab = phi_table(config, k)
    tk = config.tiers[k]
    mk = tk.antennas
    use_noise = noise and tab.sigma > 0
    pw = np.array(tab.power)
    fact = np.array([math.pi**i / math.factorial(i) for i in range(mk)])

    def f(x):
        if x == 0.0:
            return 1.0
        xp = x**pw
        g = tab.coef.T @ xp
        expo = math.fsum(c * v for (c, _), v in zip(tab.void, xp)) + math.pi * g[0]
        base = math.exp(-expo)
        if base == 0.0:
            return 0.0
        y = fact @ power_columns(g[1:]) if mk > 1 else np.ones(1)
        if use_noise:
            y = y * _noise_weights(tab, config, x)
        return base * math.fsum(y)

    hi = serving_radius_sq(config, k)
    scale = 1.0 / (math.fsum(c for c, _ in tab.void) + math.pi * float(np.sum(tab.coef[:, 0])))
    val = integrate(f, 0.0, hi, EXACT_REL_TOL, scale=scale)
    return math.pi * tk.density / d[k].assoc_prob * float(val)


def _theta_hat_columns(tab, mk):
    """First columns of (Theta/Z)^i, i = 0..M_k-1, as rows."""
    if mk == 1:
        return np.ones((1, 1))
    return power_columns(tab.theta[1:] / tab.z)


def _coverage_prefactor(config, k, tab):
    """lambda_k / (T_k Z_k)."""
    d = derive(config)
    return config.tiers[k].density / (d[k].assoc_prob * tab.z)


def _upper_u(config, k, tab):
    hi = serving_radius_sq(config, k)
    return math.inf if math.isinf(hi) else math.pi * tab.z * hi


def _coverage_int_closed(config, k):
    """Interference-limited coverage, common exponent: sum_i ||(Theta/Z)^i||_1 P(i+1, U)."""
    tab = phi_table(config, k)
    mk = config.tiers[k].antennas
    cols = _theta_hat_columns(tab, mk)
    u = _upper_u(config, k, tab)
    terms = [one_norm(ToeplitzL(cols[i])) * reg_lower_inc_gamma(i + 1.0, u) for i in range(mk)]
    return _coverage_prefactor(config, k, tab) * math.fsum(terms)


def _j_quad(i, d, sig, half_alpha, u_hi):
    """int_0^U u^i e^-u Pois_d(sig u^(alpha/2)) du with Pois_d the Poisson(.) pmf at d."""
    lg = math.lgamma(d + 1.0)

    def f(u):
        if u == 0.0:
            return 1.0 if (i == 0 and d == 0) else 0.0
        s = sig * u**half_alpha
        lu = math.log(u)
        if s == 0.0:
            return math.exp(i * lu - u) if d == 0 else 0.0
        return math.exp(i * lu - u - s + d * math.log(s) - lg)

    # the integrand peaks near u = i + alpha d / 2
    scale = max(1.0, i + half_alpha * d)
    return float(integrate(f, 0.0, u_hi, EXACT_REL_TOL, scale=scale))


def _j_closed_alpha4(i, d, sig, u_hi):
    """Completed-square form of the alpha = 4 integral, with its cancellation ratio.

    Returns (value, cond); ``value`` is None when the terms would overflow.
    """
    if sig == 0.0:
        if d > 0:
            return 0.0, 1.0
        return math.exp(math.lgamma(i + 1.0)) * reg_lower_inc_gamma(i + 1.0, u_hi), 1.0
    p = i + 2 * d
    c = 1.0 / (2.0 * sig)
    x1 = sig * c * c
    # sig (u + c)^2 - sig c^2, exactly
    width = math.inf if math.isinf(u_hi) else u_hi * (1.0 + sig * u_hi)
    # prefactor sig^d / d! from the Poisson weight, folded into each term's log
    lpre = d * math.log(sig) - math.lgamma(d + 1.0)
    logs, signs = [], []
    for j in range(p + 1):
        s = 0.5 * (j + 1)
        diff = lower_inc_gamma_span_scaled(s, x1, width)
        if diff <= 0.0:
            continue
        lt = (
            math.lgamma(p + 1.0) - math.lgamma(j + 1.0) - math.lgamma(p - j + 1.0)
            + (p - j) * math.log(c) - 0.5 * (j + 1) * math.log(sig) + math.log(0.5 * diff)
            + lpre
        )
        logs.append(lt)
        signs.append(-1.0 if (p - j) % 2 else 1.0)
    if not logs or max(logs) > 700.0:
        return None, math.inf
    terms = [sg * math.exp(lt) for sg, lt in zip(signs, logs)]
    val = math.fsum(terms)
    mag = math.fsum(abs(t) for t in terms)
    cond = math.inf if val <= 0.0 else mag / val
    return val, cond


def j_integral(config, k, i, d, method):
    """Normalised distance integral for the noisy common-exponent outage.

    ``method`` is "quad" or "closed" (alpha = 4 only).  Returns (value, cond).
    """
    tab = phi_table(config, k)
    alpha = config.alpha
    sig = tab.sigma / (math.pi * tab.z) ** (alpha / 2.0)
    u_hi = _upper_u(config, k, tab)
    if method == "quad":
        return _j_quad(i, d, sig, alpha / 2.0, u_hi), 1.0
    if method == "closed":
        if abs(alpha - 4.0) > 1e-12:
            raise ValueError("closed form needs alpha = 4")
        return _j_closed_alpha4(i, d, sig, u_hi)
    raise ValueError(f"unknown method {method!r}")


def _coverage_equal_alpha(config, k, j_method):
    """Noisy coverage for a common exponent; returns (coverage, used_closed)."""
    tab = phi_table(config, k)
    mk = config.tiers[k].antennas
    cols = _theta_hat_columns(tab, mk)
    cache = {}
    used_closed = j_method == "closed"

    def J(i, dd):
        nonlocal used_closed
        key = (i, dd)
        if key not in cache:
            val = None
            if j_method == "closed":
                val, cond = j_integral(config, k, i, dd, "closed")
                if val is None or cond > CLOSED_FORM_MAX_COND:
                    val = None
                    used_closed = False
            if val is None:
                val, _ = j_integral(config, k, i, dd, "quad")
            cache[key] = val
        return cache[key]

    terms = []
    for n in range(mk):
        for dd in range(mk - n):
            for i in range(n + 1):
                w = cols[i][n]
                if w == 0.0:
                    continue
                terms.append(w / math.factorial(i) * J(i, dd))
    return _coverage_prefactor(config, k, tab) * math.fsum(terms), used_closed


def _limit_zero(config, k):
    """True when tier k carries no users at all (its outage is taken as 0)."""
    return derive(config)[k].assoc_prob == 0.0


def outage_exact_tagged(config, k, method="auto"):
    """Outage with noise and the name of the evaluation route.

    Routes: "general" (quadrature over distance, any exponents),
    "equal-alpha" (one-dimensional integrals per Toeplitz power),
    "alpha4-closed" (incomplete-gamma form, alpha = 4), "eps-zero" (no
    threshold, no noise).  "auto" picks the cheapest applicable route.
    """
    validate(config)
    if _limit_zero(config, k):
        return 0.0, "limit"
    tab = phi_table(config, k)
    if method == "auto":
        if not config.equal_alpha:
            method = "general"
        elif tab.sigma == 0:
            val, tag = outage_int_tagged(config, k)
            return val, tag
        elif abs(config.alpha - 4.0) <= 1e-12:
            method = "alpha4-closed"
        else:
            method = "equal-alpha"
    if method == "general":
        cov = _coverage_general(config, k, noise=True)
        tag = "general"
    elif method in ("equal-alpha", "alpha4-closed"):
        if not config.equal_alpha:
            raise ValueError(f"{method} needs a common path-loss exponent")
        jm = "closed" if method == "alpha4-closed" else "quad"
        cov, used_closed = _coverage_equal_alpha(config, k, jm)
        tag = "alpha4-closed" if used_closed else "equal-alpha"
    else:
        raise ValueError(f"unknown method {method!r}")
    return clamp_probability(1.0 - cov, f"outage of tier {k + 1}"), tag


def outage_exact(config, k, method="auto"):
    return outage_exact_tagged(config, k, method)[0]


def outage_int_tagged(config, k, method="auto"):
    """Interference-limited outage (noise ignored) and its route tag."""
    validate(config)
    if _limit_zero(config, k):
        return 0.0, "limit"
    if method == "auto":
        method = "closed" if config.equal_alpha else "general"
    if method == "general":
        cov = _coverage_general(config, k, noise=False)
        tag = "general"
    elif method == "closed":
        if not config.equal_alpha:
            raise ValueError("closed form needs a common path-loss exponent")
        _check_z_trig(config, k)
        cov = _coverage_int_closed(config, k)
        tag = "eps-zero" if config.access_threshold == 0 else "equal-alpha"
    else:
        raise ValueError(f"unknown method {method!r}")
    return clamp_probability(1.0 - cov, f"outage of tier {k + 1}"), tag


def outage_int(config, k, method="auto"):
    return outage_int_tagged(config, k, method)[0]


def _check_z_trig(config, k):
    if not (_is_uniform_mb(config) and abs(config.alpha - 4.0) <= 1e-12):
        return
    z = phi_table(config, k).z
    zt = z_trig(config, k)
    if abs(z - zt) > EQ23_TOL * abs(zt):
        raise NumericsError(f"Z_{k + 1} = {z!r} disagrees with arctangent form {zt!r}")


def _bound_z(config, k, beta):
    """Z_k with the SINR threshold replaced by ``beta`` (common exponent)."""
    d = derive(config)
    tk = config.tiers[k]
    lam = config.lambda_cap / tk.omega**config.delta
    parts = [lam]
    for j, t in enumerate(config.tiers):
        ph = phi_value(0, t.delta, _tau(config, j, k, beta))
        parts.append(d[j].activation_prob * t.density * (t.omega / tk.omega) ** t.delta * ph)
    return math.fsum(parts)


def _bound_void_integral(config, k, beta):
    d = derive(config)
    tk = config.tiers[k]
    terms = []
    for j, t in enumerate(config.tiers):
        ph = phi_value(0, t.delta, _tau(config, j, k, beta))
        c = math.pi * t.density * (t.omega / tk.omega) ** t.delta * (1.0 + d[j].activation_prob * ph)
        terms.append((c, t.delta / tk.delta))

    def f(x):
        return math.exp(-math.fsum(c * x**p for c, p in terms))

    scale = 1.0 / math.fsum(c for c, _ in terms)
    return float(integrate(f, 0.0, serving_radius_sq(config, k), EXACT_REL_TOL, scale=scale))


def _alternating_bound(config, k, scale_beta, method):
    d = derive(config)
    tk = config.tiers[k]
    mk = tk.antennas
    T = d[k].assoc_prob
    hi = serving_radius_sq(config, k)
    terms = []
    for m in range(mk + 1):
        b = m * scale_beta * tk.sinr_threshold
        if method == "closed":
            z = _bound_z(config, k, b)
            frac = 1.0 if math.isinf(hi) else -math.expm1(-math.pi * z * hi)
            val = tk.density / (T * z) * frac
        else:
            val = math.pi * tk.density / T * _bound_void_integral(config, k, b)
        terms.append(math.comb(mk, m) * (-1.0) ** m * val)
    res = math.fsum(terms)
    mag = math.fsum(abs(t) for t in terms)
    if mag > PRECISION_RATIO * abs(res):
        warnings.warn(
            f"alternating bound sum for tier {k + 1} lost precision: "
            f"terms up to {mag:.3g}, result {res:.3g}",
            PrecisionWarning,
            stacklevel=3,
        )
    return res


def outage_bounds(config, k, method="auto"):
    """(lower, upper) bounds on the interference-limited outage of tier ``k``.

    Built from the gamma-CDF sandwich (1-e^(-phi x))^M <= F(x) <= (1-e^-x)^M
    with phi = (M!)^(-1/M).
    """
    validate(config)
    if _limit_zero(config, k):
        return 0.0, 0.0
    if method == "auto":
        method = "closed" if config.equal_alpha else "general"
    if method not in ("closed", "general"):
        raise ValueError(f"unknown method {method!r}")
    mk = config.tiers[k].antennas
    phik = math.exp(-math.lgamma(mk + 1.0) / mk)
    lo = _alternating_bound(config, k, phik, method)
    hi = _alternating_bound(config, k, 1.0, method)
    return (
        clamp_probability(lo, f"lower bound of tier {k + 1}"),
        clamp_probability(hi, f"upper bound of tier {k + 1}"),
    )


def _hat_sum(phis, a, mk):
    """sum_{i<M} a^i ||Thhat^i||_1 / (1 + a phi(0))^(i+1)."""
    cols = power_columns(np.asarray(phis[1:mk], dtype=float)) if mk > 1 else np.ones((1, 1))
    den = 1.0 + a * phis[0]
    return math.fsum(a**i * float(np.sum(cols[i])) / den ** (i + 1) for i in range(mk))


ACTIVATION_SATURATION_TOL = 1e-3
POWER_DOMINANCE = 100.0


def outage_asymptotic(config, regime):
    """Limiting interference-limited outage per tier.

    Regimes: "eps_to_0" (no threshold, every BS active, uniform M and B),
    "eps_to_inf" (zero outage), "p1_to_inf" (tier-1 power dominates, at the
    configured threshold) and "p1_full" (tier-1 power and coverage both
    saturated).  Preconditions are checked and violations raise
    :class:`PreconditionError`.
    """
    validate(config)
    K = config.num_tiers
    if regime == "eps_to_inf":
        return tuple(0.0 for _ in range(K))
    if not config.equal_alpha:
        raise PreconditionError(f"regime {regime!r} needs a common path-loss exponent")
    dl = config.delta
    if regime == "eps_to_0":
        if not _is_uniform_mb(config):
            raise PreconditionError("eps_to_0 needs equal antennas and bias across tiers")
        lam = config.lambda_cap
        worst = max(
            math.exp(-config.user_density / lam * t.omega**dl) for t in config.tiers
        )
        if worst > ACTIVATION_SATURATION_TOL:
            raise PreconditionError(
                f"eps_to_0 needs user density far above BS density; "
                f"zero-threshold idle probability is {worst:.3g} > {ACTIVATION_SATURATION_TOL}"
            )
        out = []
        for t in config.tiers:
            phis = [phi_value(n, dl, t.sinr_threshold) for n in range(t.antennas)]
            out.append(clamp_probability(1.0 - _hat_sum(phis, 1.0, t.antennas)))
        return tuple(out)
    if regime in ("p1_to_inf", "p1_full"):
        t1 = config.tiers[0]
        for j, t in enumerate(config.tiers[1:], start=2):
            if t1.power_watts < POWER_DOMINANCE * t.power_watts:
                raise PreconditionError(
                    f"{regime} needs tier-1 power at least {POWER_DOMINANCE:g}x tier {j}'s"
                )
        ratio = config.user_density / t1.density
        if regime == "p1_full":
            T1 = 1.0
        else:
            eps = config.access_threshold
            T1 = 1.0 if eps == 0 else -math.expm1(-math.pi * t1.density * t1.omega**dl * eps ** (-dl))
        A1 = -math.expm1(-ratio * T1)
        out = []
        for k, tk in enumerate(config.tiers):
            phis = [phi_value(n, dl, _tau(config, 0, k)) for n in range(tk.antennas)]
            out.append(clamp_probability(1.0 - _hat_sum(phis, A1, tk.antennas) / T1))
        return tuple(out)
    raise ValueError(f"unknown regime {regime!r}")


@dataclass(frozen=True)
class OutageReport:
    assoc: tuple
    exact: tuple
    interference_limited: tuple
    lower: tuple
    upper: tuple
    exact_methods: tuple
    int_methods: tuple
    overall_exact: float
    overall_int: float
    overall_lower: float
    overall_upper: float


def outage_overall(config):
    """Per-tier outages and their association-weighted totals."""
    validate(config)
    d = derive(config)
    K = config.num_tiers
    ex = [outage_exact_tagged(config, k) for k in range(K)]
    it = [outage_int_tagged(config, k) for k in range(K)]
    bd = [outage_bounds(config, k) for k in range(K)]
    T = tuple(x.assoc_prob for x in d)

    def total(vals):
        return math.fsum(t * v for t, v in zip(T, vals))

    return OutageReport(
        assoc=T,
        exact=tuple(v for v, _ in ex),
        interference_limited=tuple(v for v, _ in it),
        lower=tuple(b[0] for b in bd),
        upper=tuple(b[1] for b in bd),
        exact_methods=tuple(m for _, m in ex),
        int_methods=tuple(m for _, m in it),
        overall_exact=total(v for v, _ in ex),
        overall_int=total(v for v, _ in it),
        overall_lower=total(b[0] for b in bd),
        overall_upper=total(b[1] for b in bd),
    )
