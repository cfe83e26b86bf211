"""Tier association, BS activation and serving-distance statistics.

A user attaches to the tier whose strongest truncated long-term received
power P_k M_k B_k D^-alpha_k is largest, provided it clears the access
threshold.  Integrals run over the squared serving distance ``x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import serving_radius_sq, validate
from .numerics import integrate

ASSOC_REL_TOL = 1e-12


def exclusion_terms(config, k):
    """Pairs (c_j, p_j) with sum_j c_j x**p_j the void exponent seen by tier k.

    ``x`` is the squared distance to the tier-k serving BS; the probability
    that no tier-j BS beats it is exp(-c_j x**p_j).
    """
    tk = config.tiers[k]
    out = []
    for tj in config.tiers:
        c = math.pi * tj.density * (tj.omega / tk.omega) ** tj.delta
        out.append((c, tj.delta / tk.delta))
    return out


def _void_prob(terms):
    def f(x):
        return math.exp(-math.fsum(c * x**p for c, p in terms))

    return f


def _void_integral(config, k, rel_tol=ASSOC_REL_TOL):
    """int_0^{R_k^2} exp(-sum_j c_j x^p_j) dx by quadrature."""
    terms = exclusion_terms(config, k)
    hi = serving_radius_sq(config, k)
    # length scale on which the integrand decays by e
    scale = 1.0 / math.fsum(c for c, _ in terms)
    return integrate(_void_prob(terms), 0.0, hi, rel_tol, scale=scale)


def _closed_form_fraction(config):
    """1 - exp(-pi Lambda eps^-delta), the probability of being covered at all."""
    eps = config.access_threshold
    if eps == 0:
        return 1.0
    return -math.expm1(-math.pi * config.lambda_cap * eps ** (-config.delta))


def assoc_prob(config, k, method="auto"):
    """Probability that a random user attaches to tier ``k`` (0-based).

    ``method`` is "closed" (common path-loss exponent only), "quad", or
    "auto", which picks the closed form whenever it applies.
    """
    if method == "auto":
        method = "closed" if config.equal_alpha else "quad"
    t = config.tiers[k]
    if method == "closed":
        if not config.equal_alpha:
            raise ValueError("closed form needs a common path-loss exponent")
        share = t.density * t.omega**config.delta / config.lambda_cap
        return share * _closed_form_fraction(config)
    if method == "quad":
        return math.pi * t.density * float(_void_integral(config, k))
    raise ValueError(f"unknown method {method!r}")


def activation_prob(config, k, assoc=None, method="auto"):
    """Probability that a tier-k BS has at least one associated user.

    Modelled as 1 - exp(-(lambda_u/lambda_k) T_k): the load of a BS is
    taken as Poisson with the mean cell load.
    """
    t = config.tiers[k]
    if assoc is None:
        assoc = assoc_prob(config, k, method=method)
    return -math.expm1(-config.user_density / t.density * assoc)


def activation_prob_integral(config, k):
    """Activation probability with the void integral done by quadrature."""
    return -math.expm1(-math.pi * config.user_density * float(_void_integral(config, k)))


def active_density(config, k):
    return activation_prob(config, k) * config.tiers[k].density


def no_coverage_prob(config):
    """Probability that no tier clears the access threshold."""
    if config.equal_alpha:
        eps = config.access_threshold
        if eps == 0:
            return 0.0
        return math.exp(-math.pi * config.lambda_cap * eps ** (-config.delta))
    return max(0.0, 1.0 - math.fsum(assoc_prob(config, k) for k in range(config.num_tiers)))


def serving_distance_pdf(config, k, assoc=None):
    """Density of the distance to the serving BS given association with tier k.

    The returned callable accepts scalars or arrays of distances (metres).
    """
    t = config.tiers[k]
    if assoc is None:
        assoc = assoc_prob(config, k)
    terms = exclusion_terms(config, k)
    r_max = math.sqrt(serving_radius_sq(config, k))
    norm = 2.0 * math.pi * t.density / assoc

    def pdf(x):
        x = np.asarray(x, dtype=float)
        x2 = x * x
        expo = np.zeros_like(x2)
        for c, p in terms:
            expo += c * x2**p
        out = np.where((x >= 0) & (x <= r_max), norm * x * np.exp(-expo), 0.0)
        return out if out.ndim else float(out)

    return pdf


@dataclass(frozen=True)
class AssocReport:
    assoc: tuple
    activation: tuple
    active_density: tuple
    no_coverage_prob: float
    lambda_cap: float | None


def assoc_report(config):
    from .model import derive

    validate(config)
    d = derive(config)
    return AssocReport(
        assoc=tuple(x.assoc_prob for x in d),
        activation=tuple(x.activation_prob for x in d),
        active_density=tuple(x.active_density for x in d),
        no_coverage_prob=no_coverage_prob(config),
        lambda_cap=config.lambda_cap if config.equal_alpha else None,
    )
