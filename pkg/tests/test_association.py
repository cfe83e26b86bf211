import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetnet.association import (
    activation_prob,
    activation_prob_integral,
    active_density,
    assoc_prob,
    assoc_report,
    exclusion_terms,
    no_coverage_prob,
    serving_distance_pdf,
)
from hetnet.model import NetworkConfig, TierParams, dbm_to_watts, derive, serving_radius_sq
from hetnet.numerics import integrate

from .conftest import LAMBDA1, random_config, single_tier, three_tier


def test_hand_value_half():
    # pi * lambda * Omega^delta * eps^-delta = ln 2
    eps = (1.0 / math.log(2.0)) ** 2
    c = NetworkConfig((TierParams(1.0, 1, 1.0, 1 / math.pi, 4.0, 1.0),), 1.0, eps)
    assert assoc_prob(c, 0) == pytest.approx(0.5, rel=1e-14)
    assert assoc_prob(c, 0, method="quad") == pytest.approx(0.5, rel=1e-12)


def test_single_tier_without_threshold_always_associates():
    assert assoc_prob(single_tier(eps_dbm=None), 0) == 1.0
    assert no_coverage_prob(single_tier(eps_dbm=None)) == 0.0


@pytest.mark.parametrize("eps_dbm", np.arange(-110, -49, 5))
def test_total_probability(eps_dbm):
    c = three_tier(eps_dbm=float(eps_dbm))
    total = math.fsum(assoc_prob(c, k) for k in range(3)) + no_coverage_prob(c)
    assert total == pytest.approx(1.0, abs=1e-14)


def test_zero_threshold_shares():
    c = three_tier(eps_dbm=None)
    lam = c.lambda_cap
    for k, t in enumerate(c.tiers):
        assert assoc_prob(c, k) == pytest.approx(t.density * t.omega**c.delta / lam, rel=1e-14)


@pytest.mark.parametrize("seed", range(12))
def test_closed_matches_quadrature(seed):
    c = random_config(np.random.default_rng(seed))
    for k in range(c.num_tiers):
        T = assoc_prob(c, k, method="closed")
        assert assoc_prob(c, k, method="quad") == pytest.approx(T, rel=1e-10)
        assert activation_prob_integral(c, k) == pytest.approx(activation_prob(c, k), rel=1e-10)


@pytest.mark.parametrize("seed", range(6))
def test_general_exponent_total_probability(seed):
    c = random_config(np.random.default_rng(100 + seed), equal_alpha=False)
    total = math.fsum(assoc_prob(c, k) for k in range(c.num_tiers)) + no_coverage_prob(c)
    assert total == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        assoc_prob(c, 0, method="closed")


def test_activation_hand_value():
    # T = 1/2 and lambda_u = lambda_k
    eps = (1.0 / math.log(2.0)) ** 2
    c = NetworkConfig((TierParams(1.0, 1, 1.0, 1 / math.pi, 4.0, 1.0),), 1 / math.pi, eps)
    assert activation_prob(c, 0) == pytest.approx(1 - math.exp(-0.5), rel=1e-13)
    assert active_density(c, 0) == pytest.approx(0.393469340287 / math.pi, rel=1e-10)


def test_activation_saturates_with_users():
    c = single_tier(eps_dbm=None, lam_u=1e6 * LAMBDA1)
    assert activation_prob(c, 0) == pytest.approx(1.0, abs=1e-6)


def test_large_threshold_empties_tiers():
    c = three_tier(eps_dbm=200.0)
    for k in range(3):
        assert assoc_prob(c, k) < 1e-12
        assert activation_prob(c, k) < 1e-10
        assert active_density(c, k) < 1e-10 * c.tiers[k].density


def test_active_density_tends_to_user_density():
    lam_u = 20 * LAMBDA1
    c = single_tier(eps_dbm=None, lam_u=lam_u).with_tier(0, density=1e6 * lam_u)
    assert active_density(c, 0) == pytest.approx(lam_u, rel=1e-3)


@given(st.floats(0.1, 50.0), st.floats(1.1, 10.0))
def test_activation_monotone(ratio, factor):
    base = three_tier(lam_u=ratio * LAMBDA1)
    more_users = base.replace(user_density=factor * base.user_density)
    denser = base.with_tier(1, density=factor * base.tiers[1].density)
    a0 = activation_prob(base, 1)
    assert activation_prob(more_users, 1) >= a0
    assert activation_prob(denser, 1) <= a0
    assert active_density(denser, 1) >= active_density(base, 1) * (1 - 1e-12)


def test_dominant_tier_limit():
    eps = dbm_to_watts(-80)
    big = TierParams(1.0, 4, 1.0, LAMBDA1, 4.0, 1.0)
    # lambda * Omega ratio 1e6 in favour of the big tier
    small = TierParams(1e-3 / 4, 1, 1.0, LAMBDA1 / 1e3, 4.0, 1.0)
    c = NetworkConfig((big, small), 20 * LAMBDA1, eps)
    limit = -math.expm1(-math.pi * big.density * big.omega**0.5 * eps**-0.5)
    assert assoc_prob(c, 0) == pytest.approx(limit, abs=1e-4)


@pytest.mark.parametrize("k", range(3))
def test_serving_pdf_normalised(k):
    c = three_tier()
    f = serving_distance_pdf(c, k)
    r = math.sqrt(serving_radius_sq(c, k))
    assert integrate(f, 0.0, r, 1e-12) == pytest.approx(1.0, abs=1e-8)
    assert f(r * 1.0001) == 0.0
    assert f(-1.0) == 0.0


def test_serving_pdf_general_exponent_normalised():
    c = three_tier().with_tier(1, pathloss_exp=3.5)
    for k in range(3):
        r = math.sqrt(serving_radius_sq(c, k))
        assert integrate(serving_distance_pdf(c, k), 0.0, r, 1e-12) == pytest.approx(1.0, abs=1e-8)


def test_serving_pdf_rayleigh():
    c = single_tier(eps_dbm=None)
    lam = c.tiers[0].density
    f = serving_distance_pdf(c, 0)
    x = np.linspace(0, 2000, 41)
    ref = 2 * math.pi * lam * x * np.exp(-math.pi * lam * x * x)
    assert np.allclose(f(x), ref, rtol=1e-13, atol=0)


def test_exclusion_terms_self():
    c = three_tier()
    for k in range(3):
        ck, pk = exclusion_terms(c, k)[k]
        assert ck == pytest.approx(math.pi * c.tiers[k].density) and pk == 1.0


def test_report_fields(cfg3):
    r = assoc_report(cfg3)
    d = derive(cfg3)
    assert r.assoc == tuple(x.assoc_prob for x in d)
    assert math.fsum(r.assoc) + r.no_coverage_prob == pytest.approx(1.0, abs=1e-14)
    assert r.lambda_cap == cfg3.lambda_cap
    assert assoc_report(cfg3.with_tier(0, pathloss_exp=3.0)).lambda_cap is None
