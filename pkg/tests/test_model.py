import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetnet.errors import ConfigError
from hetnet.model import (
    NetworkConfig,
    TierParams,
    as_dict,
    db_to_linear,
    dbm_to_watts,
    derive,
    from_dict,
    linear_to_db,
    serving_radius_sq,
    validate,
    watts_to_dbm,
)

from .conftest import LAMBDA1, three_tier


def test_unit_conversions():
    assert dbm_to_watts(30) == pytest.approx(1.0)
    assert dbm_to_watts(0) == pytest.approx(1e-3)
    assert db_to_linear(10) == pytest.approx(10.0)
    assert watts_to_dbm(1.0) == pytest.approx(30.0)
    assert linear_to_db(100.0) == pytest.approx(20.0)


@given(st.floats(-200, 100))
def test_dbm_round_trip(x):
    assert watts_to_dbm(dbm_to_watts(x)) == pytest.approx(x, abs=1e-9)


def test_reference_config_is_accepted_with_equal_alpha():
    c = validate(three_tier())
    assert c.equal_alpha
    assert c.num_tiers == 3
    assert c.tiers[1].omega == pytest.approx(0.01 * 2 * 2)


@pytest.mark.parametrize(
    "change,key",
    [
        (dict(pathloss_exp=2.0), "pathloss_exp"),
        (dict(antennas=0), "antennas"),
        (dict(antennas=1.5), "antennas"),
        (dict(density=-1.0), "density"),
        (dict(bias=0.0), "bias"),
        (dict(power_watts=math.nan), "power"),
        (dict(sinr_threshold=0.0), "sinr_threshold"),
    ],
)
def test_invalid_tier_rejected(change, key):
    with pytest.raises(ConfigError) as exc:
        validate(three_tier().with_tier(1, **change))
    assert key in str(exc.value) and "tier[2]" in str(exc.value)


@pytest.mark.parametrize(
    "change",
    [dict(user_density=0.0), dict(access_threshold=-1.0), dict(noise_watts=math.inf), dict(amp_efficiency=1.5)],
)
def test_invalid_network_rejected(change):
    with pytest.raises(ConfigError):
        validate(three_tier().replace(**change))


def test_empty_network_rejected():
    with pytest.raises(ConfigError):
        validate(NetworkConfig(tiers=(), user_density=1.0))


def test_mixed_exponents_flag():
    c = three_tier().with_tier(2, pathloss_exp=3.5)
    assert not c.equal_alpha
    with pytest.raises(ValueError):
        c.lambda_cap


def test_serving_radius():
    c = three_tier(eps_dbm=-80)
    t = c.tiers[0]
    # received biased power at the edge equals the threshold
    r = math.sqrt(serving_radius_sq(c, 0))
    assert t.omega * r ** (-t.pathloss_exp) == pytest.approx(c.access_threshold, rel=1e-12)
    assert serving_radius_sq(three_tier(eps_dbm=None), 0) == math.inf


def test_derive_is_consistent(cfg3):
    d = derive(cfg3)
    assert len(d) == 3
    for x, t in zip(d, cfg3.tiers):
        assert x.active_density == pytest.approx(x.activation_prob * t.density)
        assert 0 <= x.assoc_prob <= 1 and 0 <= x.activation_prob <= 1


def test_config_is_immutable_and_copies(cfg3):
    with pytest.raises(Exception):
        cfg3.user_density = 1.0
    c2 = cfg3.with_tier(0, bias=3.0)
    assert c2.tiers[0].bias == 3.0 and cfg3.tiers[0].bias == 1.0
    assert c2.with_all_tiers(bias=1.0).tiers[2].bias == 1.0


def test_dict_round_trip_through_json(cfg3):
    d = json.loads(json.dumps(as_dict(cfg3)))
    assert from_dict(d) == cfg3
    assert isinstance(from_dict(d).tiers[0], TierParams)
    assert d["tiers"][0]["density"] == LAMBDA1
