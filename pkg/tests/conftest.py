import math
import os

import pytest
from hypothesis import settings

from hetnet.model import NetworkConfig, TierParams, db_to_linear, dbm_to_watts

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

LAMBDA1 = 1.0 / (math.pi * 500.0**2)
# one status line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []
CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def tier(p_dbm, m, b, lam, alpha=4.0, beta_db=5.0):
    return TierParams(dbm_to_watts(p_dbm), m, b, lam, alpha, db_to_linear(beta_db))


def three_tier(eps_dbm=-80.0, noise_dbm=-90.0, beta_db=5.0, lam_u=20 * LAMBDA1, **kw):
    """Macro/pico/femto reference network."""
    return NetworkConfig(
        tiers=(
            tier(30, 4, 1, LAMBDA1, beta_db=beta_db),
            tier(10, 2, 2, 4 * LAMBDA1, beta_db=beta_db),
            tier(0, 1, 4, 10 * LAMBDA1, beta_db=beta_db),
        ),
        user_density=lam_u,
        access_threshold=0.0 if eps_dbm is None else dbm_to_watts(eps_dbm),
        noise_watts=0.0 if noise_dbm is None else dbm_to_watts(noise_dbm),
        **kw,
    )


def two_tier(eps_dbm=-80.0, b2=1.0, m=(4, 2), lam2=4 * LAMBDA1, lam_u=20 * LAMBDA1, beta_db=5.0, noise_dbm=None):
    """Macro/pico network."""
    return NetworkConfig(
        tiers=(tier(30, m[0], 1, LAMBDA1, beta_db=beta_db), tier(10, m[1], b2, lam2, beta_db=beta_db)),
        user_density=lam_u,
        access_threshold=0.0 if eps_dbm is None else dbm_to_watts(eps_dbm),
        noise_watts=0.0 if noise_dbm is None else dbm_to_watts(noise_dbm),
    )


def single_tier(eps_dbm=-80.0, m=4, lam_u=20 * LAMBDA1, beta_db=5.0, noise_dbm=None):
    return NetworkConfig(
        tiers=(tier(30, m, 1, LAMBDA1, beta_db=beta_db),),
        user_density=lam_u,
        access_threshold=0.0 if eps_dbm is None else dbm_to_watts(eps_dbm),
        noise_watts=0.0 if noise_dbm is None else dbm_to_watts(noise_dbm),
    )


@pytest.fixture
def cfg3():
    return three_tier()


@pytest.fixture
def config_dir():
    return os.path.abspath(CONFIG_DIR)


def random_config(rng, num_tiers=None, equal_alpha=True, eps=True, noise=False):
    """Random but well-scaled network, drawn from a numpy Generator."""
    K = int(rng.integers(1, 5)) if num_tiers is None else num_tiers
    alpha = float(rng.uniform(2.5, 5.0))
    tiers = []
    for _ in range(K):
        a = alpha if equal_alpha else float(rng.uniform(2.5, 5.0))
        tiers.append(
            TierParams(
                power_watts=float(10 ** rng.uniform(-3, 1)),
                antennas=int(rng.integers(1, 7)),
                bias=float(10 ** rng.uniform(0, 1)),
                density=float(LAMBDA1 * 10 ** rng.uniform(0, 1.5)),
                pathloss_exp=a,
                sinr_threshold=float(10 ** rng.uniform(-1, 1.5)),
            )
        )
    return NetworkConfig(
        tiers=tuple(tiers),
        user_density=float(LAMBDA1 * 10 ** rng.uniform(0, 2)),
        access_threshold=float(10 ** rng.uniform(-12, -8)) if eps else 0.0,
        noise_watts=float(10 ** rng.uniform(-14, -10)) if noise else 0.0,
    )


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda x: int(x.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
