"""Network parameterization and per-tier derived quantities.

All quantities are SI and linear: watts, metres, m^-2.  Decibel conversions
happen at the edges (config parsing, CLI) through :func:`dbm_to_watts` and
:func:`db_to_linear`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache

from .errors import ConfigError

ALPHA_TOL = 1e-12


def dbm_to_watts(dbm):
    if dbm == -math.inf:
        return 0.0
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts):
    if watts == 0:
        return -math.inf
    return 10.0 * math.log10(watts) + 30.0


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class TierParams:
    power_watts: float
    antennas: int
    bias: float
    density: float
    pathloss_exp: float
    sinr_threshold: float

    @property
    def omega(self):
        """Biased beamformed power P*M*B that ranks tiers in association."""
        return self.power_watts * self.antennas * self.bias

    @property
    def delta(self):
        return 2.0 / self.pathloss_exp


@dataclass(frozen=True)
class NetworkConfig:
    tiers: tuple
    user_density: float
    access_threshold: float = 0.0
    noise_watts: float = 0.0
    amp_efficiency: float = 1.0
    circuit_power_watts: float = 0.0
    static_power_watts: float = 0.0
    equal_alpha: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))
        alphas = [t.pathloss_exp for t in self.tiers]
        eq = bool(alphas) and max(alphas) - min(alphas) <= ALPHA_TOL
        object.__setattr__(self, "equal_alpha", eq)

    @property
    def num_tiers(self):
        return len(self.tiers)

    @property
    def alpha(self):
        """Common path-loss exponent; only meaningful when ``equal_alpha``."""
        return self.tiers[0].pathloss_exp

    @property
    def delta(self):
        return 2.0 / self.alpha

    @property
    def lambda_cap(self):
        """Sum of lambda_j * Omega_j**delta (equal path-loss exponents)."""
        if not self.equal_alpha:
            raise ValueError("lambda_cap is defined only for a common path-loss exponent")
        d = self.delta
        return math.fsum(t.density * t.omega**d for t in self.tiers)

    def with_tier(self, k, **changes):
        """Copy with fields of tier ``k`` (0-based) replaced."""
        tiers = list(self.tiers)
        tiers[k] = replace(tiers[k], **changes)
        return replace(self, tiers=tuple(tiers))

    def with_all_tiers(self, **changes):
        return replace(self, tiers=tuple(replace(t, **changes) for t in self.tiers))

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class DerivedTier:
    omega: float
    delta: float
    serving_radius: float
    assoc_prob: float
    activation_prob: float
    active_density: float


def _check_positive(value, name):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ConfigError(f"must be a finite positive number, got {value!r}", key=name)


def validate(config):
    """Return ``config`` unchanged if every invariant holds, else raise ConfigError."""
    if not isinstance(config, NetworkConfig):
        raise ConfigError(f"expected NetworkConfig, got {type(config).__name__}")
    if config.num_tiers < 1:
        raise ConfigError("at least one tier is required", key="tiers")
    for idx, t in enumerate(config.tiers, start=1):
        name = f"tier[{idx}]"
        _check_positive(t.power_watts, f"{name}.power")
        _check_positive(t.bias, f"{name}.bias")
        _check_positive(t.density, f"{name}.density")
        _check_positive(t.sinr_threshold, f"{name}.sinr_threshold")
        if isinstance(t.antennas, bool) or int(t.antennas) != t.antennas or t.antennas < 1:
            raise ConfigError(f"must be an integer >= 1, got {t.antennas!r}", key=f"{name}.antennas")
        if not (math.isfinite(t.pathloss_exp) and t.pathloss_exp > 2.0):
            raise ConfigError(
                f"path-loss exponent must exceed 2, got {t.pathloss_exp!r}",
                key=f"{name}.pathloss_exp",
            )
    _check_positive(config.user_density, "user_density")
    eps = config.access_threshold
    if not (eps >= 0 and math.isfinite(eps)):
        raise ConfigError(f"must be finite and >= 0, got {eps!r}", key="access_threshold")
    if not (config.noise_watts >= 0 and math.isfinite(config.noise_watts)):
        raise ConfigError(f"must be finite and >= 0, got {config.noise_watts!r}", key="noise")
    if not (0.0 < config.amp_efficiency <= 1.0):
        raise ConfigError(
            f"must lie in (0, 1], got {config.amp_efficiency!r}", key="amp_efficiency"
        )
    for name in ("circuit_power_watts", "static_power_watts"):
        v = getattr(config, name)
        if not (v >= 0 and math.isfinite(v)):
            raise ConfigError(f"must be finite and >= 0, got {v!r}", key=name)
    return config


def serving_radius(omega, alpha, eps):
    if eps == 0:
        return math.inf
    return (omega / eps) ** (1.0 / alpha)


def serving_radius_sq(config, k):
    """Squared serving radius of tier ``k``; +inf without an access threshold."""
    t = config.tiers[k]
    if config.access_threshold == 0:
        return math.inf
    return (t.omega / config.access_threshold) ** t.delta


@lru_cache(maxsize=4096)
def derive(config):
    """Per-tier cached quantities for a validated configuration."""
    from . import association

    validate(config)
    out = []
    for k, t in enumerate(config.tiers):
        T = association.assoc_prob(config, k)
        A = association.activation_prob(config, k, assoc=T)
        out.append(
            DerivedTier(
                omega=t.omega,
                delta=t.delta,
                serving_radius=serving_radius(t.omega, t.pathloss_exp, config.access_threshold),
                assoc_prob=T,
                activation_prob=A,
                active_density=A * t.density,
            )
        )
    return tuple(out)


def as_dict(config):
    """Plain-data view, used for JSON sidecars."""
    d = {f.name: getattr(config, f.name) for f in fields(config) if f.init and f.name != "tiers"}
    d["tiers"] = [{f.name: getattr(t, f.name) for f in fields(t)} for t in config.tiers]
    return d


def from_dict(d):
    tiers = tuple(TierParams(**t) for t in d["tiers"])
    rest = {k: v for k, v in d.items() if k != "tiers"}
    return NetworkConfig(tiers=tiers, **rest)
