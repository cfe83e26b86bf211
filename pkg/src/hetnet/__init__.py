"""Analysis and simulation of multi-tier, multi-antenna downlink cellular
networks with threshold-based biased association."""
__version__ = "0.1.0"

from .errors import ConfigError, NumericsError, PrecisionWarning, PreconditionError
from .model import (
    DerivedTier,
    NetworkConfig,
    TierParams,
    db_to_linear,
    dbm_to_watts,
    derive,
    linear_to_db,
    validate,
    watts_to_dbm,
)
from .association import activation_prob, assoc_prob, assoc_report, no_coverage_prob
from .outage import (
    outage_asymptotic,
    outage_bounds,
    outage_exact,
    outage_int,
    outage_overall,
    phi,
)
from .efficiency import (
    aar,
    aar_overall,
    ant,
    area_power,
    efficiency_report,
    energy_efficiency,
    f_zero,
    ft_inf,
    optimal_threshold,
)
from .configfile import dump_config, load_config, parse_config

__all__ = [
    "ConfigError",
    "DerivedTier",
    "NetworkConfig",
    "NumericsError",
    "PrecisionWarning",
    "PreconditionError",
    "TierParams",
    "aar",
    "aar_overall",
    "activation_prob",
    "ant",
    "area_power",
    "assoc_prob",
    "assoc_report",
    "db_to_linear",
    "dbm_to_watts",
    "derive",
    "dump_config",
    "efficiency_report",
    "energy_efficiency",
    "f_zero",
    "ft_inf",
    "linear_to_db",
    "load_config",
    "no_coverage_prob",
    "optimal_threshold",
    "outage_asymptotic",
    "outage_bounds",
    "outage_exact",
    "outage_int",
    "outage_overall",
    "parse_config",
    "phi",
    "validate",
    "watts_to_dbm",
]
