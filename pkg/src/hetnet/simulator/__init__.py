"""Monte Carlo oracle for the analytic association and outage results."""
from .campaign import (
    ACTIVATION_MODES,
    CampaignReport,
    Estimate,
    NetRealization,
    TrialResult,
    default_radius,
    interference_tail,
    measure_sinr,
    run_campaign,
    run_trial,
    sample_realization,
    TrialStreams,
    radial_ppp,
    trial_streams,
)
from .kernels import nearest_sites

__all__ = [
    "ACTIVATION_MODES",
    "CampaignReport",
    "Estimate",
    "NetRealization",
    "TrialResult",
    "default_radius",
    "interference_tail",
    "measure_sinr",
    "nearest_sites",
    "run_campaign",
    "run_trial",
    "sample_realization",
    "TrialStreams",
    "radial_ppp",
    "trial_streams",
]
