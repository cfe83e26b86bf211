"""Special functions, quadrature and Toeplitz algebra used by the analytics."""
from .quadrature import QuadResult, integrate
from .special import (
    hyp2f1_neg,
    hyp2f1_neg_scaled,
    lower_inc_gamma,
    lower_inc_gamma_diff_scaled,
    lower_inc_gamma_span_scaled,
    reg_lower_inc_gamma,
    upper_inc_gamma_scaled,
)
from .toeplitz import ToeplitzL, one_norm, power_columns, toeplitz_powers

__all__ = [
    "QuadResult",
    "ToeplitzL",
    "hyp2f1_neg",
    "hyp2f1_neg_scaled",
    "integrate",
    "lower_inc_gamma",
    "lower_inc_gamma_diff_scaled",
    "lower_inc_gamma_span_scaled",
    "one_norm",
    "power_columns",
    "reg_lower_inc_gamma",
    "toeplitz_powers",
    "upper_inc_gamma_scaled",
]
