"""Deterministic adaptive quadrature on finite and semi-infinite intervals.

Thin wrapper over QUADPACK (``scipy.integrate.quad``): the wrapper owns the
semi-infinite change of variables, the tolerance defaults and the failure
reporting, so every caller sees the same contract.
"""
import math
import warnings

import numpy as np
from scipy import integrate as _si

from ..errors import NumericsError

REL_TOL_FINITE = 1e-9
REL_TOL_INFINITE = 1e-7
SUBDIVISION_LIMIT = 500


class QuadResult(float):
    """A float carrying the error estimate of the quadrature that produced it."""

    def __new__(cls, value, error):
        obj = super().__new__(cls, value)
        obj.error = error
        return obj


def _worst_interval(info, mapping):
    try:
        last = int(info["last"])
        alist, blist, elist = info["alist"][:last], info["blist"][:last], info["elist"][:last]
        i = int(np.argmax(elist))
        return mapping(alist[i]), mapping(blist[i]), float(elist[i])
    except (KeyError, IndexError, ValueError):
        return None


def _quad(f, a, b, rel_tol, abs_tol, mapping):
    with warnings.catch_warnings():
        warnings.simplefilter("error", _si.IntegrationWarning)
        try:
            val, err, info = _si.quad(
                f, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=SUBDIVISION_LIMIT, full_output=1
            )[:3]
        except _si.IntegrationWarning as w:
            val, err, info = _si.quad(
                f, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=SUBDIVISION_LIMIT, full_output=1
            )[:3]
            worst = _worst_interval(info, mapping)
            if err <= max(abs_tol, 10.0 * rel_tol * abs(val)):
                # QUADPACK flags roundoff even when the estimate meets the target
                return QuadResult(val, err)
            raise NumericsError(
                f"quadrature failed on [{mapping(a)!r}, {mapping(b)!r}]: {w}; "
                f"value={val!r}, error={err!r}, worst subinterval={worst}"
            ) from None
    if not math.isfinite(val):
        raise NumericsError(f"quadrature produced non-finite value on [{mapping(a)}, {mapping(b)}]")
    return QuadResult(val, err)


def integrate(f, lo, hi, rel_tol=None, *, scale=None, abs_tol=0.0):
    """Integrate scalar ``f`` over [lo, hi]; ``hi`` may be ``math.inf``.

    For an infinite upper limit, or when ``scale`` is given, the integral is
    taken in ``t`` with ``x = lo + scale * t / (1 - t)``.  ``scale`` should be
    the length over which ``f`` decays; it keeps the adaptive rule from
    sampling only the flat tail of a very long interval.

    Returns a float subclass with the error estimate in ``.error``.
    """
    if hi < lo:
        raise ValueError("hi must be >= lo")
    if hi == lo:
        return QuadResult(0.0, 0.0)
    infinite = math.isinf(hi)
    if rel_tol is None:
        rel_tol = REL_TOL_INFINITE if infinite else REL_TOL_FINITE
    if not infinite and scale is None:
        return _quad(f, lo, hi, rel_tol, abs_tol, lambda x: x)

    s = 1.0 if scale is None else float(scale)
    if not s > 0:
        raise ValueError("scale must be positive")
    t_hi = 1.0 if infinite else (hi - lo) / (s + hi - lo)

    def g(t):
        if t >= 1.0:
            return 0.0
        u = 1.0 - t
        return f(lo + s * t / u) * s / (u * u)

    def back(t):
        return math.inf if t >= 1.0 else lo + s * t / (1.0 - t)

    return _quad(g, 0.0, t_hi, rel_tol, abs_tol, back)
