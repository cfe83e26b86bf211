"""Gauss hypergeometric function at negative argument and incomplete gammas.

Only real arguments.  ``hyp2f1_neg`` always goes through the Pfaff
transformation so the power series is evaluated at ``z = tau/(1+tau)`` in
[0, 1), where it converges for every admissible parameter set.
"""
import math

import numpy as np

from .._accel import USE_NUMBA, maybe_njit
from ..errors import NumericsError

_EPS = 1e-17
HYP_MAX_ITER = 20_000_000
_GAMMA_MAX_ITER = 100_000
_TINY = 1e-300
_CF_TOL = 4.5e-16  # two ulps of 1.0; a tighter test can stall on 1 + ulp


@maybe_njit
def _hyp2f1_series_loop(a, b, c, z, max_iter):
    # Neumaier-compensated running sum; long series near z -> 1 need it
    total = 1.0
    comp = 0.0
    term = 1.0
    k = 0
    while k < max_iter:
        r = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        term *= r
        t = total + term
        if abs(total) >= abs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t
        k += 1
        if term == 0.0:
            return total + comp, k, True
        ar = abs(r)
        if ar < 1.0 and abs(term) * ar / (1.0 - ar) <= _EPS * abs(total):
            return total + comp, k, True
    return total + comp, k, False


def _hyp2f1_series_numpy(a, b, c, z, max_iter, chunk=4096):
    sums = [1.0]
    approx = 1.0
    term = 1.0
    k0 = 0
    while k0 < max_iter:
        k = np.arange(k0, k0 + chunk, dtype=float)
        r = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        terms = term * np.cumprod(r)
        ar = np.abs(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.abs(terms) * ar / (1.0 - ar)
        partial = approx + np.cumsum(terms)
        done = (terms == 0.0) | ((ar < 1.0) & (tail <= _EPS * np.abs(partial)))
        hit = np.flatnonzero(done)
        if hit.size:
            i = hit[0]
            sums.append(math.fsum(terms[: i + 1]))
            return math.fsum(sums), k0 + i + 1, True
        sums.append(math.fsum(terms))
        approx = float(partial[-1])
        term = float(terms[-1])
        k0 += chunk
    return math.fsum(sums), k0, False


def _hyp2f1_series(a, b, c, z, max_iter=HYP_MAX_ITER):
    if USE_NUMBA:
        return _hyp2f1_series_loop(float(a), float(b), float(c), float(z), max_iter)
    return _hyp2f1_series_numpy(float(a), float(b), float(c), float(z), max_iter)


def _rgamma(x):
    """1/Gamma(x), zero at the poles."""
    if x <= 0 and x == math.floor(x):
        return 0.0
    return 1.0 / math.gamma(x)


def _is_nonpos_int(x):
    return x <= 0 and x == math.floor(x)


def _hyp2f1_walk(a, b, c, w):
    """2F1(a, b; c; 1 - w) for 0 < w < 0.1 by analytic continuation.

    Starts from the power series at z = 0.9 and re-expands the solution of
    the hypergeometric equation in Taylor series, each step covering half
    the remaining distance to the singular point z = 1.  Positions are
    carried as distances to 1, so tiny ``w`` loses nothing.  Works whether
    or not c - a - b is an integer.
    """
    s = 0.1
    f, n0, ok0 = _hyp2f1_series(a, b, c, 0.9)
    d, n1, ok1 = _hyp2f1_series(a + 1.0, b + 1.0, c + 1.0, 0.9)
    df = a * b / c * d
    count = n0 + n1
    ok = ok0 and ok1
    ab1 = a + b + 1.0
    while s > w:
        h = min(0.5 * s, s - w)
        p0 = (1.0 - s) * s
        p1 = 2.0 * s - 1.0
        q0 = c - ab1 + ab1 * s
        # g_n = f_n h^n for the Taylor coefficients f_n about z = 1 - s
        g_prev, g = f, df * h
        val = [g_prev, g]
        der = [g]
        n = 0
        while True:
            g_next = (-(p1 * n + q0) * (n + 1) * g * h + (n + a) * (n + b) * g_prev * h * h) / (
                p0 * (n + 2) * (n + 1)
            )
            n += 1
            val.append(g_next)
            der.append((n + 1) * g_next)
            g_prev, g = g, g_next
            tot = abs(val[0]) + abs(val[1])
            if abs(g) + abs(g_prev) <= _EPS * max(abs(math.fsum(val)), 1e-300) or n > 2000:
                ok = ok and n <= 2000
                break
            if not math.isfinite(tot + g):
                return math.nan, count + n, False
        count += n
        f = math.fsum(val)
        df = math.fsum(der) / h
        s -= h
    return f, count, ok and math.isfinite(f)


def _hyp2f1_unit(a, b, c, z, w):
    """2F1(a, b; c; z) for z in [0, 1), with w = 1 - z supplied exactly."""
    if z <= 0.9 or _is_nonpos_int(a) or _is_nonpos_int(b):
        return _hyp2f1_series(a, b, c, z)
    s = c - a - b
    if abs(s - round(s)) > 1e-3:
        # connection to 1 - z; both series converge geometrically in w
        f1, n1, ok1 = _hyp2f1_series(a, b, a + b - c + 1.0, w)
        f2, n2, ok2 = _hyp2f1_series(c - a, c - b, s + 1.0, w)
        gc = math.gamma(c)
        t1 = gc * math.gamma(s) * _rgamma(c - a) * _rgamma(c - b) * f1
        t2 = gc * math.gamma(-s) * _rgamma(a) * _rgamma(b) * f2 * w**s
        return t1 + t2, n1 + n2, ok1 and ok2
    # the connection coefficients blow up near integer c - a - b
    return _hyp2f1_walk(a, b, c, w)


def _check_hyp_args(c, tau):
    if not tau >= 0:
        raise ValueError(f"tau must be >= 0, got {tau!r}")
    if _is_nonpos_int(c):
        raise ValueError(f"c must not be a non-positive integer, got {c!r}")
    if math.isinf(tau):
        raise ValueError("tau must be finite")


def _pfaff_series(a, b, c, tau):
    z = tau / (1.0 + tau)
    s, n, ok = _hyp2f1_unit(a, c - b, c, z, 1.0 / (1.0 + tau))
    if not ok:
        raise NumericsError(
            f"2F1 series did not converge after {n} terms for "
            f"(a={a!r}, b={b!r}, c={c!r}, tau={tau!r})"
        )
    return s, z


def hyp2f1_neg(a, b, c, tau):
    """2F1(a, b; c; -tau) for tau >= 0.

    Uses 2F1(a,b;c;-t) = (1+t)^-a 2F1(a, c-b; c; t/(1+t)); when t/(1+t) is
    close to 1 the transformed function is continued to 1 - z.

    >>> round(hyp2f1_neg(1.0, 0.5, 1.5, 1.0), 12) == round(math.pi / 4, 12)
    True
    """
    _check_hyp_args(c, tau)
    if tau == 0:
        return 1.0
    s, _ = _pfaff_series(a, b, c, tau)
    return (1.0 + tau) ** (-a) * s


def hyp2f1_neg_scaled(a, b, c, tau, p):
    """tau**p * 2F1(a, b; c; -tau), without forming tau**p on its own.

    Stays finite for huge ``tau`` when the product does, e.g. p = a - 1.
    """
    _check_hyp_args(c, tau)
    if tau == 0:
        return 0.0 if p > 0 else (1.0 if p == 0 else math.inf)
    s, z = _pfaff_series(a, b, c, tau)
    return z**p * (1.0 + tau) ** (p - a) * s


def _lower_series(s, x):
    """sum_{n>=0} x^n / (s (s+1) ... (s+n)); gamma(s,x) = e^-x x^s * this."""
    ap = s
    term = 1.0 / s
    total = term
    for _ in range(_GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-17:
            return total
    raise NumericsError(f"incomplete gamma series did not converge for (s={s!r}, x={x!r})")


def _upper_cf(s, x):
    """Modified Lentz continued fraction F with Gamma(s,x) = e^-x x^s F."""
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= _CF_TOL:
            return h
    raise NumericsError(f"incomplete gamma continued fraction failed for (s={s!r}, x={x!r})")


def _check_gamma_args(s, x):
    if not s > 0:
        raise ValueError(f"s must be > 0, got {s!r}")
    if not x >= 0:
        raise ValueError(f"x must be >= 0, got {x!r}")


def lower_inc_gamma(s, x):
    """Lower incomplete gamma gamma(s, x) = int_0^x t^(s-1) e^-t dt."""
    _check_gamma_args(s, x)
    if x == 0:
        return 0.0
    if math.isinf(x):
        return math.gamma(s)
    if x < s + 1.0:
        return _lower_series(s, x) * math.exp(-x + s * math.log(x))
    return math.gamma(s) - math.exp(-x + s * math.log(x)) * _upper_cf(s, x)


def reg_lower_inc_gamma(s, x):
    """Regularized P(s, x) = gamma(s, x) / Gamma(s), accurate for tiny x."""
    _check_gamma_args(s, x)
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    log_pref = -x + s * math.log(x) - math.lgamma(s)
    if x < s + 1.0:
        return _lower_series(s, x) * math.exp(log_pref)
    return 1.0 - math.exp(log_pref) * _upper_cf(s, x)


def upper_inc_gamma_scaled(s, x):
    """e^x * Gamma(s, x); finite for large x where both factors over/underflow."""
    _check_gamma_args(s, x)
    if math.isinf(x):
        return 0.0
    if x < s + 1.0:
        return math.exp(x) * (math.gamma(s) - lower_inc_gamma(s, x))
    return math.exp(s * math.log(x)) * _upper_cf(s, x)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(30)


def _narrow_gamma_diff_scaled(s, x1, h):
    """int_0^h (x1 + v)^(s-1) e^-v dv by fixed Gauss-Legendre.

    Accurate to roundoff when h <= x1 / 10: the only singularity, v = -x1,
    is then far outside the interval.
    """
    v = 0.5 * h * (_GL_NODES + 1.0)
    f = np.exp((s - 1.0) * np.log(x1 + v) - v)
    return 0.5 * h * math.fsum(_GL_WEIGHTS * f)


def lower_inc_gamma_diff_scaled(s, x1, x2):
    """e^x1 * (gamma(s, x2) - gamma(s, x1)) for 0 <= x1 <= x2 <= inf."""
    if x2 < x1:
        raise ValueError("need x1 <= x2")
    return lower_inc_gamma_span_scaled(s, x1, x2 - x1)


def lower_inc_gamma_span_scaled(s, x1, h):
    """e^x1 * (gamma(s, x1 + h) - gamma(s, x1)) with the width ``h`` given directly.

    Callers that know ``h`` in closed form avoid the rounding of x2 - x1.
    """
    _check_gamma_args(s, x1)
    if not h >= 0:
        raise ValueError(f"h must be >= 0, got {h!r}")
    if h == 0:
        return 0.0
    x2 = x1 + h
    if h <= 0.1 * x1 and h <= 10.0:
        # a difference of two nearly equal values would cancel
        return _narrow_gamma_diff_scaled(s, x1, h)
    if x1 < s + 1.0:
        if math.isinf(x2):
            return upper_inc_gamma_scaled(s, x1)
        return math.exp(x1) * (lower_inc_gamma(s, x2) - lower_inc_gamma(s, x1))
    tail = 0.0 if math.isinf(x2) else math.exp(-h) * upper_inc_gamma_scaled(s, x2)
    return upper_inc_gamma_scaled(s, x1) - tail
