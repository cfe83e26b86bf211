"""Numba switch.

Hot kernels are written once in a numba-compilable subset and decorated with
:func:`maybe_njit`.  Setting ``HETNET_NUMBA=0`` in the environment (before
import) makes the decorator a no-op and routes callers to the pure-numpy
twins instead of running the loop kernels under the interpreter.
"""
import os

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("HETNET_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "no",
    "off",
)


def maybe_njit(*args, **kwargs):
    """``numba.njit`` when enabled, identity otherwise."""
    if USE_NUMBA:
        return numba.njit(*args, cache=True, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def backend():
    return "numba" if USE_NUMBA else "numpy"
