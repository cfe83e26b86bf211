"""Strictly lower-triangular Toeplitz matrices stored by their first column.

Products of two such matrices are again lower-triangular Toeplitz, and the
first column of the product is the truncated convolution of the two first
columns, so powers cost O(M^2) each.  Power 0 is the identity, which is
lower-triangular Toeplitz but not strictly so; the class stores the full
first column ``col`` with ``col[0]`` the diagonal.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ToeplitzL:
    """Lower-triangular Toeplitz matrix, entry (p, q) = col[p - q] for p >= q."""

    col: np.ndarray

    @classmethod
    def strict(cls, sub_diagonals):
        """Build from c_1..c_{M-1}; the diagonal is zero."""
        c = np.asarray(sub_diagonals, dtype=float)
        return cls(np.concatenate(([0.0], c)))

    @classmethod
    def identity(cls, dim):
        col = np.zeros(dim)
        col[0] = 1.0
        return cls(col)

    @property
    def dim(self):
        return self.col.shape[0]

    def __matmul__(self, other):
        return ToeplitzL(_conv_trunc(self.col, other.col))

    def entry(self, p, q):
        """Entry at 1-based (p, q)."""
        return float(self.col[p - q]) if p >= q else 0.0

    def dense(self):
        m = self.dim
        out = np.zeros((m, m))
        for d in range(m):
            idx = np.arange(d, m)
            out[idx, idx - d] = self.col[d]
        return out


def _conv_trunc(a, b):
    m = a.shape[0]
    return np.convolve(a, b)[:m]


def toeplitz_powers(t, max_power):
    """Powers t^0 .. t^max_power, each again a :class:`ToeplitzL`."""
    if not 0 <= max_power <= t.dim:
        raise ValueError(f"max_power must be in [0, {t.dim}], got {max_power}")
    out = [ToeplitzL.identity(t.dim)]
    for _ in range(max_power):
        out.append(out[-1] @ t)
    return out


def one_norm(t):
    """Maximum absolute column sum.

    Column q holds col[0 .. M-q], a prefix of the first column, so the first
    column always attains the maximum.
    """
    return float(np.sum(np.abs(t.col)))


def power_columns(sub_diagonals):
    """First columns of all powers 0..M-1 as a (M, M) array, row i = power i.

    ``sub_diagonals`` may be (M-1,) or (M-1, n) for a batch of n matrices;
    the batched result has shape (M, M, n).
    """
    c = np.asarray(sub_diagonals, dtype=float)
    m = c.shape[0] + 1
    batch = c.shape[1:]
    base = np.zeros((m,) + batch)
    base[1:] = c
    out = np.zeros((m, m) + batch)
    out[0, 0] = 1.0
    for i in range(1, m):
        prev = out[i - 1]
        cur = np.zeros_like(prev)
        # cur[p] = sum_{d=1..p} base[d] * prev[p-d]
        for d in range(1, m):
            cur[d:] += base[d] * prev[: m - d]
        out[i] = cur
    return out
