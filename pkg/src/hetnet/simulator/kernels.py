"""Nearest-site search, the inner loop of every Monte Carlo trial.

Three implementations with identical arithmetic (``dx*dx + dy*dy``, lowest
index wins ties): a compiled cell-grid search, a compiled brute-force loop
and a chunked numpy broadcast.  Which one
:func:`nearest_sites` dispatches to follows ``HETNET_NUMBA``.
"""
import numpy as np

from .._accel import USE_NUMBA, maybe_njit

_CHUNK = 512


@maybe_njit
def nearest_sites_loop(ux, uy, sx, sy):
    n = ux.shape[0]
    m = sx.shape[0]
    idx = np.full(n, -1, dtype=np.int64)
    d2 = np.full(n, np.inf)
    for i in range(n):
        best = np.inf
        arg = -1
        x = ux[i]
        y = uy[i]
        for j in range(m):
            dx = x - sx[j]
            dy = y - sy[j]
            v = dx * dx + dy * dy
            if v < best:
                best = v
                arg = j
        idx[i] = arg
        d2[i] = best
    return idx, d2


@maybe_njit
def nearest_sites_grid(ux, uy, sx, sy):
    """Bucket the sites into square cells and search rings of cells outward.

    After ring ``r`` every unvisited site is at least ``r * h`` away, so the
    search stops once the best squared distance is below ``(r h)^2``.
    """
    n = ux.shape[0]
    m = sx.shape[0]
    idx = np.full(n, -1, dtype=np.int64)
    d2 = np.full(n, np.inf)
    if m == 0 or n == 0:
        return idx, d2
    x0 = min(ux.min(), sx.min())
    y0 = min(uy.min(), sy.min())
    x1 = max(ux.max(), sx.max())
    y1 = max(uy.max(), sy.max())
    span = max(x1 - x0, y1 - y0, 1e-12)
    nc = max(1, int(np.sqrt(m / 2.0)))
    h = span / nc * (1.0 + 1e-12)
    ncell = nc * nc
    cell = np.empty(m, dtype=np.int64)
    count = np.zeros(ncell + 1, dtype=np.int64)
    for j in range(m):
        cx = min(int((sx[j] - x0) / h), nc - 1)
        cy = min(int((sy[j] - y0) / h), nc - 1)
        c = cy * nc + cx
        cell[j] = c
        count[c + 1] += 1
    start = np.cumsum(count)
    fill = start[:-1].copy()
    order = np.empty(m, dtype=np.int64)
    for j in range(m):
        c = cell[j]
        order[fill[c]] = j
        fill[c] += 1
    for i in range(n):
        x = ux[i]
        y = uy[i]
        qx = min(int((x - x0) / h), nc - 1)
        qy = min(int((y - y0) / h), nc - 1)
        best = np.inf
        arg = -1
        ring = 0
        while True:
            for cy in range(qy - ring, qy + ring + 1):
                if cy < 0 or cy >= nc:
                    continue
                edge = cy == qy - ring or cy == qy + ring
                step = 1 if edge else 2 * ring
                cx = qx - ring
                while cx <= qx + ring:
                    if 0 <= cx < nc:
                        c = cy * nc + cx
                        for t in range(start[c], start[c + 1]):
                            j = order[t]
                            dx = x - sx[j]
                            dy = y - sy[j]
                            v = dx * dx + dy * dy
                            if v < best or (v == best and j < arg):
                                best = v
                                arg = j
                    if step == 0:
                        break
                    cx += step
            lim = ring * h
            if best < lim * lim or ring > nc:
                break
            ring += 1
        idx[i] = arg
        d2[i] = best
    return idx, d2


def nearest_sites_numpy(ux, uy, sx, sy, chunk=_CHUNK):
    n = ux.shape[0]
    idx = np.full(n, -1, dtype=np.int64)
    d2 = np.full(n, np.inf)
    if sx.shape[0] == 0:
        return idx, d2
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        dx = ux[lo:hi, None] - sx[None, :]
        dy = uy[lo:hi, None] - sy[None, :]
        v = dx * dx + dy * dy
        a = np.argmin(v, axis=1)
        idx[lo:hi] = a
        d2[lo:hi] = v[np.arange(hi - lo), a]
    return idx, d2


def nearest_sites(ux, uy, sx, sy):
    """Index of and squared distance to the nearest site, per query point.

    Empty site sets give index -1 and distance +inf.
    """
    ux = np.ascontiguousarray(ux, dtype=np.float64)
    uy = np.ascontiguousarray(uy, dtype=np.float64)
    sx = np.ascontiguousarray(sx, dtype=np.float64)
    sy = np.ascontiguousarray(sy, dtype=np.float64)
    if USE_NUMBA:
        return nearest_sites_grid(ux, uy, sx, sy)
    return nearest_sites_numpy(ux, uy, sx, sy)
