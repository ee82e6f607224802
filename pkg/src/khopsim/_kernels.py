"""Hot numeric kernels.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy
version. The active pair is chosen once at import time. Set
``KHOPSIM_DISABLE_NUMBA=1`` to force the numpy path (or it is used
automatically when numba cannot be imported). Both paths must return
identical arrays; ``tests/test_kernels.py`` checks this.
"""
import os

import numpy as np

# Saturating "no path" marker. Twice this still fits in int32, so a
# relaxation sum never overflows.
INFINITY = np.iinfo(np.int32).max // 2

_DISABLE = os.environ.get("KHOPSIM_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    from numba import njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False


def _init_dist(adj):
    n = adj.shape[0]
    dist = np.full((n, n), INFINITY, dtype=np.int32)
    dist[adj] = 1
    np.fill_diagonal(dist, 0)
    return dist


# -- numpy path ---------------------------------------------------------------

def floyd_warshall_numpy(adj):
    """All-pairs hop distances by Floyd-Warshall, one vectorized row-column
    relaxation per pivot."""
    adj = np.asarray(adj, dtype=bool)
    dist = _init_dist(adj)
    for m in range(dist.shape[0]):
        np.minimum(dist, dist[:, m, None] + dist[None, m, :], out=dist)
    return dist


def reach_equal_numpy(dist, k, reach):
    return bool(np.array_equal(dist <= k, reach))


# -- numba path ---------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def _fw_inplace(dist):
        n = dist.shape[0]
        inf = np.int32(INFINITY)
        for m in range(n):
            row_m = dist[m]
            for i in range(n):
                dim = dist[i, m]
                if dim >= inf:
                    continue
                row_i = dist[i]
                for j in range(n):
                    cand = dim + row_m[j]
                    if cand < row_i[j]:
                        row_i[j] = cand
        return dist

    @njit(cache=True)
    def _reach_equal(dist, k, reach):
        n = dist.shape[0]
        for i in range(n):
            for j in range(n):
                if (dist[i, j] <= k) != reach[i, j]:
                    return False
        return True

    def floyd_warshall_numba(adj):
        """All-pairs hop distances by the classic triple loop, compiled."""
        adj = np.asarray(adj, dtype=bool)
        return _fw_inplace(_init_dist(adj))

    def reach_equal_numba(dist, k, reach):
        return bool(_reach_equal(dist, np.int32(k), np.ascontiguousarray(reach, dtype=np.bool_)))

else:  # pragma: no cover
    floyd_warshall_numba = floyd_warshall_numpy
    reach_equal_numba = reach_equal_numpy


USE_NUMBA = HAS_NUMBA and not _DISABLE
BACKEND = "numba" if USE_NUMBA else "numpy"

if USE_NUMBA:
    floyd_warshall = floyd_warshall_numba
    reach_equal = reach_equal_numba
else:
    floyd_warshall = floyd_warshall_numpy
    reach_equal = reach_equal_numpy
