"""Hot loops with a numba path and a pure-numpy path.

The numba path is used when numba imports cleanly and the environment
variable RLQ_DISABLE_NUMBA is unset (or set to 0/false/no). Both paths
return identical results; tests compare them directly.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _flag_disabled():
    raw = os.environ.get("RLQ_DISABLE_NUMBA", "").strip().lower()
    return raw not in ("", "0", "false", "no")


NUMBA_ENABLED = numba is not None and not _flag_disabled()


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------- rearrangement


def _rearrange_numpy(matrix, max_sweeps):
    x = np.array(matrix, dtype=np.float64, copy=True)
    m, n = x.shape
    if n == 1:
        return x, 0, True
    # a column is only ever permuted, so its sorted values are fixed
    descending = np.sort(x, axis=0, kind="mergesort")[::-1]
    total = x.sum(axis=1)
    best = total.min()
    for sweep in range(1, max_sweeps + 1):
        changed = False
        for j in range(n):
            rest = total - x[:, j]
            order = np.argsort(rest, kind="mergesort")
            new_col = np.empty(m)
            # largest entries go where the rest is smallest
            new_col[order] = descending[:, j]
            if not np.array_equal(new_col, x[:, j]):
                changed = True
                x[:, j] = new_col
                total = rest + new_col
        if not changed:
            return x, sweep, True
        # ties can make sweeps cycle without raising the minimal row sum
        low = total.min()
        if low <= best:
            return x, sweep, True
        best = low
    return x, max_sweeps, False


def _rearrange_loops(matrix, max_sweeps):
    m, n = matrix.shape
    # columns stored as contiguous rows
    xt = np.empty((n, m))
    for i in range(m):
        for j in range(n):
            xt[j, i] = matrix[i, j]
    if n == 1:
        return matrix.copy(), 0, True
    descending = np.empty((n, m))
    for j in range(n):
        srt = np.sort(xt[j])
        for k in range(m):
            descending[j, k] = srt[m - 1 - k]
    total = np.zeros(m)
    for j in range(n):
        for i in range(m):
            total[i] += xt[j, i]
    best = total.min()
    rest = np.empty(m)
    new_col = np.empty(m)
    for sweep in range(1, max_sweeps + 1):
        changed = False
        for j in range(n):
            col = xt[j]
            for i in range(m):
                rest[i] = total[i] - col[i]
            order = np.argsort(rest, kind="mergesort")
            for k in range(m):
                new_col[order[k]] = descending[j, k]
            same = True
            for i in range(m):
                if new_col[i] != col[i]:
                    same = False
                    break
            if not same:
                changed = True
                for i in range(m):
                    col[i] = new_col[i]
                    total[i] = rest[i] + new_col[i]
        if not changed:
            return xt.T.copy(), sweep, True
        low = total.min()
        if low <= best:
            return xt.T.copy(), sweep, True
        best = low
    return xt.T.copy(), max_sweeps, False


_rearrange_numba = _njit(_rearrange_loops)


def rearrange(matrix, max_sweeps=1000, use_numba=None):
    """Make every column oppositely ordered to the sum of the others.

    Returns (rearranged matrix, sweeps used, converged flag). Converged means
    a full sweep left the matrix unchanged.
    """
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    use = NUMBA_ENABLED if use_numba is None else use_numba
    if use and numba is not None:
        x, sweeps, ok = _rearrange_numba(matrix, int(max_sweeps))
        return x, int(sweeps), bool(ok)
    return _rearrange_numpy(matrix, int(max_sweeps))


# ---------------------------------------------------------------- level crossings


def _crossings_numpy(values, level):
    """Indices of first value >= level, first > level, last < level, last <= level."""
    v = np.asarray(values)
    ge = np.flatnonzero(v >= level)
    gt = np.flatnonzero(v > level)
    lt = np.flatnonzero(v < level)
    le = np.flatnonzero(v <= level)
    return (
        int(ge[0]) if ge.size else -1,
        int(gt[0]) if gt.size else -1,
        int(lt[-1]) if lt.size else -1,
        int(le[-1]) if le.size else -1,
    )


def _crossings_loops(values, level):
    n = values.shape[0]
    first_ge = -1
    first_gt = -1
    last_lt = -1
    last_le = -1
    for i in range(n):
        v = values[i]
        if first_ge < 0 and v >= level:
            first_ge = i
        if first_gt < 0 and v > level:
            first_gt = i
        if v < level:
            last_lt = i
        if v <= level:
            last_le = i
    return first_ge, first_gt, last_lt, last_le


_crossings_numba = _njit(_crossings_loops)


def level_crossings(values, level, use_numba=None):
    """Crossing indices of a sampled curve against one level (-1 when absent)."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    use = NUMBA_ENABLED if use_numba is None else use_numba
    if use and numba is not None:
        return tuple(int(i) for i in _crossings_numba(values, float(level)))
    return _crossings_numpy(values, float(level))


# ---------------------------------------------------------------- discrete cdf


def _step_cdf_numpy(points, cumulative, x):
    idx = np.searchsorted(points, x, side="right")
    padded = np.concatenate(([0.0], cumulative))
    return padded[idx]


def _step_cdf_loops(points, cumulative, x):
    out = np.empty(x.shape[0])
    n = points.shape[0]
    for k in range(x.shape[0]):
        lo = 0
        hi = n
        xv = x[k]
        while lo < hi:
            mid = (lo + hi) // 2
            if points[mid] <= xv:
                lo = mid + 1
            else:
                hi = mid
        out[k] = 0.0 if lo == 0 else cumulative[lo - 1]
    return out


_step_cdf_numba = _njit(_step_cdf_loops)


def step_cdf(points, cumulative, x, use_numba=None):
    """Right-continuous step cdf: cumulative[k] is the mass at or below points[k]."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    cumulative = np.ascontiguousarray(cumulative, dtype=np.float64)
    flat = np.ascontiguousarray(np.ravel(x), dtype=np.float64)
    use = NUMBA_ENABLED if use_numba is None else use_numba
    if use and numba is not None:
        out = _step_cdf_numba(points, cumulative, flat)
    else:
        out = _step_cdf_numpy(points, cumulative, flat)
    return out.reshape(np.shape(x))
