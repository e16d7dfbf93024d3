"""Nondecreasing curves on the real line and their generalized inverses.

Every curve answers four questions exactly as far as its representation
allows: its value, its left limit, the left inverse inf{x : f(x) >= level}
and the right inverse inf{x : f(x) > level}. The comparators ``reaches``
and ``exceeds`` decide f(x) >= level and f(x) > level; backends with an
exact description of their level sets override them so that boundary ties
never depend on floating point evaluation.

Conventions: inf of the empty set is +inf, sup of the empty set is -inf.
"""

import math

import numpy as np
from scipy import optimize

from rlq.errors import InvalidInputError, NumericalFailure

INF = math.inf
_SEARCH_LIMIT = 1e15


def _scalar_or_array(x, out):
    if np.ndim(x) == 0:
        return float(np.asarray(out).reshape(()))
    return out


class MonotoneCurve:
    """Base class for nondecreasing real functions.

    Subclasses implement ``eval``; the generic inverses fall back on
    bracketed bisection of ``eval`` and are only as good as ``eval``.
    """

    def eval(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.eval(x)

    def left_limit(self, x):
        return self.eval(x)

    @property
    def window(self):
        """A finite interval holding the bulk of the variation of the curve."""
        return (-10.0, 10.0)

    def reaches(self, x, level):
        return bool(self.eval(float(x)) >= level)

    def exceeds(self, x, level):
        return bool(self.eval(float(x)) > level)

    def left_inverse(self, level):
        return _bisect_threshold(lambda x: self.reaches(x, level), self.window)

    def right_inverse(self, level):
        return _bisect_threshold(lambda x: self.exceeds(x, level), self.window)

    def generalized_inverse(self, level, side="left"):
        if side == "left":
            return self.left_inverse(level)
        if side == "right":
            return self.right_inverse(level)
        raise InvalidInputError(f"side must be 'left' or 'right', got {side!r}")

    def shifted(self, shift):
        return ShiftedCurve(self, shift)


def _bisect_threshold(pred, window, tol=1e-13):
    """inf{x : pred(x)} for a predicate that is monotone in x (False then True)."""
    lo, hi = float(window[0]), float(window[1])
    width = max(hi - lo, 1.0)
    while pred(lo):
        if lo < -_SEARCH_LIMIT:
            return -INF
        hi = lo
        lo -= width
        width *= 2.0
    while not pred(hi):
        if hi > _SEARCH_LIMIT:
            return INF
        lo = hi
        hi += width
        width *= 2.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= tol * max(1.0, abs(hi)):
            break
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def evaluate(curve, x):
    """Value of a curve at x (scalar or array)."""
    return curve.eval(x)


def generalized_inverse(curve, level, side="left"):
    """inf{x : f(x) >= level} for side='left', inf{x : f(x) > level} for side='right'."""
    return curve.generalized_inverse(level, side)


class FunctionCurve(MonotoneCurve):
    """Wraps a plain nondecreasing callable; inverses by bisection."""

    def __init__(self, fn, window=(-10.0, 10.0), left_limit_fn=None):
        self._fn = fn
        self._window = (float(window[0]), float(window[1]))
        self._left_limit_fn = left_limit_fn

    def eval(self, x):
        if np.ndim(x) == 0:
            return float(self._fn(float(x)))
        return np.array([self._fn(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))

    def left_limit(self, x):
        if self._left_limit_fn is None:
            return self.eval(x)
        return self._left_limit_fn(x)

    @property
    def window(self):
        return self._window


class StepCurve(MonotoneCurve):
    """Right-continuous nondecreasing step function.

    ``levels[0]`` applies on (-inf, breaks[0]) and ``levels[k]`` on
    [breaks[k-1], breaks[k]).
    """

    def __init__(self, breaks, levels):
        b = np.asarray(breaks, dtype=float)
        v = np.asarray(levels, dtype=float)
        if v.size != b.size + 1:
            raise InvalidInputError("a step curve needs one more level than breakpoints")
        if b.size and (np.any(np.diff(b) <= 0) or not np.all(np.isfinite(b))):
            raise InvalidInputError("breakpoints must be finite and strictly increasing")
        if np.any(np.diff(v) < 0):
            raise InvalidInputError("levels of a step curve must be nondecreasing")
        self.breaks = b
        self.levels = v

    def eval(self, x):
        idx = np.searchsorted(self.breaks, x, side="right")
        return _scalar_or_array(x, self.levels[idx])

    def left_limit(self, x):
        idx = np.searchsorted(self.breaks, x, side="left")
        return _scalar_or_array(x, self.levels[idx])

    @property
    def window(self):
        if self.breaks.size == 0:
            return (-1.0, 1.0)
        return (float(self.breaks[0]) - 1.0, float(self.breaks[-1]) + 1.0)

    def _first_break(self, mask):
        hits = np.flatnonzero(mask)
        if hits.size == 0:
            return INF
        k = hits[0]
        return -INF if k == 0 else float(self.breaks[k - 1])

    def left_inverse(self, level):
        return self._first_break(self.levels >= level)

    def right_inverse(self, level):
        return self._first_break(self.levels > level)

    def reaches(self, x, level):
        return bool(self.eval(float(x)) >= level)

    def exceeds(self, x, level):
        return bool(self.eval(float(x)) > level)


class GridCurve(MonotoneCurve):
    """Linear interpolation of nondecreasing samples, constant beyond the grid."""

    def __init__(self, xs, values):
        xs = np.asarray(xs, dtype=float)
        fs = np.asarray(values, dtype=float)
        if xs.shape != fs.shape or xs.size < 2:
            raise InvalidInputError("grid curve needs at least two matching samples")
        if np.any(np.diff(xs) <= 0):
            raise InvalidInputError("grid abscissae must be strictly increasing")
        if np.any(np.diff(fs) < 0):
            raise InvalidInputError("grid values must be nondecreasing")
        self.xs = xs
        self.fs = fs

    def eval(self, x):
        return _scalar_or_array(x, np.interp(x, self.xs, self.fs))

    @property
    def window(self):
        return (float(self.xs[0]), float(self.xs[-1]))

    def _cross(self, level, strict):
        fs, xs = self.fs, self.xs
        if (fs[0] > level) if strict else (fs[0] >= level):
            return -INF
        hits = np.flatnonzero(fs > level if strict else fs >= level)
        if hits.size == 0:
            return INF
        j = hits[0]
        f0, f1 = fs[j - 1], fs[j]
        x0, x1 = xs[j - 1], xs[j]
        return float(x0 + (level - f0) / (f1 - f0) * (x1 - x0))

    def left_inverse(self, level):
        return self._cross(level, strict=False)

    def right_inverse(self, level):
        return self._cross(level, strict=True)


class InverseOfIncreasing(MonotoneCurve):
    """Curve defined as the inverse of a strictly increasing level function.

    ``level_fn`` maps (0, 1) continuously and strictly increasingly onto
    (lower, upper). The curve is 0 up to ``lower``, equals the inverse of
    ``level_fn`` in between and is 1 from ``upper`` on. Both inverses at a
    level inside (0, 1) are ``level_fn(level)`` itself, so boundary
    comparisons are exact.
    """

    def __init__(self, level_fn, lower=-INF, upper=INF, eval_fn=None, window=None):
        self.level_fn = level_fn
        self.lower = float(lower)
        self.upper = float(upper)
        self._eval_fn = eval_fn
        self._window = window

    @property
    def window(self):
        if self._window is not None:
            return self._window
        return (float(self.level_fn(1e-4)), float(self.level_fn(1 - 1e-4)))

    def _solve(self, x):
        if x <= self.lower:
            return 0.0
        if x >= self.upper:
            return 1.0
        if self._eval_fn is not None:
            return float(min(1.0, max(0.0, self._eval_fn(x))))
        lo, hi = 1e-300, 1.0 - 1e-16
        if self.level_fn(lo) >= x:
            return 0.0
        if self.level_fn(hi) <= x:
            return 1.0
        try:
            return optimize.brentq(lambda a: self.level_fn(a) - x, lo, hi, xtol=1e-300, rtol=1e-15)
        except (ValueError, RuntimeError) as exc:
            raise NumericalFailure(f"could not invert level function at x={x}") from exc

    def eval(self, x):
        if np.ndim(x) == 0:
            return self._solve(float(x))
        flat = [self._solve(float(v)) for v in np.ravel(x)]
        return np.array(flat).reshape(np.shape(x))

    def left_inverse(self, level):
        if level <= 0:
            return -INF
        if level > 1:
            return INF
        if level == 1:
            return self.upper
        return float(self.level_fn(level))

    def right_inverse(self, level):
        if level < 0:
            return -INF
        if level >= 1:
            return INF
        if level == 0:
            return self.lower
        return float(self.level_fn(level))

    def reaches(self, x, level):
        if level <= 0:
            return True
        if level > 1:
            return False
        if level == 1:
            return x >= self.upper
        return x >= self.level_fn(level)

    def exceeds(self, x, level):
        if level < 0:
            return True
        if level >= 1:
            return False
        if level == 0:
            return x > self.lower
        return x > self.level_fn(level)


class ClippedCurve(MonotoneCurve):
    """max(floor, min(ceiling, base)); either bound may be omitted."""

    def __init__(self, base, floor=None, ceiling=None):
        self.base = base
        self.floor = floor
        self.ceiling = ceiling

    def _clip(self, v):
        if self.floor is not None:
            v = np.maximum(self.floor, v)
        if self.ceiling is not None:
            v = np.minimum(self.ceiling, v)
        return v

    def eval(self, x):
        return _scalar_or_array(x, self._clip(self.base.eval(x)))

    def left_limit(self, x):
        return _scalar_or_array(x, self._clip(self.base.left_limit(x)))

    @property
    def window(self):
        return self.base.window

    def left_inverse(self, level):
        if self.floor is not None and level <= self.floor:
            return -INF
        if self.ceiling is not None and level > self.ceiling:
            return INF
        return self.base.left_inverse(level)

    def right_inverse(self, level):
        if self.floor is not None and level < self.floor:
            return -INF
        if self.ceiling is not None and level >= self.ceiling:
            return INF
        return self.base.right_inverse(level)

    def reaches(self, x, level):
        if self.floor is not None and level <= self.floor:
            return True
        if self.ceiling is not None and level > self.ceiling:
            return False
        return self.base.reaches(x, level)

    def exceeds(self, x, level):
        if self.floor is not None and level < self.floor:
            return True
        if self.ceiling is not None and level >= self.ceiling:
            return False
        return self.base.exceeds(x, level)


class PointwiseMin(MonotoneCurve):
    """Lower envelope of finitely many curves."""

    def __init__(self, curves):
        self.curves = tuple(curves)
        if not self.curves:
            raise InvalidInputError("envelope of an empty family")

    def eval(self, x):
        vals = np.min([np.asarray(c.eval(x), dtype=float) for c in self.curves], axis=0)
        return _scalar_or_array(x, vals)

    def left_limit(self, x):
        vals = np.min([np.asarray(c.left_limit(x), dtype=float) for c in self.curves], axis=0)
        return _scalar_or_array(x, vals)

    @property
    def window(self):
        ws = [c.window for c in self.curves]
        return (min(w[0] for w in ws), max(w[1] for w in ws))

    def left_inverse(self, level):
        return max(c.left_inverse(level) for c in self.curves)

    def right_inverse(self, level):
        return max(c.right_inverse(level) for c in self.curves)

    def reaches(self, x, level):
        return all(c.reaches(x, level) for c in self.curves)

    def exceeds(self, x, level):
        return all(c.exceeds(x, level) for c in self.curves)


class PointwiseMax(PointwiseMin):
    """Upper envelope of finitely many curves."""

    def eval(self, x):
        vals = np.max([np.asarray(c.eval(x), dtype=float) for c in self.curves], axis=0)
        return _scalar_or_array(x, vals)

    def left_limit(self, x):
        vals = np.max([np.asarray(c.left_limit(x), dtype=float) for c in self.curves], axis=0)
        return _scalar_or_array(x, vals)

    def left_inverse(self, level):
        return min(c.left_inverse(level) for c in self.curves)

    def right_inverse(self, level):
        return min(c.right_inverse(level) for c in self.curves)

    def reaches(self, x, level):
        return any(c.reaches(x, level) for c in self.curves)

    def exceeds(self, x, level):
        return any(c.exceeds(x, level) for c in self.curves)


class ShiftedCurve(MonotoneCurve):
    """x -> base(x - shift): the curve of X + shift when base is the cdf of X."""

    def __init__(self, base, shift):
        self.base = base
        self.shift = float(shift)

    def eval(self, x):
        return self.base.eval(np.asarray(x, dtype=float) - self.shift if np.ndim(x) else float(x) - self.shift)

    def left_limit(self, x):
        return self.base.left_limit(np.asarray(x, dtype=float) - self.shift if np.ndim(x) else float(x) - self.shift)

    @property
    def window(self):
        lo, hi = self.base.window
        return (lo + self.shift, hi + self.shift)

    def left_inverse(self, level):
        return self.base.left_inverse(level) + self.shift

    def right_inverse(self, level):
        return self.base.right_inverse(level) + self.shift

    def reaches(self, x, level):
        return self.base.reaches(x - self.shift, level)

    def exceeds(self, x, level):
        return self.base.exceeds(x - self.shift, level)


class QuantileCurve(MonotoneCurve):
    """Distribution function given through a nondecreasing quantile function.

    ``quantile`` maps (0, 1) to the reals and is taken to be continuous,
    so the left and right inverses inside (0, 1) coincide with it.
    """

    def __init__(self, quantile, window=None):
        self.quantile = quantile
        self._window = window

    @property
    def window(self):
        if self._window is not None:
            return self._window
        return (float(self.quantile(1e-6)), float(self.quantile(1 - 1e-6)))

    def _measure_below(self, x, strict):
        # Lebesgue measure of {t : Q(t) <= x} (or < x when strict)
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        lo = np.zeros_like(xs)
        hi = np.ones_like(xs)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            qm = np.asarray(self.quantile(mid), dtype=float)
            below = qm < xs if strict else qm <= xs
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return _scalar_or_array(x, lo if np.ndim(x) == 0 else lo.reshape(np.shape(x)))

    def eval(self, x):
        return self._measure_below(x, strict=False)

    def left_limit(self, x):
        return self._measure_below(x, strict=True)

    def left_inverse(self, level):
        if level <= 0:
            return -INF
        if level >= 1:
            return float(self.quantile(1 - 1e-16)) if level == 1 else INF
        return float(self.quantile(level))

    def right_inverse(self, level):
        if level < 0:
            return -INF
        if level >= 1:
            return INF
        if level == 0:
            return float(self.quantile(1e-300))
        return float(self.quantile(level))
