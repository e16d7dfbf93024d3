"""Extremal distribution functions of a moment uncertainty set.

The set holds every distribution with mean ``m`` whose p-th absolute
central moment is at most ``v**p``. Its pointwise lower and upper cdf
bounds are the inverses of two explicit level curves:

    worst(a) = m + v * a       * (a**p * (1-a) + (1-a)**p * a) ** (-1/p)
    best(a)  = m - v * (1 - a) * (a**p * (1-a) + (1-a)**p * a) ** (-1/p)
"""

import math
from dataclasses import dataclass

import numpy as np

from rlq.curves import INF, InverseOfIncreasing
from rlq.errors import InvalidInputError


@dataclass(frozen=True)
class MomentSet:
    p: float = 2.0
    m: float = 0.0
    v: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p > 1):
            raise InvalidInputError(f"moment set needs p > 1, got p={self.p}")
        if not math.isfinite(self.m):
            raise InvalidInputError("moment set mean must be finite")
        if not (math.isfinite(self.v) and self.v > 0):
            raise InvalidInputError(f"moment set needs v > 0, got v={self.v}")

    def to_text(self):
        return f"moment:p={self.p!r},m={self.m!r},v={self.v!r}"


def _spread(alpha, p):
    a = np.asarray(alpha, dtype=float)
    return (a**p * (1 - a) + (1 - a) ** p * a) ** (-1.0 / p)


def _check_levels(alpha):
    a = np.asarray(alpha, dtype=float)
    if np.any(~((a > 0) & (a < 1))):
        raise InvalidInputError("levels must lie strictly inside (0, 1)")
    return a


def level_curve(mset, alpha, side="worst"):
    """l(alpha) for side='worst', u(alpha) for side='best'; vectorised in alpha."""
    a = _check_levels(alpha)
    if mset.p == 2:
        # closed forms avoid the cancellation of the general expression near 0 and 1
        if side == "worst":
            out = mset.m + mset.v * np.sqrt(a / (1 - a))
        elif side == "best":
            out = mset.m - mset.v * np.sqrt((1 - a) / a)
        else:
            raise InvalidInputError(f"side must be 'worst' or 'best', got {side!r}")
    else:
        s = _spread(a, mset.p)
        if side == "worst":
            out = mset.m + mset.v * a * s
        elif side == "best":
            out = mset.m - mset.v * (1 - a) * s
        else:
            raise InvalidInputError(f"side must be 'worst' or 'best', got {side!r}")
    return float(out) if np.ndim(alpha) == 0 else out


def _lower_p2(mset):
    m, v2 = mset.m, mset.v**2

    def fn(x):
        d = x - m
        return 0.0 if d <= 0 else d * d / (v2 + d * d)

    return fn


def _upper_p2(mset):
    m, v2 = mset.m, mset.v**2

    def fn(x):
        d = m - x
        return 1.0 if d <= 0 else v2 / (v2 + d * d)

    return fn


def envelope(mset, side="lower"):
    """Lower (inf over the set) or upper (sup over the set) cdf bound.

    The lower bound vanishes up to m and the upper bound equals 1 from m on;
    both are continuous.
    """
    if side == "lower":
        fn = lambda a: level_curve(mset, a, "worst")  # noqa: E731
        closed = _lower_p2(mset) if mset.p == 2 else None
        return InverseOfIncreasing(fn, lower=mset.m, upper=INF, eval_fn=closed)
    if side == "upper":
        fn = lambda a: level_curve(mset, a, "best")  # noqa: E731
        closed = _upper_p2(mset) if mset.p == 2 else None
        return InverseOfIncreasing(fn, lower=-INF, upper=mset.m, eval_fn=closed)
    raise InvalidInputError(f"side must be 'lower' or 'upper', got {side!r}")


def two_point_member(mset, alpha):
    """Feasible two-point law with mass alpha at the low atom and central moment exactly v**p.

    Its atoms are u(alpha) and l(alpha), so it touches the lower envelope at
    l(alpha) from the left and the upper envelope at u(alpha).
    """
    from rlq.distributions import Discrete

    a = float(_check_levels(alpha))
    s = mset.v * float(_spread(a, mset.p))
    lo = mset.m - s * (1 - a)
    hi = mset.m + s * a
    return Discrete([lo, hi], [a, 1 - a])
