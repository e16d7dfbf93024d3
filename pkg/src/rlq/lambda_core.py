"""Step level functions and the four Lambda-quantiles of a nondecreasing curve.

For a level function ``lam`` and a nondecreasing curve ``f``:

    qminus       inf{x : f(x) >= lam(x)}
    qplus        inf{x : f(x) >  lam(x)}
    qtildeminus  sup{x : f(x) <  lam(x)}
    qtildeplus   sup{x : f(x) <= lam(x)}

All four are evaluated exactly for piecewise-constant ``lam`` by working
interval by interval with the generalized inverses of ``f``; no grid is
involved.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from rlq.curves import INF
from rlq.errors import InvalidInputError


class QuantileKind(enum.Enum):
    QMINUS = "qminus"
    QPLUS = "qplus"
    QTILDEMINUS = "qtildeminus"
    QTILDEPLUS = "qtildeplus"

    @classmethod
    def parse(cls, text):
        key = str(text).strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "qminus": cls.QMINUS,
            "qplus": cls.QPLUS,
            "qtildeminus": cls.QTILDEMINUS,
            "qtildeplus": cls.QTILDEPLUS,
        }
        if key not in aliases:
            raise InvalidInputError(f"unknown quantile kind {text!r}")
        return aliases[key]

    @property
    def uses_right_inverse(self):
        return self in (QuantileKind.QPLUS, QuantileKind.QTILDEPLUS)

    @property
    def is_tilde(self):
        return self in (QuantileKind.QTILDEMINUS, QuantileKind.QTILDEPLUS)


ALL_KINDS = tuple(QuantileKind)


class Monotonicity(enum.Enum):
    CONSTANT = "constant"
    INCREASING = "increasing"
    DECREASING = "decreasing"
    NONMONOTONE = "nonmonotone"


def _fmt(v):
    text = repr(float(v))
    return text[:-2] if text.endswith(".0") else text


@dataclass(frozen=True)
class StepLambda:
    """Right-continuous step function with values in [0, 1].

    ``levels[0]`` applies on (-inf, breaks[0]), ``levels[k]`` on
    [breaks[k-1], breaks[k]) and ``levels[-1]`` on [breaks[-1], inf).
    """

    breaks: tuple
    levels: tuple

    def __post_init__(self):
        b = tuple(float(v) for v in self.breaks)
        lv = tuple(float(v) for v in self.levels)
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "levels", lv)
        if len(lv) != len(b) + 1:
            raise InvalidInputError("a step level function needs one more level than breakpoints")
        if any(not math.isfinite(v) for v in b):
            raise InvalidInputError("breakpoints must be finite")
        if any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
            raise InvalidInputError("breakpoints must be strictly increasing")
        if any(not (0.0 <= v <= 1.0) for v in lv):
            raise InvalidInputError(f"levels must lie in [0, 1], got {lv}")

    @classmethod
    def constant(cls, level):
        return cls((), (level,))

    @classmethod
    def two_level(cls, first, second, cut):
        """``first`` below ``cut`` and ``second`` from ``cut`` on."""
        return cls((cut,), (first, second))

    @classmethod
    def from_function(cls, fn, breaks):
        """Sample a level function at the left end of each interval between breaks."""
        breaks = tuple(float(v) for v in breaks)
        probes = [breaks[0] - 1.0] + list(breaks) if breaks else [0.0]
        return cls(breaks, tuple(float(fn(p)) for p in probes))

    @classmethod
    def parse(cls, text):
        """``step:l0,b1,l1,b2,l2,...``; the ``step:`` prefix is optional."""
        body = text.strip()
        if body.lower().startswith("step:"):
            body = body[5:]
        elif ":" in body:
            raise InvalidInputError(f"unknown level function type in {text!r}")
        try:
            vals = [float(v) for v in body.split(",") if v.strip() != ""]
        except ValueError as exc:
            raise InvalidInputError(f"level function entries must be numbers: {text!r}") from exc
        if len(vals) % 2 != 1:
            raise InvalidInputError(f"expected l0[,b1,l1...] with an odd number of entries: {text!r}")
        return cls(tuple(vals[1::2]), tuple(vals[0::2]))

    def to_text(self):
        parts = [_fmt(self.levels[0])]
        for b, lv in zip(self.breaks, self.levels[1:]):
            parts += [_fmt(b), _fmt(lv)]
        return "step:" + ",".join(parts)

    def __call__(self, x):
        idx = np.searchsorted(np.asarray(self.breaks, dtype=float), x, side="right")
        out = np.asarray(self.levels)[idx]
        return float(out) if np.ndim(x) == 0 else out

    def intervals(self):
        """Yield (left end, right end, level); ends are -inf/inf at the extremes."""
        edges = (-INF,) + self.breaks + (INF,)
        for k, lv in enumerate(self.levels):
            yield edges[k], edges[k + 1], lv

    @property
    def monotonicity(self):
        lv = np.asarray(self.levels)
        d = np.diff(lv)
        if np.all(d == 0):
            return Monotonicity.CONSTANT
        if np.all(d >= 0):
            return Monotonicity.INCREASING
        if np.all(d <= 0):
            return Monotonicity.DECREASING
        return Monotonicity.NONMONOTONE

    @property
    def is_nonincreasing(self):
        return self.monotonicity in (Monotonicity.CONSTANT, Monotonicity.DECREASING)

    @property
    def lowest(self):
        return min(self.levels)

    @property
    def highest(self):
        return max(self.levels)

    def shifted(self, shift):
        """x -> lam(x - shift)."""
        return StepLambda(tuple(b + shift for b in self.breaks), self.levels)

    def compressed(self):
        """Drop breakpoints across which the level does not change."""
        keep_b, keep_l = [], [self.levels[0]]
        for b, lv in zip(self.breaks, self.levels[1:]):
            if lv != keep_l[-1]:
                keep_b.append(b)
                keep_l.append(lv)
        return StepLambda(tuple(keep_b), tuple(keep_l))


def shift_lambda(lam, shift):
    """Level function of x - shift; pairs with adding ``shift`` to the random variable."""
    return lam.shifted(shift)


def _coerce_kind(kind):
    return kind if isinstance(kind, QuantileKind) else QuantileKind.parse(kind)


def lambda_quantile(curve, lam, kind):
    """Exact Lambda-quantile of ``curve`` for a step level function.

    ``curve`` is any nondecreasing curve exposing left_inverse,
    right_inverse, reaches and exceeds.
    """
    kind = _coerce_kind(kind)
    right = kind.uses_right_inverse
    if not kind.is_tilde:
        best = INF
        for lo, hi, lv in lam.intervals():
            a = curve.right_inverse(lv) if right else curve.left_inverse(lv)
            c = max(lo, a)
            if c < hi and c < best:
                best = c
        return float(best)
    best = -INF
    for lo, hi, lv in lam.intervals():
        a = curve.right_inverse(lv) if right else curve.left_inverse(lv)
        if a < lo:
            continue
        if a == lo:
            # the set {f < lv} (or {f <= lv}) meets [lo, hi) only if lo itself belongs to it
            if lo == -INF:
                continue
            inside = not curve.exceeds(lo, lv) if right else not curve.reaches(lo, lv)
            if not inside:
                continue
        c = min(a, hi)
        if c > best:
            best = c
    return float(best)


def all_quantiles(curve, lam):
    return {k: lambda_quantile(curve, lam, k) for k in QuantileKind}


def representation_value(curve, lam, kind="qminus", form="inf"):
    """Quantile-based formulas valid for nonincreasing step level functions.

    form='inf' gives inf over x of max(q_{lam(x)}, x); form='sup' gives sup
    over x of min(q_{lam(x)}, x). ``kind`` picks the left ('qminus') or
    right ('qplus') generalized inverse inside the formula.
    """
    kind = _coerce_kind(kind)
    if kind.is_tilde:
        raise InvalidInputError("the representation formulas use qminus or qplus")
    if not lam.is_nonincreasing:
        raise InvalidInputError("the representation formulas need a nonincreasing level function")
    right = kind.uses_right_inverse
    vals = []
    for lo, hi, lv in lam.intervals():
        a = curve.right_inverse(lv) if right else curve.left_inverse(lv)
        vals.append(max(a, lo) if form == "inf" else min(a, hi))
    if form == "inf":
        return float(min(vals))
    if form == "sup":
        return float(max(vals))
    raise InvalidInputError(f"form must be 'inf' or 'sup', got {form!r}")


def representation_from_levels(level_fn, lam, form):
    """Same formulas with a closed-form level map level -> generalized inverse."""
    vals = []
    for lo, hi, lv in lam.intervals():
        a = level_fn(lv)
        vals.append(max(a, lo) if form == "inf" else min(a, hi))
    return float(min(vals) if form == "inf" else max(vals))
