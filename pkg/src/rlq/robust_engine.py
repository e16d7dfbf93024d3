"""Robust Lambda-quantiles over uncertainty sets.

The worst (best) value over a set is read off the set's lower (upper) cdf
bound. Whether that value is the true sup/inf or only a bound depends on
the quantile kind, the monotonicity of the level function and on whether
the bounds are attained by members of the set; every result carries a tag
saying which case applies.
"""

import enum
import json
import re
from dataclasses import dataclass, field

from rlq import env_aggregation, env_moment, env_wasserstein
from rlq.curves import INF, MonotoneCurve, PointwiseMax, PointwiseMin
from rlq.distributions import parse_distribution
from rlq.env_aggregation import AggregationSet
from rlq.env_moment import MomentSet
from rlq.env_wasserstein import WassersteinBall
from rlq.errors import InvalidInputError, PreconditionError
from rlq.lambda_core import QuantileKind, StepLambda, lambda_quantile, representation_value


class Exactness(enum.Enum):
    EXACT = "exact"
    UPPER_BOUND = "upper_bound"
    LOWER_BOUND = "lower_bound"


@dataclass(frozen=True)
class Attainability:
    """Which cdf bounds are attained pointwise by members of a set.

    ``lower`` : for every x some member equals the lower bound at x.
    ``lower_left_limit`` : the left-limit version of the lower bound is
    continuous and attained by left limits of members.
    ``upper`` : for every x some member equals the upper bound at x.
    """

    lower: bool
    lower_left_limit: bool
    upper: bool


_CONTINUOUS_FAMILY = Attainability(lower=False, lower_left_limit=True, upper=True)


@dataclass(frozen=True)
class FiniteSet:
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise InvalidInputError("a finite set needs at least one member")
        for i, m in enumerate(members):
            if not isinstance(m, MonotoneCurve):
                raise InvalidInputError(f"member {i} is not a monotone curve")
        object.__setattr__(self, "members", members)


@dataclass(frozen=True)
class EnvelopeSet:
    """A set known only through its cdf bounds and their attainability."""

    lower: MonotoneCurve
    upper: MonotoneCurve
    attainability: Attainability = Attainability(False, False, False)


def attainability(uset):
    if isinstance(uset, FiniteSet):
        return Attainability(True, True, True)
    if isinstance(uset, (MomentSet, WassersteinBall, AggregationSet)):
        return _CONTINUOUS_FAMILY
    if isinstance(uset, EnvelopeSet):
        return uset.attainability
    raise InvalidInputError(f"unsupported uncertainty set {type(uset).__name__}")


def extremal_curve(uset, side="lower"):
    """Pointwise inf (side='lower') or sup (side='upper') of the member cdfs."""
    if side not in ("lower", "upper"):
        raise InvalidInputError(f"side must be 'lower' or 'upper', got {side!r}")
    if isinstance(uset, FiniteSet):
        if len(uset.members) == 1:
            return uset.members[0]
        return PointwiseMin(uset.members) if side == "lower" else PointwiseMax(uset.members)
    if isinstance(uset, MomentSet):
        return env_moment.envelope(uset, side)
    if isinstance(uset, WassersteinBall):
        return env_wasserstein.envelope(uset, side)
    if isinstance(uset, AggregationSet):
        return env_aggregation.envelope(uset, side)
    if isinstance(uset, EnvelopeSet):
        return uset.lower if side == "lower" else uset.upper
    raise InvalidInputError(f"unsupported uncertainty set {type(uset).__name__}")


def _fmt_value(v):
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return v


@dataclass
class RobustResult:
    value: float
    exactness: Exactness
    kind: QuantileKind
    direction: str
    envelope: str
    clip_level: float = None
    envelope_value: float = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "value": _fmt_value(self.value),
            "exactness": self.exactness.value,
            "kind": self.kind.value,
            "direction": self.direction,
            "envelope": self.envelope,
        }
        if self.clip_level is not None:
            out["clip_level"] = self.clip_level
        if self.envelope_value is not None:
            out["envelope_value"] = _fmt_value(self.envelope_value)
        out.update(self.extra)
        return out

    def to_json(self):
        return json.dumps(self.to_dict())


def exactness_tag(kind, direction, decreasing, attain):
    """Tag for the envelope value of (kind, direction) given the set's attainability."""
    K = QuantileKind
    if direction == "sup":
        plus_ok = attain.lower or (decreasing and attain.lower_left_limit)
        if kind is K.QTILDEMINUS or (decreasing and kind is K.QMINUS):
            return Exactness.EXACT
        if kind is K.QTILDEPLUS or (decreasing and kind is K.QPLUS):
            return Exactness.EXACT if plus_ok else Exactness.UPPER_BOUND
        return Exactness.UPPER_BOUND
    if direction == "inf":
        if kind is K.QPLUS or (decreasing and kind is K.QTILDEPLUS):
            return Exactness.EXACT
        if kind is K.QMINUS or (decreasing and kind is K.QTILDEMINUS):
            return Exactness.EXACT if attain.upper else Exactness.LOWER_BOUND
        return Exactness.LOWER_BOUND
    raise InvalidInputError(f"direction must be 'sup' or 'inf', got {direction!r}")


def _check_direction(direction):
    if direction not in ("sup", "inf"):
        raise InvalidInputError(f"direction must be 'sup' or 'inf', got {direction!r}")


def _aggregation_clip(uset, lam, direction):
    if direction == "sup":
        t = uset.clip_level("lower")
        if not t < lam.lowest:
            raise PreconditionError(
                f"aggregation sup needs clip level t < min level of the level function; got t={t} >= {lam.lowest}"
            )
    else:
        t = uset.clip_level("upper")
        if not t > lam.highest:
            raise PreconditionError(
                f"aggregation inf needs clip level t > max level of the level function; got t={t} <= {lam.highest}"
            )
    return t


def robust_lambda_quantile(uset, lam, kind, direction="sup"):
    """sup (or inf) over the set of the Lambda-quantile of the given kind."""
    if not isinstance(lam, StepLambda):
        raise InvalidInputError("level function must be a StepLambda")
    kind = kind if isinstance(kind, QuantileKind) else QuantileKind.parse(kind)
    _check_direction(direction)
    side = "lower" if direction == "sup" else "upper"

    if isinstance(uset, FiniteSet):
        vals = [lambda_quantile(m, lam, kind) for m in uset.members]
        value = max(vals) if direction == "sup" else min(vals)
        env_val = lambda_quantile(extremal_curve(uset, side), lam, kind)
        return RobustResult(value, Exactness.EXACT, kind, direction, side, envelope_value=env_val)

    clip = None
    label = side
    if isinstance(uset, AggregationSet):
        clip = _aggregation_clip(uset, lam, direction)
        label = "clipped-" + side
        curve = env_aggregation.ClippedLowerEnvelope(uset, clip) if side == "lower" else (
            env_aggregation.ClippedUpperEnvelope(uset, clip)
        )
    else:
        curve = extremal_curve(uset, side)
    value = lambda_quantile(curve, lam, kind)
    tag = exactness_tag(kind, direction, lam.is_nonincreasing, attainability(uset))
    return RobustResult(value, tag, kind, direction, label, clip_level=clip)


_QUANTILE_SIDES = {
    "sup_left": ("sup", QuantileKind.QMINUS),
    "sup_right": ("sup", QuantileKind.QPLUS),
    "inf_left": ("inf", QuantileKind.QMINUS),
    "inf_right": ("inf", QuantileKind.QPLUS),
}


def robust_quantile(uset, alpha, side="sup_left"):
    """Robust ordinary quantile: a constant level function."""
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise InvalidInputError(f"level must lie strictly inside (0, 1), got {alpha}")
    if side not in _QUANTILE_SIDES:
        raise InvalidInputError(f"side must be one of {sorted(_QUANTILE_SIDES)}, got {side!r}")
    direction, kind = _QUANTILE_SIDES[side]
    return robust_lambda_quantile(uset, StepLambda.constant(alpha), kind, direction)


def robust_representation(uset, lam, kind="qminus", direction="sup", form="inf"):
    """Decreasing-level alternative: min/max formula over the envelope's quantile levels."""
    _check_direction(direction)
    side = "lower" if direction == "sup" else "upper"
    if isinstance(uset, AggregationSet):
        clip = _aggregation_clip(uset, lam, direction)
        curve = env_aggregation.ClippedLowerEnvelope(uset, clip) if side == "lower" else (
            env_aggregation.ClippedUpperEnvelope(uset, clip)
        )
    else:
        curve = extremal_curve(uset, side)
    return representation_value(curve, lam, kind, form)


# ---------------------------------------------------------------- parsing


def _key_values(body, text):
    """Split ``k=v,k=v`` where values may themselves contain commas."""
    pairs = []
    for token in body.split(","):
        if "=" in token and re.match(r"^\s*[A-Za-z_]+\s*=", token):
            key, _, val = token.partition("=")
            pairs.append([key.strip().lower(), val.strip()])
        elif pairs:
            pairs[-1][1] += "," + token.strip()
        else:
            raise InvalidInputError(f"expected key=value entries in {text!r}")
    out = {}
    for key, val in pairs:
        if key in out:
            raise InvalidInputError(f"duplicate key {key!r} in {text!r}")
        out[key] = val
    return out


def _number(opts, key, text, default=None):
    if key not in opts:
        if default is None:
            raise InvalidInputError(f"missing {key}= in {text!r}")
        return default
    try:
        return float(opts.pop(key))
    except ValueError as exc:
        raise InvalidInputError(f"{key} must be a number in {text!r}") from exc


def _reject_unknown(opts, text):
    if opts:
        raise InvalidInputError(f"unknown keys {sorted(opts)} in {text!r}")


def _marginal_list(body):
    margs = []
    for part in re.split(r"(?<![eE])\+", body):
        part = part.strip()
        if not part:
            raise InvalidInputError("empty marginal in aggregation set")
        reps = re.match(r"^(\d+)\s*\*\s*(.+)$", part)
        if reps:
            margs += [parse_distribution(reps.group(2))] * int(reps.group(1))
        else:
            margs.append(parse_distribution(part))
    return tuple(margs)


def parse_set(text):
    """Parse an uncertainty set descriptor.

    moment:p=2,m=1,v=1
    wass:p=1,eps=0.1,base=exp:1
    agg:exp:1+exp:1[,t=0.5]        (``3*exp:1`` repeats a marginal)
    finite:norm:0,1|point:0.5
    """
    text = text.strip()
    family, _, body = text.partition(":")
    family = family.strip().lower()
    if family == "moment":
        opts = _key_values(body, text)
        mset = MomentSet(_number(opts, "p", text, 2.0), _number(opts, "m", text), _number(opts, "v", text))
        _reject_unknown(opts, text)
        return mset
    if family in ("wass", "wasserstein"):
        opts = _key_values(body, text)
        p = _number(opts, "p", text, 1.0)
        eps = _number(opts, "eps", text)
        if "base" not in opts:
            raise InvalidInputError(f"missing base= in {text!r}")
        base = parse_distribution(opts.pop("base"))
        _reject_unknown(opts, text)
        return WassersteinBall(p, base, eps)
    if family in ("agg", "aggregation"):
        t = None
        tail = re.search(r",\s*t\s*=\s*([^,]+)$", body)
        if tail:
            try:
                t = float(tail.group(1))
            except ValueError as exc:
                raise InvalidInputError(f"t must be a number in {text!r}") from exc
            body = body[: tail.start()]
        return AggregationSet(_marginal_list(body), t)
    if family == "finite":
        members = [parse_distribution(p) for p in body.split("|") if p.strip()]
        return FiniteSet(tuple(members))
    raise InvalidInputError(f"unknown uncertainty set type {family!r} in {text!r}")

