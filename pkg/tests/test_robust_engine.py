import json
import math

import numpy as np
import pytest

from rlq.curves import StepCurve
from rlq.distributions import Exponential, Normal, PointMass, StudentT, Uniform
from rlq.env_aggregation import AggregationSet
from rlq.env_moment import MomentSet
from rlq.env_wasserstein import WassersteinBall
from rlq.errors import InvalidInputError, PreconditionError
from rlq.lambda_core import ALL_KINDS, QuantileKind, StepLambda, lambda_quantile
from rlq.oracles import mc_feasible_moment, mc_feasible_wasserstein, random_aggregation_members
from rlq.robust_engine import (
    Attainability,
    EnvelopeSet,
    Exactness,
    FiniteSet,
    attainability,
    exactness_tag,
    extremal_curve,
    parse_set,
    robust_lambda_quantile,
    robust_quantile,
    robust_representation,
)

QM, QP, QTM, QTP = QuantileKind.QMINUS, QuantileKind.QPLUS, QuantileKind.QTILDEMINUS, QuantileKind.QTILDEPLUS
EXACT, UB, LB = Exactness.EXACT, Exactness.UPPER_BOUND, Exactness.LOWER_BOUND

DEC = StepLambda.two_level(0.95, 0.8, 2.0)
INC = StepLambda.two_level(0.8, 0.95, 2.0)

F1 = StepCurve([0.0, 1.0], [0.0, 1 / 3, 1.0])
F2 = StepCurve([0.5], [0.0, 1.0])
SMALL_INC = StepLambda((0.5, 1.0), (0.25, 0.375, 0.5))


# ---------------------------------------------------------------- tags


def test_tags_without_attainability():
    none = Attainability(False, False, False)
    for dec in (False, True):
        assert exactness_tag(QTM, "sup", dec, none) is EXACT
        assert exactness_tag(QP, "inf", dec, none) is EXACT
        assert exactness_tag(QTP, "sup", dec, none) is UB
        assert exactness_tag(QM, "inf", dec, none) is LB
    assert exactness_tag(QM, "sup", False, none) is UB
    assert exactness_tag(QM, "sup", True, none) is EXACT
    assert exactness_tag(QP, "sup", True, none) is UB
    assert exactness_tag(QTP, "inf", True, none) is EXACT
    assert exactness_tag(QTM, "inf", True, none) is LB
    assert exactness_tag(QTM, "inf", False, none) is LB


def test_tags_with_attainability():
    full = Attainability(True, True, True)
    left = Attainability(False, True, True)
    assert exactness_tag(QTP, "sup", False, full) is EXACT
    # the left-limit route only helps a nonincreasing level function
    assert exactness_tag(QTP, "sup", False, left) is UB
    assert exactness_tag(QTP, "sup", True, left) is EXACT
    assert exactness_tag(QP, "sup", True, left) is EXACT
    assert exactness_tag(QM, "inf", False, left) is EXACT
    assert exactness_tag(QTM, "inf", True, left) is EXACT
    # increasing level, remaining combinations stay bounds
    assert exactness_tag(QP, "sup", False, full) is UB
    assert exactness_tag(QTP, "inf", False, full) is LB


def test_family_attainability():
    fam = Attainability(lower=False, lower_left_limit=True, upper=True)
    assert attainability(MomentSet(2.0, 1.0, 1.0)) == fam
    assert attainability(WassersteinBall(1.0, Exponential(1.0), 0.1)) == fam
    assert attainability(AggregationSet((Uniform(0, 1),) * 2)) == fam
    assert attainability(FiniteSet((Normal(),))) == Attainability(True, True, True)
    with pytest.raises(InvalidInputError):
        attainability("moment")


def test_bad_direction():
    with pytest.raises(InvalidInputError):
        robust_lambda_quantile(MomentSet(2.0, 0.0, 1.0), DEC, QM, "max")
    with pytest.raises(InvalidInputError):
        exactness_tag(QM, "both", False, Attainability(True, True, True))


# ---------------------------------------------------------------- finite sets


def test_finite_envelopes():
    s = FiniteSet((F1, F2))
    lower = extremal_curve(s, "lower")
    upper = extremal_curve(s, "upper")
    for x, lo, hi in ((-1, 0, 0), (0.25, 0, 1 / 3), (0.5, 1 / 3, 1), (0.75, 1 / 3, 1), (1.0, 1, 1)):
        assert lower(x) == pytest.approx(lo)
        assert upper(x) == pytest.approx(hi)
    single = FiniteSet((F1,))
    assert extremal_curve(single, "lower") is F1 and extremal_curve(single, "upper") is F1


def test_finite_counterexample_by_enumeration():
    r = robust_lambda_quantile(FiniteSet((F1, F2)), SMALL_INC, QM, "sup")
    assert r.value == 0.5
    assert r.exactness is EXACT
    assert r.envelope_value == 1.0


@pytest.mark.parametrize("kind", ALL_KINDS)
@pytest.mark.parametrize("direction", ["sup", "inf"])
def test_finite_enumeration_matches_members(kind, direction):
    members = (Normal(0, 1), Exponential(1.0), Uniform(-1, 3), PointMass(1.5))
    vals = [lambda_quantile(m, INC, kind) for m in members]
    r = robust_lambda_quantile(FiniteSet(members), INC, kind, direction)
    assert r.value == (max(vals) if direction == "sup" else min(vals))
    # where the theorem needs no attainability, the envelope gives the same value
    if exactness_tag(kind, direction, False, Attainability(False, False, False)) is EXACT:
        assert r.envelope_value == pytest.approx(r.value, abs=1e-9)


def test_sequence_counterexample():
    lam = StepLambda((0.0, 1.0), (0.75, 0.5, 0.25))
    seq = tuple(StepCurve([0.0, 1.0], [0.0, 0.5 + 1 / (2 * n), 1.0]) for n in range(1, 51))
    r = robust_lambda_quantile(FiniteSet(seq), lam, QTP, "sup")
    assert r.value == 0.0
    limit = EnvelopeSet(StepCurve([0.0, 1.0], [0.0, 0.5, 1.0]), StepCurve([0.0, 1.0], [0.0, 1.0, 1.0]))
    env = robust_lambda_quantile(limit, lam, QTP, "sup")
    assert env.value == 1.0
    assert env.exactness is UB
    # qtildeminus needs no attainability and there is no gap
    assert robust_lambda_quantile(FiniteSet(seq), lam, QTM, "sup").value == 0.0
    assert robust_lambda_quantile(limit, lam, QTM, "sup").value == 0.0


# ---------------------------------------------------------------- reference values


def test_moment_decreasing_worst_qminus():
    r = robust_lambda_quantile(MomentSet(2.0, 1.0, 1.0), DEC, QM, "sup")
    assert r.value == pytest.approx(3.0, abs=1e-9)
    assert r.exactness is EXACT
    assert r.envelope == "lower"


def test_moment_increasing_worst_qtildeminus():
    r = robust_lambda_quantile(MomentSet(2.0, 1.0, 1.0), INC, QTM, "sup")
    assert r.value == pytest.approx(1 + math.sqrt(0.95 / 0.05), abs=1e-4)
    assert r.value == pytest.approx(5.3589, abs=1e-4)
    assert r.exactness is EXACT


def test_wasserstein_exponential_worst():
    r = robust_lambda_quantile(WassersteinBall(1.0, Exponential(1.0), 0.1), INC, QTM, "sup")
    assert r.value == pytest.approx(5.943, abs=1e-3)
    assert r.exactness is EXACT


def test_robust_quantile_moment_closed_form():
    s = MomentSet(2.0, 0.5, 2.0)
    for alpha in (0.3, 0.9, 0.99):
        r = robust_quantile(s, alpha, "sup_left")
        assert r.value == pytest.approx(0.5 + 2.0 * math.sqrt(alpha / (1 - alpha)), rel=1e-10)
        assert r.exactness is EXACT


def test_robust_quantile_aggregation():
    r = robust_quantile(parse_set("agg:unif:0,1+unif:0,1"), 0.95, "sup_left")
    assert r.value == pytest.approx(1.95, abs=1e-6)
    assert r.envelope == "clipped-lower"
    assert r.clip_level == 0.0


def test_robust_quantile_wasserstein_small_radius():
    g = Normal(0.0, 1.0)
    q = g.left_inverse(0.9)
    gaps = [robust_quantile(WassersteinBall(1.0, g, eps), 0.9).value - q for eps in (1e-2, 1e-4, 1e-6)]
    assert gaps[0] > gaps[1] > gaps[2] > 0
    assert gaps[2] < 1e-2


def test_robust_quantile_validation():
    s = MomentSet(2.0, 0.0, 1.0)
    for alpha in (0.0, 1.0, -0.1):
        with pytest.raises(InvalidInputError):
            robust_quantile(s, alpha)
    with pytest.raises(InvalidInputError):
        robust_quantile(s, 0.5, "sideways")
    r = robust_quantile(s, 0.5, "inf_right")
    assert r.direction == "inf" and r.kind is QP and r.exactness is EXACT


def test_aggregation_preconditions():
    aset = AggregationSet((Uniform(0, 1),) * 2, t=0.85)
    with pytest.raises(PreconditionError, match="t=0.85"):
        robust_lambda_quantile(aset, INC, QTM, "sup")
    r = robust_lambda_quantile(AggregationSet((Uniform(0, 1),) * 2, t=0.5), INC, QTM, "sup")
    assert r.clip_level == 0.5
    with pytest.raises(PreconditionError):
        robust_lambda_quantile(AggregationSet((Uniform(0, 1),) * 2, t=0.9), INC, QP, "inf")


def test_two_level_aggregation():
    # increasing level 0.8 then 0.95 from 1.9; the envelope x - 1 crosses 0.95 at 1.95
    lam = StepLambda.two_level(0.8, 0.95, 1.9)
    r = robust_lambda_quantile(parse_set("agg:2*unif:0,1"), lam, QTM, "sup")
    assert r.value == pytest.approx(1.95, abs=1e-6)
    assert r.exactness is EXACT


# ---------------------------------------------------------------- properties

SETS = [
    MomentSet(2.0, 1.0, 1.0),
    MomentSet(3.0, 0.0, 0.5),
    WassersteinBall(1.0, Exponential(1.0), 0.1),
    WassersteinBall(2.0, Normal(1.0, 1.0), 0.2),
    WassersteinBall(1.0, StudentT(3.0, 0.0, 1.0), 0.05),
]


def _members(uset, n, seed):
    if isinstance(uset, MomentSet):
        return mc_feasible_moment(uset, n, seed)
    return mc_feasible_wasserstein(uset, n, seed)


@pytest.mark.parametrize("uset", SETS, ids=repr)
def test_bound_validity_against_sampled_members(uset):
    n = 1000 if isinstance(uset, MomentSet) else 300
    members = _members(uset, n, seed=5)
    for lam in (DEC, INC):
        for kind in ALL_KINDS:
            hi = robust_lambda_quantile(uset, lam, kind, "sup").value
            lo = robust_lambda_quantile(uset, lam, kind, "inf").value
            for m in members:
                v = lambda_quantile(m, lam, kind)
                assert v <= hi + 1e-6
                assert v >= lo - 1e-6


def test_bound_validity_aggregation():
    margs = (Exponential(1.0), Exponential(1.0))
    aset = AggregationSet(margs)
    lam = StepLambda.two_level(0.9, 0.97, 7.0)
    hi = robust_lambda_quantile(aset, lam, QTM, "sup").value
    for m in random_aggregation_members(margs, 1000, seed=2, cells=200):
        assert lambda_quantile(m, lam, QTM) <= hi + 1e-6


@pytest.mark.parametrize("uset", SETS, ids=repr)
def test_representation_matches_envelope_path(uset):
    lams = (DEC, StepLambda((0.0, 1.5, 3.0), (0.99, 0.9, 0.7, 0.5)))
    for lam in lams:
        for kind in (QM, QP):
            direct = robust_lambda_quantile(uset, lam, kind, "sup").value
            assert robust_representation(uset, lam, kind, "sup") == pytest.approx(direct, abs=1e-10)
            direct = robust_lambda_quantile(uset, lam, kind, "inf").value
            assert robust_representation(uset, lam, kind, "inf") == pytest.approx(direct, abs=1e-10)


def test_monotone_in_set_size():
    for lam in (DEC, INC):
        for kind in ALL_KINDS:
            prev_sup, prev_inf = -math.inf, math.inf
            for v in (0.5, 1.0, 2.0):
                s = MomentSet(2.0, 1.0, v)
                hi = robust_lambda_quantile(s, lam, kind, "sup").value
                lo = robust_lambda_quantile(s, lam, kind, "inf").value
                assert hi >= prev_sup - 1e-12 and lo <= prev_inf + 1e-12
                prev_sup, prev_inf = hi, lo
            prev_sup, prev_inf = -math.inf, math.inf
            for eps in (0.0, 0.05, 0.2, 0.5):
                s = WassersteinBall(1.0, Exponential(1.0), eps)
                hi = robust_lambda_quantile(s, lam, kind, "sup").value
                lo = robust_lambda_quantile(s, lam, kind, "inf").value
                assert hi >= prev_sup - 1e-9 and lo <= prev_inf + 1e-9
                prev_sup, prev_inf = hi, lo


# ---------------------------------------------------------------- serialization and parsing


def test_json_serialization_of_infinities():
    s = MomentSet(2.0, 0.0, 1.0)
    r = robust_lambda_quantile(s, StepLambda.constant(1.0), QP, "sup")
    assert r.value == math.inf
    d = json.loads(r.to_json())
    assert d["value"] == "inf"
    # a constant level counts as nonincreasing
    assert d["exactness"] == "exact" and d["kind"] == "qplus"
    assert d["direction"] == "sup" and d["envelope"] == "lower"
    r = robust_lambda_quantile(s, StepLambda.constant(0.0), QTM, "inf")
    assert json.loads(r.to_json())["value"] == "-inf"


def test_aggregation_json_carries_clip():
    r = robust_lambda_quantile(parse_set("agg:unif:0,1+unif:0,1,t=0.3"), StepLambda.constant(0.9), QM, "sup")
    d = r.to_dict()
    assert d["envelope"] == "clipped-lower" and d["clip_level"] == 0.3


def test_parse_set():
    s = parse_set("moment:p=2,m=1,v=1")
    assert isinstance(s, MomentSet) and (s.p, s.m, s.v) == (2.0, 1.0, 1.0)
    s = parse_set("wass:p=1,eps=0.1,base=exp:1")
    assert isinstance(s, WassersteinBall) and s.eps == 0.1 and s.baseline == Exponential(1.0)
    s = parse_set("agg:exp:1+exp:1+exp:1,t=0.5")
    assert isinstance(s, AggregationSet) and s.n == 3 and s.t == 0.5
    s = parse_set("agg:3*pareto:3,1+unif:0,1")
    assert s.n == 4 and s.t is None
    s = parse_set("finite:norm:0,1|point:0.5")
    assert isinstance(s, FiniteSet) and len(s.members) == 2
    s = parse_set("wass:eps=0.2,base=norm:1e-3,2")
    assert s.p == 1.0 and s.baseline == Normal(1e-3, 2.0)


@pytest.mark.parametrize("text", [
    "moment:m=1", "moment:p=2,m=1,v=1,w=3", "moment:p=2,m=x,v=1", "wass:p=1,eps=0.1",
    "cube:1", "finite:", "agg:exp:1+,t=0.5", "moment:p=2,m=1,m=2,v=1",
])
def test_parse_set_rejects(text):
    with pytest.raises(InvalidInputError):
        parse_set(text)


def test_nonstep_lambda_rejected():
    with pytest.raises(InvalidInputError):
        robust_lambda_quantile(MomentSet(2.0, 0.0, 1.0), lambda x: 0.5, QM)


def test_bound_tag_is_valid_on_moment_set_increasing():
    # UpperBound results for an increasing level never undercut sampled members
    s = MomentSet(2.0, 0.0, 1.0)
    r = robust_lambda_quantile(s, INC, QM, "sup")
    assert r.exactness is UB
    vals = [lambda_quantile(m, INC, QM) for m in mc_feasible_moment(s, 500, 17)]
    assert max(vals) <= r.value + 1e-9
    assert np.isfinite(r.value)
