import itertools
import math

import numpy as np
import pytest

import properties
from rlq.distributions import Exponential, Pareto, StudentT, Uniform
from rlq.env_aggregation import AggregationSet
from rlq.env_moment import MomentSet
from rlq.env_wasserstein import WassersteinBall
from rlq.errors import InvalidInputError
from rlq.lambda_core import QuantileKind, StepLambda, lambda_quantile
from rlq.portfolio import (
    AggregationPortfolio,
    MomentPortfolio,
    WassersteinPortfolio,
    active_level,
    check_weights,
    dual_norm,
    majorization_compare,
    optimize_weights,
    profile_two_assets,
    project,
    project_to_simplex,
    simplex_lattice,
    worst_value,
)
from rlq.robust_engine import Exactness, FiniteSet

MU = [0.5, 1.0]
COV_POS = [[1.0, 0.5], [0.5, 1.0]]
COV_NEG = [[1.0, -0.5], [-0.5, 1.0]]
INC = StepLambda.two_level(0.8, 0.95, 3.0)
DEC = StepLambda.two_level(0.95, 0.8, 6.0)


# ---------------------------------------------------------------- weights


def test_check_weights():
    assert check_weights([0.25, 0.75]).tolist() == [0.25, 0.75]
    for bad in ([0.5, 0.6], [-0.1, 1.1], [], [np.nan, 1.0]):
        with pytest.raises(InvalidInputError):
            check_weights(bad)


def test_project_to_simplex():
    rng = np.random.default_rng(3)
    for _ in range(200):
        v = rng.normal(size=int(rng.integers(2, 6))) * 2
        w = project_to_simplex(v)
        assert np.all(w >= 0) and w.sum() == pytest.approx(1.0, abs=1e-12)
        # optimality: no simplex vertex is closer to v along the projection gap
        for k in range(v.size):
            e = np.zeros(v.size)
            e[k] = 1.0
            assert (v - w) @ (e - w) <= 1e-10
    assert project_to_simplex([0.2, 0.8]).tolist() == pytest.approx([0.2, 0.8])
    assert project_to_simplex([5.0, 0.0]).tolist() == [1.0, 0.0]


def test_simplex_lattice():
    pts = simplex_lattice(3, 4)
    assert len(pts) == math.comb(6, 2)
    assert np.allclose(pts.sum(axis=1), 1.0)
    assert {tuple(p) for p in pts} >= {(1.0, 0.0, 0.0), (0.0, 0.0, 1.0), (0.25, 0.5, 0.25)}


def test_dual_norm():
    w = np.array([0.5, 0.5])
    assert dual_norm(w, 2.0) == pytest.approx(math.sqrt(0.5))
    assert dual_norm(w, 1.0) == 0.5
    assert dual_norm(np.array([0.2, 0.3, 0.5]), math.inf) == pytest.approx(1.0)
    with pytest.raises(InvalidInputError):
        dual_norm(w, 0.5)


# ---------------------------------------------------------------- projection


def test_moment_projection_selects_coordinate():
    prob = MomentPortfolio(MU, COV_POS, INC)
    s = project(prob, [1.0, 0.0])
    assert isinstance(s, MomentSet) and (s.p, s.m, s.v) == (2.0, 0.5, 1.0)
    s = project(prob, [0.5, 0.5])
    assert s.m == 0.75 and s.v == pytest.approx(math.sqrt(0.75))


def test_moment_projection_degenerate_scale():
    prob = MomentPortfolio(MU, [[1.0, -1.0], [-1.0, 1.0]], INC)
    s = project(prob, [0.5, 0.5])
    assert isinstance(s, FiniteSet)
    assert worst_value(prob, [0.5, 0.5]).value == 0.75


def test_wasserstein_projection_radius():
    prob = WassersteinPortfolio(MU, COV_POS, INC, a=2.0, eps=0.1)
    s = project(prob, [0.5, 0.5])
    assert isinstance(s, WassersteinBall)
    assert s.eps == pytest.approx(0.070711, abs=1e-6)
    assert s.baseline == StudentT(3.0, 0.75, math.sqrt(0.75))
    assert prob.radius([1.0, 0.0]) == pytest.approx(0.1)
    assert WassersteinPortfolio(MU, COV_POS, INC, a=1.0).radius([0.3, 0.7]) == pytest.approx(0.07)


def test_aggregation_projection_drops_zero_weight():
    prob = AggregationPortfolio(Exponential(1.0), 3, INC)
    s = project(prob, [0.0, 0.25, 0.75])
    assert isinstance(s, AggregationSet) and s.n == 2
    assert s.marginals == (Exponential(4.0), Exponential(4.0 / 3))
    with pytest.raises(InvalidInputError):
        project(prob, [0.5, 0.5])


@pytest.mark.parametrize("cov", [[[1.0, 2.0], [2.0, 1.0]], [[1.0, 0.5], [0.4, 1.0]], [[1.0]]])
def test_bad_covariance(cov):
    with pytest.raises(InvalidInputError):
        MomentPortfolio(MU, cov, INC)


def test_objective_restrictions():
    with pytest.raises(InvalidInputError):
        MomentPortfolio(MU, COV_POS, INC, QuantileKind.QMINUS)
    with pytest.raises(InvalidInputError):
        MomentPortfolio(MU, COV_POS, INC, QuantileKind.QTILDEPLUS)
    MomentPortfolio(MU, COV_POS, DEC, QuantileKind.QTILDEPLUS)
    with pytest.raises(InvalidInputError):
        WassersteinPortfolio(MU, COV_POS, INC, dof=1.0, p=1.0)


# ---------------------------------------------------------------- worst values


def test_constant_level_moment_closed_form():
    rng = np.random.default_rng(0)
    for alpha in (0.8, 0.9, 0.95):
        prob = MomentPortfolio(MU, COV_NEG, StepLambda.constant(alpha))
        for w1 in rng.uniform(size=20):
            w = np.array([w1, 1 - w1])
            r = worst_value(prob, w)
            expected = w @ np.array(MU) + math.sqrt(w @ np.array(COV_NEG) @ w) * math.sqrt(alpha / (1 - alpha))
            assert r.value == pytest.approx(expected, rel=1e-10)
            assert r.exactness is Exactness.EXACT


def test_wasserstein_zero_radius_is_baseline():
    prob = WassersteinPortfolio(MU, COV_POS, INC, eps=0.0)
    for w in ([0.3, 0.7], [1.0, 0.0]):
        base = prob.baseline(w)
        assert worst_value(prob, w).value == pytest.approx(lambda_quantile(base, INC, "qtildeminus"), abs=1e-12)


def test_aggregation_uniform_pair():
    prob = AggregationPortfolio(Uniform(0.0, 1.0), 2, StepLambda.constant(0.95))
    assert worst_value(prob, [0.5, 0.5]).value == pytest.approx(0.975, abs=1e-6)
    assert worst_value(prob, [1.0, 0.0]).value == pytest.approx(0.95, abs=1e-9)


def test_radius_monotone():
    for w in ([0.5, 0.5], [0.2, 0.8], [1.0, 0.0]):
        prev = -math.inf
        for eps in (0.0, 0.05, 0.1, 0.3, 1.0):
            v = worst_value(WassersteinPortfolio(MU, COV_POS, INC, eps=eps), w).value
            assert v >= prev - 1e-10
            prev = v


def test_scale_consistency_constant_level():
    lam = StepLambda.constant(0.9)
    w = np.array([0.3, 0.7])
    base = worst_value(MomentPortfolio(MU, COV_POS, lam), w).value
    for c in (0.5, 2.0, 10.0):
        scaled = MomentPortfolio(np.array(MU) * c, np.array(COV_POS) * c * c, lam)
        assert worst_value(scaled, w).value == pytest.approx(c * base, rel=1e-12)


# ---------------------------------------------------------------- optimization


def test_profile_symmetric_for_identical_assets():
    prob = MomentPortfolio([1.0, 1.0], [[2.0, 0.0], [0.0, 2.0]], INC)
    rows = profile_two_assets(prob, 101)
    vals = np.array([r.value for _, r in rows])
    assert np.allclose(vals, vals[::-1], atol=1e-12)
    res = optimize_weights(prob, grid=101)
    assert res.weights[0] == pytest.approx(0.5, abs=1e-5)


def test_negative_correlation_hedges():
    for lam in (INC, DEC, StepLambda.constant(0.9)):
        pos = optimize_weights(MomentPortfolio(MU, COV_POS, lam), grid=201)
        neg = optimize_weights(MomentPortfolio(MU, COV_NEG, lam), grid=201)
        assert neg.value <= pos.value + 1e-12


def test_optimum_beats_profile():
    prob = WassersteinPortfolio(MU, COV_NEG, StepLambda.two_level(0.8, 0.95, 6.0))
    res = optimize_weights(prob, grid=51)
    assert res.value <= min(r.value for _, r in res.profile) + 1e-12
    assert len(res.profile) == 51
    assert res.result.exactness is Exactness.EXACT


def test_three_asset_moment_optimum():
    mu = [1.0, 1.2, 0.8]
    cov = np.diag([1.0, 1.5, 0.7])
    prob = MomentPortfolio(mu, cov, StepLambda.constant(0.9))
    res = optimize_weights(prob, grid=6)
    assert check_weights(res.weights) is not None
    lattice_best = min(r.value for _, r in res.profile)
    assert res.value <= lattice_best + 1e-12
    # the closed form m + 3 s is smooth; a local perturbation cannot improve on it
    for k in range(3):
        for j in range(3):
            if j == k:
                continue
            w = res.weights.copy()
            shift = min(1e-3, w[k])
            w[k] -= shift
            w[j] += shift
            assert worst_value(prob, w).value >= res.value - 1e-6


def test_aggregation_identical_marginals_vertex():
    lam = StepLambda.constant(0.9)
    prob = AggregationPortfolio(Exponential(1.0), 2, lam)
    rows = profile_two_assets(prob, 6)
    vals = np.array([r.value for _, r in rows])
    assert vals[0] == pytest.approx(-math.log(0.1), abs=1e-9)
    assert np.argmin(vals) in (0, len(vals) - 1)
    assert np.all(vals[1:-1] > vals[0])
    prob = AggregationPortfolio(Exponential(1.0), 3, lam)
    lattice = simplex_lattice(3, 2)
    vals = [worst_value(prob, w).value for w in lattice]
    assert lattice[int(np.argmin(vals))].max() == 1.0


def test_aggregation_unequal_uniforms():
    # counter-monotone tails of a U and b U (a <= b) give a + b alpha
    prob = AggregationPortfolio(Uniform(0.0, 1.0), 2, StepLambda.constant(0.9))
    for w1 in (0.1, 0.3):
        assert worst_value(prob, [w1, 1 - w1]).value == pytest.approx(w1 + (1 - w1) * 0.9, abs=1e-6)


def test_active_level_tracks_regime():
    prob = MomentPortfolio(MU, COV_NEG, INC)
    # near the balanced portfolio the 0.95-level quantile stays below the break
    assert active_level(prob, [0.5, 0.5]) == 0
    assert active_level(prob, [1.0, 0.0]) == 1


def test_optimize_needs_two_assets():
    with pytest.raises(InvalidInputError):
        optimize_weights(MomentPortfolio([1.0], [[1.0]], INC))


# ---------------------------------------------------------------- majorization


def test_majorization_examples():
    assert majorization_compare([0.5, 0.5], [0.7, 0.3]) == "more_diversified"
    assert majorization_compare([0.7, 0.3], [1.0, 0.0]) == "more_diversified"
    assert majorization_compare([1.0, 0.0], [0.5, 0.5]) == "less_diversified"
    assert majorization_compare([0.6, 0.3, 0.1], [0.5, 0.45, 0.05]) == "incomparable"
    assert majorization_compare([0.2, 0.3, 0.5], [0.5, 0.2, 0.3]) == "equivalent"
    with pytest.raises(InvalidInputError):
        majorization_compare([0.5, 0.5], [0.2, 0.3, 0.5])


def _doubly_stochastic(rng, n):
    perms = list(itertools.permutations(range(n)))
    mix = rng.dirichlet(np.ones(len(perms)))
    return sum(c * np.eye(n)[list(p)] for c, p in zip(mix, perms))


def test_majorization_matches_doubly_stochastic_definition():
    rng = np.random.default_rng(8)
    for _ in range(300):
        n = int(rng.integers(2, 5))
        w = rng.dirichlet(np.ones(n))
        gamma = _doubly_stochastic(rng, n) @ w
        gamma = gamma / gamma.sum()
        assert majorization_compare(gamma, w, tol=1e-10) in ("more_diversified", "equivalent")
        # transitivity along a second mixing step
        delta = _doubly_stochastic(rng, n) @ gamma
        delta = delta / delta.sum()
        assert majorization_compare(delta, w, tol=1e-10) in ("more_diversified", "equivalent")


@pytest.mark.parametrize("marginal", [Exponential(1.0), Pareto(3.0, 1.0)], ids=["exp", "pareto"])
def test_diversification_penalty(marginal):
    assert properties.diversification(marginal, StepLambda.two_level(0.9, 0.97, 4.0), pairs=100) == 100
