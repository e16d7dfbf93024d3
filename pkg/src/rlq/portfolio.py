"""Worst-case Lambda-quantile portfolio selection on the simplex.

Each problem maps a weight vector w to a univariate uncertainty set for
the portfolio loss w'X; the robust value of that set is the objective.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from rlq.distributions import Distribution, PointMass, StudentT
from rlq.env_aggregation import AggregationSet
from rlq.env_moment import MomentSet
from rlq.env_wasserstein import WassersteinBall
from rlq.errors import InvalidInputError
from rlq.lambda_core import QuantileKind, StepLambda
from rlq.robust_engine import FiniteSet, extremal_curve, robust_lambda_quantile

_SUM_TOL = 1e-12


def check_weights(w):
    """Validated weight vector as a float array (nonnegative, summing to one)."""
    w = np.asarray(w, dtype=float).ravel()
    if w.size == 0 or not np.all(np.isfinite(w)):
        raise InvalidInputError("weights must be a nonempty finite vector")
    if np.any(w < 0):
        raise InvalidInputError(f"weights must be nonnegative, got {w.tolist()}")
    if abs(w.sum() - 1.0) > _SUM_TOL * max(1, w.size):
        raise InvalidInputError(f"weights must sum to 1, got sum {w.sum()!r}")
    return w


def project_to_simplex(v):
    """Euclidean projection onto {w >= 0, sum w = 1} (sort-and-threshold)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    w = np.maximum(v - css[rho] / (rho + 1), 0.0)
    return w / w.sum()


def _check_objective(lam, kind):
    kind = kind if isinstance(kind, QuantileKind) else QuantileKind.parse(kind)
    if not isinstance(lam, StepLambda):
        raise InvalidInputError("level function must be a StepLambda")
    ok = kind is QuantileKind.QTILDEMINUS or (kind is QuantileKind.QTILDEPLUS and lam.is_nonincreasing)
    if not ok:
        raise InvalidInputError(
            "portfolio objectives use qtildeminus, or qtildeplus with a nonincreasing level function"
        )
    return kind


def _check_cov(mu, cov):
    mu = np.asarray(mu, dtype=float).ravel()
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (mu.size, mu.size):
        raise InvalidInputError(f"covariance shape {cov.shape} does not match {mu.size} assets")
    if not np.allclose(cov, cov.T, atol=1e-12):
        raise InvalidInputError("covariance matrix must be symmetric")
    if np.linalg.eigvalsh(cov).min() < -1e-10:
        raise InvalidInputError("covariance matrix must be positive semidefinite")
    return mu, cov


def _scale(cov, w):
    return math.sqrt(max(float(w @ cov @ w), 0.0))


def dual_norm(w, a):
    """||w||_b with b = a / (a - 1); a = 1 gives the max norm."""
    if a < 1:
        raise InvalidInputError(f"norm index a must be >= 1, got {a}")
    if a == 1:
        return float(np.max(np.abs(w)))
    if math.isinf(a):
        return float(np.sum(np.abs(w)))
    return float(np.linalg.norm(w, ord=a / (a - 1)))


@dataclass(frozen=True)
class MomentPortfolio:
    """Mean vector and covariance known; losses otherwise arbitrary."""

    mu: np.ndarray
    cov: np.ndarray
    lam: StepLambda
    kind: QuantileKind = QuantileKind.QTILDEMINUS

    def __post_init__(self):
        mu, cov = _check_cov(self.mu, self.cov)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "kind", _check_objective(self.lam, self.kind))

    @property
    def n(self):
        return self.mu.size

    def project(self, w):
        w = check_weights(w)
        m, s = float(w @ self.mu), _scale(self.cov, w)
        if s == 0:
            return FiniteSet((PointMass(m),))
        return MomentSet(2.0, m, s)


@dataclass(frozen=True)
class WassersteinPortfolio:
    """Ball around a multivariate Student-t benchmark; the ball is taken in the
    asset space with ground norm l_a, which projects to radius eps*||w||_b."""

    mu: np.ndarray
    cov: np.ndarray
    lam: StepLambda
    kind: QuantileKind = QuantileKind.QTILDEMINUS
    dof: float = 3.0
    a: float = 2.0
    p: float = 1.0
    eps: float = 0.1

    def __post_init__(self):
        mu, cov = _check_cov(self.mu, self.cov)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "kind", _check_objective(self.lam, self.kind))
        if not self.dof > self.p:
            raise InvalidInputError("benchmark needs dof > p for a finite p-th moment")
        if self.eps < 0:
            raise InvalidInputError("radius must be nonnegative")

    @property
    def n(self):
        return self.mu.size

    def baseline(self, w):
        w = check_weights(w)
        m, s = float(w @ self.mu), _scale(self.cov, w)
        return PointMass(m) if s == 0 else StudentT(self.dof, m, s)

    def radius(self, w):
        return self.eps * dual_norm(check_weights(w), self.a)

    def project(self, w):
        return WassersteinBall(self.p, self.baseline(w), self.radius(w))


@dataclass(frozen=True)
class AggregationPortfolio:
    """Every asset has the marginal law ``marginal``; dependence unknown."""

    marginal: Distribution
    n: int
    lam: StepLambda
    kind: QuantileKind = QuantileKind.QTILDEMINUS
    t: float = None

    def __post_init__(self):
        if int(self.n) < 1:
            raise InvalidInputError("need at least one asset")
        object.__setattr__(self, "kind", _check_objective(self.lam, self.kind))

    def project(self, w):
        w = check_weights(w)
        if w.size != self.n:
            raise InvalidInputError(f"expected {self.n} weights, got {w.size}")
        margs = tuple(self.marginal.scaled(float(wi)) for wi in w if wi > 0)
        return AggregationSet(margs, self.t)


def project(problem, w):
    return problem.project(w)


def worst_value(problem, w):
    """Worst-case objective at w (a RobustResult)."""
    return robust_lambda_quantile(problem.project(w), problem.lam, problem.kind, "sup")


@dataclass
class OptimizationResult:
    weights: np.ndarray
    result: object
    profile: list = field(default_factory=list)

    @property
    def value(self):
        return self.result.value


def _value(problem, w):
    return worst_value(problem, w).value


def simplex_lattice(n, resolution):
    """All weight vectors with coordinates in {0, 1/k, ..., 1}."""
    k = int(resolution)
    pts = []
    for cuts in itertools.combinations(range(k + n - 1), n - 1):
        edges = (-1,) + cuts + (k + n - 1,)
        pts.append([edges[i + 1] - edges[i] - 1 for i in range(n)])
    return np.asarray(pts, dtype=float) / k


def profile_two_assets(problem, grid=1001):
    """(w1, RobustResult) pairs on a uniform grid of w1 in [0, 1]."""
    rows = []
    for w1 in np.linspace(0.0, 1.0, int(grid)):
        rows.append((float(w1), worst_value(problem, np.array([w1, 1.0 - w1]))))
    return rows


def optimize_weights(problem, grid=None, seed=0):
    """Minimize the worst-case value over the simplex.

    Two assets: uniform scan of w1 then a bounded scalar refinement on the
    best cell. More assets: lattice scan then projected downhill simplex
    from the best few lattice points.
    """
    n = problem.n
    if n < 2:
        raise InvalidInputError("optimization needs at least two assets")
    if n == 2:
        grid = 1001 if grid is None else int(grid)
        rows = profile_two_assets(problem, grid)
        vals = np.array([r.value for _, r in rows])
        k = int(np.argmin(vals))
        best_w1, best_val = rows[k][0], vals[k]
        lo, hi = rows[max(k - 1, 0)][0], rows[min(k + 1, len(rows) - 1)][0]
        if hi > lo:
            fn = lambda x: _value(problem, np.array([x, 1.0 - x]))  # noqa: E731
            res = optimize.minimize_scalar(fn, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
            if res.fun < best_val:
                best_w1, best_val = float(res.x), float(res.fun)
        w = np.array([best_w1, 1.0 - best_w1])
        return OptimizationResult(w, worst_value(problem, w), rows)

    resolution = 10 if grid is None else int(grid)
    lattice = simplex_lattice(n, resolution)
    rows = [(w, worst_value(problem, w)) for w in lattice]
    vals = np.array([r.value for _, r in rows])
    order = np.argsort(vals, kind="stable")
    best_w, best_val = lattice[order[0]], vals[order[0]]
    fn = lambda v: _value(problem, project_to_simplex(v))  # noqa: E731
    for idx in order[: min(4, len(order))]:
        res = optimize.minimize(fn, lattice[idx], method="Nelder-Mead",
                                options={"xatol": 1e-6, "fatol": 1e-9, "maxiter": 400 * n})
        if res.fun < best_val:
            best_w, best_val = project_to_simplex(res.x), float(res.fun)
    return OptimizationResult(best_w, worst_value(problem, best_w), rows)


def majorization_compare(gamma, w, tol=1e-12):
    """Compare two weight vectors in the majorization order.

    'more_diversified' means gamma is majorized by w (gamma = A w for a
    doubly stochastic A), 'less_diversified' the reverse, 'equivalent'
    both (gamma is a permutation of w).
    """
    g = np.sort(check_weights(gamma))[::-1]
    v = np.sort(check_weights(w))[::-1]
    if g.size != v.size:
        raise InvalidInputError("weight vectors must have equal length")
    cg, cv = np.cumsum(g), np.cumsum(v)
    g_below = bool(np.all(cg <= cv + tol))
    v_below = bool(np.all(cv <= cg + tol))
    if g_below and v_below:
        return "equivalent"
    if g_below:
        return "more_diversified"
    if v_below:
        return "less_diversified"
    return "incomparable"


def active_level(problem, w, result=None, tol=1e-9):
    """Index of the level whose envelope quantile produced the worst value at w,
    or -1 when the value sits on a breakpoint of the level function."""
    result = worst_value(problem, w) if result is None else result
    uset = problem.project(w)
    curve = extremal_curve(uset, "lower")
    for k, (lo, hi, lv) in enumerate(problem.lam.intervals()):
        q = curve.left_inverse(lv)
        if lo <= result.value <= hi and abs(q - result.value) <= tol * max(1.0, abs(q)):
            return k
    return -1
