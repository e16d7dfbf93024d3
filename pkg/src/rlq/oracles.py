"""Brute-force checks that share no code path with the envelope machinery.

* a definitional grid scan for Lambda-quantiles,
* random feasible members of moment sets and Wasserstein balls,
* a rearrangement lower bound for the worst quantile of a sum,
* random dependence structures for aggregation sets.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from rlq import _kernels
from rlq.curves import INF, QuantileCurve
from rlq.distributions import Discrete
from rlq.env_wasserstein import transport_cost
from rlq.errors import InvalidInputError
from rlq.lambda_core import QuantileKind


class WindowWarning(UserWarning):
    """A grid answer sits on the edge of the scanned window."""


@dataclass(frozen=True)
class OracleConfig:
    seed: int = 20240611
    grid_step: float = 1e-3
    samples: int = 1000
    tol: float = 1e-6


def _grid(grid):
    if isinstance(grid, tuple) and len(grid) == 3:
        lo, hi, step = grid
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return lo + step * np.arange(n)
    xs = np.asarray(grid, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise InvalidInputError("grid must be an increasing 1-d array or (lo, hi, step)")
    return xs


def grid_lambda_quantile(curve, lam, kind, grid):
    """Lambda-quantile read straight off the definition on a finite grid."""
    kind = kind if isinstance(kind, QuantileKind) else QuantileKind.parse(kind)
    xs = _grid(grid)
    gap = np.asarray(curve(xs), dtype=float) - np.asarray(lam(xs), dtype=float)
    first_ge, first_gt, last_lt, last_le = _kernels.level_crossings(gap, 0.0)
    idx = {
        QuantileKind.QMINUS: first_ge,
        QuantileKind.QPLUS: first_gt,
        QuantileKind.QTILDEMINUS: last_lt,
        QuantileKind.QTILDEPLUS: last_le,
    }[kind]
    if idx < 0:
        return INF if not kind.is_tilde else -INF
    edge = 0 if not kind.is_tilde else xs.size - 1
    if idx == edge:
        warnings.warn(f"{kind.value} hit the edge of the grid at {xs[idx]}", WindowWarning, stacklevel=2)
    return float(xs[idx])


# ---------------------------------------------------------------- moment sets


def mc_feasible_moment(mset, n, seed):
    """Random finite laws with mean m and p-th central moment at most v**p.

    Atoms are recentred on m and then dilated about m, which fixes the mean
    and scales the central moment to a random fraction of the budget (the
    budget itself for one sample in eight).
    """
    out = []
    for i in range(int(n)):
        rng = np.random.default_rng(seed + i)
        k = int(rng.integers(2, 9))
        pts = rng.standard_normal(k) * rng.uniform(0.2, 3.0)
        if rng.uniform() < 0.3:
            pts = rng.standard_exponential(k) ** rng.uniform(0.5, 2.5)
        wts = rng.dirichlet(np.full(k, rng.uniform(0.3, 3.0)))
        pts = pts - wts @ pts
        spread = float(wts @ np.abs(pts) ** mset.p)
        if spread == 0:
            pts = np.array([-1.0, 1.0])
            wts = np.array([0.5, 0.5])
            spread = 1.0
        frac = 1.0 if i % 8 == 0 else rng.uniform(0.05, 1.0)
        pts = pts * (frac * mset.v**mset.p / spread) ** (1.0 / mset.p) * (1 - 1e-12)
        dist = Discrete(mset.m + pts, wts)
        _assert_moment_feasible(dist, mset)
        out.append(dist)
    return out


def _assert_moment_feasible(dist, mset):
    pts, wts = np.asarray(dist.points), np.asarray(dist.weights)
    mean = float(wts @ pts)
    if abs(mean - mset.m) > 1e-12 * max(1.0, abs(mset.m)):
        raise AssertionError(f"sampler produced mean {mean} != {mset.m}")
    if float(wts @ np.abs(pts - mset.m) ** mset.p) > mset.v**mset.p * (1 + 1e-12):
        raise AssertionError("sampler produced an infeasible central moment")


# ---------------------------------------------------------------- Wasserstein balls


def _perturbation(rng, base):
    """A nondecreasing quantile function built from the baseline's."""
    q = base.ppf
    lo, hi = float(q(0.05)), float(q(0.95))
    width = max(hi - lo, 1e-3)
    pick = int(rng.integers(5))
    if pick == 0:
        c = rng.normal() * width
        return lambda t: q(t) + c, ()
    if pick == 1:
        c = rng.uniform(lo, hi + width)
        return lambda t: np.maximum(q(t), c), ()
    if pick == 2:
        c = rng.uniform(lo - width, hi)
        return lambda t: np.minimum(q(t), c), ()
    if pick == 3:
        k = rng.uniform(0.5, 1.5)
        mid = float(q(0.5))
        return lambda t: mid + k * (q(t) - mid), ()
    cut = rng.uniform(0.5, 0.99)
    jump = rng.uniform(0.0, 2.0) * width
    return lambda t: q(t) + jump * (np.asarray(t) > cut), (cut,)


def mc_feasible_wasserstein(ball, n, seed):
    """Random members of the ball as quantile-defined curves.

    A perturbed quantile r of the baseline q is pulled back along the
    segment q + s (r - q), whose transport cost is s times that of r, so
    the cost lands on a random fraction of the radius.
    """
    g, p, eps = ball.baseline, ball.p, ball.eps
    out = []
    for i in range(int(n)):
        rng = np.random.default_rng(seed + i)
        pert, kinks = _perturbation(rng, g)
        cost = transport_cost(g.ppf, pert, p, kinks)
        frac = 1.0 if i % 8 == 0 else rng.uniform(0.05, 1.0)
        s = 1.0 if cost == 0 else min(1.0, frac * eps / cost) * (1 - 1e-9)
        member = _Blend(g.ppf, pert, s)
        # the blend moves every quantile by s times the perturbation
        final = s * cost
        if final > eps + 1e-9:
            raise AssertionError(f"sampler produced cost {final} > {eps}")
        lo, hi = g.window
        out.append(QuantileCurve(member, window=(lo - 10 * (eps + 1), hi + 10 * (eps + 1))))
    return out


class _Blend:
    def __init__(self, base, other, s):
        self.base, self.other, self.s = base, other, s

    def __call__(self, t):
        b = np.asarray(self.base(t), dtype=float)
        with np.errstate(invalid="ignore"):
            out = b + self.s * (np.asarray(self.other(t), dtype=float) - b)
        # at t = 1 both quantiles may be infinite
        return np.where(np.isnan(out), b, out)


# ---------------------------------------------------------------- aggregation


@dataclass(frozen=True)
class RearrangementResult:
    value: float
    sweeps: int
    converged: bool
    comonotone: float


def _lower_points(dist, alpha, m):
    levels = alpha + (1 - alpha) * np.arange(m) / m
    pts = np.asarray(dist.ppf(np.maximum(levels, 1e-300)), dtype=float)
    if not np.isfinite(pts[0]):
        pts[0] = float(dist.ppf(alpha + (1 - alpha) * 1e-9 / m))
    return pts


def ra_bruteforce(marginals, alpha, m=10_000, iterations=1000, seed=0):
    """Rearrangement lower bound on the worst left alpha-quantile of a sum.

    Each marginal's upper (1 - alpha) tail is cut into m cells represented by
    their lower endpoints; columns are shuffled then rearranged until every
    column is oppositely ordered to the sum of the others.
    """
    if m < 100:
        raise InvalidInputError("rearrangement needs at least 100 cells")
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise InvalidInputError("level must lie strictly inside (0, 1)")
    rng = np.random.default_rng(seed)
    cols = []
    for d in marginals:
        pts = _lower_points(d, alpha, m)
        cols.append(rng.permutation(pts))
    matrix = np.column_stack(cols)
    comonotone = float(sum(float(d.ppf(alpha)) for d in marginals))
    if matrix.shape[1] == 1:
        return RearrangementResult(float(matrix.min()), 0, True, comonotone)
    arranged, sweeps, converged = _kernels.rearrange(matrix, max_sweeps=iterations)
    if not converged:
        warnings.warn(f"rearrangement stopped after {sweeps} sweeps without settling", RuntimeWarning, stacklevel=2)
    value = max(float(arranged.sum(axis=1).min()), comonotone)
    return RearrangementResult(value, int(sweeps), bool(converged), comonotone)


def random_aggregation_members(marginals, n, seed, cells=400):
    """Discrete laws of sums under random permutation dependence.

    Every marginal is replaced by the lower endpoints of ``cells``
    equiprobable cells; the resulting sum is dominated in the usual
    stochastic order by a genuine member of the aggregation set, so its
    Lambda-quantiles cannot exceed the worst case.
    """
    base = []
    for d in marginals:
        lv = np.arange(cells) / cells
        pts = np.asarray(d.ppf(np.maximum(lv, 1e-12)), dtype=float)
        base.append(pts)
    out = []
    for i in range(int(n)):
        rng = np.random.default_rng(seed + i)
        mode = i % 4
        cols = []
        for j, pts in enumerate(base):
            if mode == 0 or j == 0:
                cols.append(pts)
            elif mode == 1:
                cols.append(pts[::-1] if j % 2 else pts)
            else:
                cols.append(rng.permutation(pts))
        matrix = np.column_stack(cols)
        if mode == 3 and matrix.shape[1] > 1:
            tail = int(cells * rng.uniform(0.5, 0.98))
            head = matrix[tail:].copy()
            matrix[tail:] = _kernels.rearrange(head, max_sweeps=200)[0]
        sums = matrix.sum(axis=1)
        out.append(Discrete(sums, np.full(cells, 1.0 / cells)))
    return out
