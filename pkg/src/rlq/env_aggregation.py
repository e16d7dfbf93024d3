"""Clipped extremal distribution functions of a risk-aggregation set.

The set holds every law of X_1 + ... + X_n with fixed marginals and
unknown dependence. Above a clip level t (below it, for the upper side)
its lower cdf bound is 1 - H(x), where

    H(x) = inf over r with sum(r) < x of
           sum_i (1/d) * int_{r_i}^{r_i + d} (1 - F_i(y)) dy,   d = x - sum(r).

The infimum is computed numerically: a scalar search when all marginals
coincide (r_i = c), otherwise a multi-start bounded quasi-Newton search
with the analytic gradient.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from rlq.curves import INF, MonotoneCurve
from rlq.distributions import Distribution
from rlq.errors import InvalidInputError, NumericalFailure, PreconditionError

_GRID_POINTS = 257
_N_STARTS = 8
# cold starts kept alongside a usable warm start
_N_WARM_EXTRA = 2


@dataclass(frozen=True)
class AggregationSet:
    """Marginals with unknown dependence; ``t`` overrides the automatic clip level."""

    marginals: tuple
    t: float = None

    def __post_init__(self):
        margs = tuple(self.marginals)
        object.__setattr__(self, "marginals", margs)
        if not margs:
            raise InvalidInputError("an aggregation set needs at least one marginal")
        for i, m in enumerate(margs):
            if not isinstance(m, Distribution):
                raise InvalidInputError(f"marginal {i} is not a distribution")
            if not math.isfinite(m.mean):
                raise InvalidInputError(f"marginal {i} ({m!r}) has no finite mean")
        if self.t is not None and not (0.0 <= self.t <= 1.0):
            raise InvalidInputError(f"clip level must lie in [0, 1], got {self.t}")

    @property
    def n(self):
        return len(self.marginals)

    @property
    def identical(self):
        first = self.marginals[0]
        return all(m == first for m in self.marginals[1:])

    def clip_level(self, side="lower"):
        """Clip level certified by every marginal's density certificate.

        Raises PreconditionError naming the first marginal whose certificate
        does not cover the level or whose monotonicity direction disagrees.
        """
        certs = []
        for i, m in enumerate(self.marginals):
            cert = m.certificate
            if cert is None:
                raise PreconditionError(f"marginal {i} ({m!r}) carries no density-monotonicity certificate")
            certs.append(cert)
        if side == "lower":
            dirs = [c.beyond_dir for c in certs]
            auto = max(c.beyond for c in certs)
        elif side == "upper":
            dirs = [c.below_dir for c in certs]
            auto = min(c.below for c in certs)
        else:
            raise InvalidInputError(f"side must be 'lower' or 'upper', got {side!r}")
        kinds = {d for d in dirs if d != "constant"}
        if len(kinds) > 1:
            offender = next(i for i, d in enumerate(dirs) if d != dirs[0] and d != "constant")
            raise PreconditionError(
                f"marginal {offender} ({self.marginals[offender]!r}) has a {dirs[offender]} density "
                f"where others are {dirs[0]}; the class must be common to all marginals"
            )
        if self.t is None:
            return float(auto)
        t = float(self.t)
        for i, c in enumerate(certs):
            if side == "lower" and c.beyond > t:
                raise PreconditionError(
                    f"marginal {i} ({self.marginals[i]!r}) is certified monotone only beyond level {c.beyond} > t={t}"
                )
            if side == "upper" and c.below < t:
                raise PreconditionError(
                    f"marginal {i} ({self.marginals[i]!r}) is certified monotone only below level {c.below} < t={t}"
                )
        return t

    def reflected(self):
        return AggregationSet(tuple(m.reflect() for m in self.marginals), None if self.t is None else 1.0 - self.t)


class DualBound:
    """Evaluates H(x); keeps the minimizing shift vector of the last call."""

    def __init__(self, marginals, symmetric=None, n_starts=_N_STARTS):
        self.marginals = tuple(marginals)
        self.n = len(self.marginals)
        if symmetric is None:
            symmetric = all(m == self.marginals[0] for m in self.marginals[1:])
        self.symmetric = symmetric
        self.n_starts = n_starts
        lo = np.array([float(m.ppf(1e-6)) for m in self.marginals])
        hi = np.array([float(m.ppf(1 - 1e-6)) for m in self.marginals])
        self._q_lo = lo
        self._ranges = list(zip(lo.tolist(), hi.tolist()))
        self._span = float(np.max(hi - lo))
        self._d_floor = 1e-7 * max(self._span, 1.0)
        self.last_shifts = None
        self._last_x = None
        self._quants = None

    def __call__(self, x):
        return self.value(x)

    # ------------------------------------------------------------ objective

    def _objective_shifts(self, shifts, x):
        d = x - float(np.sum(shifts))
        if d <= 0:
            return INF
        total = 0.0
        for m, r in zip(self.marginals, shifts):
            total += m.survival_integral(r, r + d)
        return total / d

    def value(self, x, warm=True):
        x = float(x)
        if self.n == 1:
            self.last_shifts = np.array([x])
            return float(1.0 - self.marginals[0].left_limit(x))
        if self.symmetric:
            h, c = self._symmetric(x)
            self.last_shifts = np.full(self.n, c)
        else:
            h, shifts = self._general(x, warm=warm)
            self.last_shifts = shifts
        self._last_x = x
        return float(min(1.0, max(0.0, h)))

    def slope(self, x, h):
        """dH/dx at x from the minimizing shifts of the last call (envelope theorem):
        widen the window with the shifts held fixed."""
        if self.n == 1 or self.last_shifts is None:
            return math.nan
        d = float(x) - float(np.sum(self.last_shifts))
        if not d > self._d_floor:
            return math.nan
        tops = sum(1.0 - float(m.cdf(r + d)) for m, r in zip(self.marginals, self.last_shifts))
        return (tops - h) / d

    # ------------------------------------------------------------ identical marginals

    def _sym_values(self, cs, x):
        m, n = self.marginals[0], self.n
        cs = np.asarray(cs, dtype=float)
        d = x - n * cs
        top = x - (n - 1) * cs
        psi = m.survival_antiderivative
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = n * (np.asarray(psi(top)) - np.asarray(psi(cs))) / d
        limit = n * (1.0 - float(m.cdf(x / n)))
        # tiny windows lose every digit to cancellation; use the d -> 0 limit there
        return np.where(d > self._d_floor, vals, limit)

    def symmetric_objective(self, c, x):
        """n/(x - n c) * int_c^{x-(n-1)c} (1 - F); its infimum over c < x/n is H(x)."""
        return float(self._sym_values(np.array([c]), float(x))[0])

    def _symmetric(self, x):
        n = self.n
        top = x / n
        lo = min(float(self._q_lo[0]) - self._span, top - self._span)
        for _ in range(2):
            cs = np.linspace(lo, top, _GRID_POINTS)
            vals = self._sym_values(cs, x)
            j = int(np.argmin(vals))
            if j > 0:
                break
            lo -= self._span
        best_c, best = float(cs[j]), float(vals[j])
        a = cs[max(j - 1, 0)]
        b = cs[min(j + 1, _GRID_POINTS - 1)]
        if b > a:
            res = optimize.minimize_scalar(
                lambda c: float(self._sym_values(np.array([c]), x)[0]),
                bounds=(a, b),
                method="bounded",
                options={"xatol": 1e-12 * max(1.0, abs(a), abs(b))},
            )
            if res.fun < best:
                best_c, best = float(res.x), float(res.fun)
        return best, best_c

    # ------------------------------------------------------------ general marginals

    def _fun_grad(self, y, x):
        n = self.n
        a = np.empty(n)
        a[:-1] = y[:-1]
        d = y[-1]
        a[-1] = x - d - np.sum(y[:-1])
        total = 0.0
        s_lo = np.empty(n)
        s_hi = np.empty(n)
        for i, m in enumerate(self.marginals):
            total += float(m.survival_antiderivative(a[i] + d)) - float(m.survival_antiderivative(a[i]))
            s_lo[i] = 1.0 - float(m.cdf(a[i]))
            s_hi[i] = 1.0 - float(m.cdf(a[i] + d))
        phi = total / d
        grad = np.empty(n)
        last = s_hi[-1] - s_lo[-1]
        grad[:-1] = ((s_hi[:-1] - s_lo[:-1]) - last) / d
        grad[-1] = -phi / d + (np.sum(s_hi[:-1]) + s_lo[-1]) / d
        return phi, grad

    def _start_quantiles(self):
        if self._quants is None:
            betas = np.linspace(0.001, 0.999, 41)
            self._quants = np.column_stack([np.asarray(m.ppf(betas), dtype=float) for m in self.marginals])
        return self._quants

    def _objective_rows(self, a, d):
        total = np.zeros(d.size)
        for i, m in enumerate(self.marginals):
            psi = m.survival_antiderivative
            total += np.asarray(psi(a[:, i] + d), dtype=float) - np.asarray(psi(a[:, i]), dtype=float)
        return total / d

    def _objective(self, a, d):
        total = 0.0
        for ai, m in zip(a, self.marginals):
            total += float(m.survival_antiderivative(ai + d)) - float(m.survival_antiderivative(ai))
        return total / d

    def _starts(self, x, warm):
        """Warm start plus the best points of a quantile-aligned candidate family.

        Candidates put every window start at a common-level quantile, pulled
        down by a common offset, and spend the remaining budget on the width.
        """
        n = self.n
        d_min = 10 * self._d_floor
        starts = []
        if warm and self.last_shifts is not None and self._last_x is not None:
            prev = np.array(self.last_shifts, dtype=float)
            d_prev = self._last_x - float(np.sum(prev))
            d_new = d_prev + (x - self._last_x)
            if d_new > d_min:
                starts.append(np.concatenate((prev[:-1], [d_new])))
        quants = self._start_quantiles()
        room = max(abs(x - float(np.sum(quants[0]))), 1.0)
        fracs = np.array([0.0, 0.01, 0.05, 0.2, 0.5, 1.0])
        offs = np.repeat(fracs * room / n, quants.shape[0])
        qs = np.tile(quants, (fracs.size, 1))
        ds = x - qs.sum(axis=1) + n * offs
        keep_rows = ds > d_min
        qs, offs, ds = qs[keep_rows], offs[keep_rows], ds[keep_rows]
        cand = qs - offs[:, None]
        with np.errstate(all="ignore"):
            vals = self._objective_rows(cand, ds)
        scored = [(float(v), a, float(d)) for v, a, d in zip(vals, cand, ds) if np.isfinite(v)]
        scored.sort(key=lambda item: item[0])
        keep = _N_WARM_EXTRA if starts else self.n_starts
        for _, a, d in scored[:keep]:
            starts.append(np.concatenate((a[:-1], [d])))
        if not starts:
            a = quants[0] - (d_min + abs(x - float(np.sum(quants[0])))) / n
            starts.append(np.concatenate((a[:-1], [x - float(np.sum(a))])))
        return starts

    def _general(self, x, warm=True):
        n = self.n
        scale = max(self._span, 1.0)
        d_min = 10 * self._d_floor
        # a box keeps the search away from the flat region where every window
        # sits far outside its marginal's bulk
        box = [(lo - 4 * scale, hi + 4 * scale) for lo, hi in self._ranges]
        bounds = box[:-1] + [(d_min, abs(x) + 2 * n * 4 * scale + 4 * scale)]
        best_val, best_y = INF, None
        failures = 0
        for y0 in self._starts(x, warm):
            try:
                res = optimize.minimize(
                    self._fun_grad,
                    y0,
                    args=(x,),
                    jac=True,
                    method="L-BFGS-B",
                    bounds=bounds,
                    options={"ftol": 1e-15, "gtol": 1e-11, "maxiter": 1000},
                )
            except (ValueError, FloatingPointError):
                failures += 1
                continue
            if not np.isfinite(res.fun):
                failures += 1
                continue
            if res.fun < best_val:
                best_val, best_y = float(res.fun), np.array(res.x)
        if best_y is None:
            raise NumericalFailure(f"dual bound optimizer failed from every start at x={x}")
        shifts = np.empty(n)
        shifts[:-1] = best_y[:-1]
        shifts[-1] = x - best_y[-1] - np.sum(best_y[:-1])
        return best_val, shifts


def h_value(aset, x, symmetric=None):
    """H(x) for the marginals of ``aset`` (1 - H is the lower cdf bound above the clip level)."""
    marg = aset.marginals if isinstance(aset, AggregationSet) else tuple(aset)
    return DualBound(marg, symmetric=symmetric).value(x)


def _solve_level(bound, target, start, scale):
    """Smallest x with H(x) <= target for target in (0, 1); H is nonincreasing."""
    lo = start
    step = max(scale, 1.0) * 0.25
    for _ in range(200):
        if bound.value(lo) > target:
            break
        lo -= step
        step *= 2.0
    else:
        raise NumericalFailure("could not bracket the dual bound from below")
    hi = max(start, lo) + max(scale, 1.0) * 0.25
    step = max(scale, 1.0) * 0.25
    for _ in range(200):
        if bound.value(hi) <= target:
            break
        lo = hi
        hi += step
        step *= 2.0
    else:
        raise NumericalFailure("could not bracket the dual bound from above")
    return _newton_bisect(bound, target, lo, hi)


def _newton_bisect(bound, target, lo, hi, xtol=1e-12, ftol=1e-14):
    """Root of H(x) = target inside [lo, hi] where H(lo) > target >= H(hi).

    Newton steps use the envelope-theorem slope; a step that leaves the
    bracket, or does not shrink it fast enough, is replaced by bisection.
    """
    x = 0.5 * (lo + hi)
    last_step = hi - lo
    for _ in range(300):
        h = bound.value(x)
        gap = h - target
        if abs(gap) <= ftol:
            return x
        if gap > 0:
            lo = x
        else:
            hi = x
        if hi - lo <= xtol * max(1.0, abs(x)):
            return hi
        slope = bound.slope(x, h)
        nxt = x - gap / slope if math.isfinite(slope) and slope < 0 else math.nan
        if lo < nxt < hi and abs(nxt - x) < 0.5 * last_step:
            last_step = abs(nxt - x)
            x = nxt
        else:
            last_step = 0.5 * (hi - lo)
            x = lo + last_step
    raise NumericalFailure("dual bound inversion did not converge")


class ClippedLowerEnvelope(MonotoneCurve):
    """x -> max(t, 1 - H(x)); exact as a cdf bound above level t."""

    def __init__(self, aset, clip):
        self.aset = aset
        self.clip = float(clip)
        self.bound = DualBound(aset.marginals)
        margs = aset.marginals
        self._top = float(sum(m.support[1] for m in margs))
        self._scale = max(float(sum(m.ppf(1 - 1e-6) - m.ppf(1e-6) for m in margs)), 1.0)

    @property
    def window(self):
        margs = self.aset.marginals
        lo = sum(float(m.ppf(max(self.clip, 1e-6))) for m in margs)
        hi = self.level_point(1 - 1e-4)
        return (lo - 1.0, hi + 1.0)

    def eval(self, x):
        if np.ndim(x) == 0:
            return max(self.clip, 1.0 - self.bound.value(float(x)))
        flat = [max(self.clip, 1.0 - self.bound.value(float(v))) for v in np.ravel(x)]
        return np.array(flat).reshape(np.shape(x))

    def level_point(self, level):
        """The x where 1 - H crosses ``level`` in (0, 1); the worst-case left quantile."""
        if level >= 1:
            return self._top
        start = sum(float(m.ppf(level)) for m in self.aset.marginals)
        return _solve_level(self.bound, 1.0 - level, start, self._scale)

    def left_inverse(self, level):
        if level <= self.clip:
            return -INF
        if level > 1:
            return INF
        return self.level_point(level)

    def right_inverse(self, level):
        if level < self.clip:
            return -INF
        if level >= 1:
            return INF
        if level <= 0:
            return float(sum(m.support[0] for m in self.aset.marginals))
        return self.level_point(level)


class ClippedUpperEnvelope(MonotoneCurve):
    """x -> min(t, H_reflected(-x)); exact as a cdf bound below level t."""

    def __init__(self, aset, clip):
        self.aset = aset
        self.clip = float(clip)
        self.reflected = ClippedLowerEnvelope(
            AggregationSet(tuple(m.reflect() for m in aset.marginals)), 1.0 - self.clip
        )

    @property
    def window(self):
        lo, hi = self.reflected.window
        return (-hi, -lo)

    def _raw(self, x):
        return self.reflected.bound.value(-x)

    def eval(self, x):
        if np.ndim(x) == 0:
            return min(self.clip, self._raw(float(x)))
        flat = [min(self.clip, self._raw(float(v))) for v in np.ravel(x)]
        return np.array(flat).reshape(np.shape(x))

    def left_inverse(self, level):
        if level > self.clip:
            return INF
        if level <= 0:
            return -INF
        # H_R(-x) >= level  <=>  -x <= point where 1 - H_R crosses 1 - level
        if level >= 1:
            return -self.reflected.right_inverse(0.0)
        return -self.reflected.level_point(1.0 - level)

    def right_inverse(self, level):
        if level >= self.clip:
            return INF
        if level < 0:
            return -INF
        if level == 0:
            return float(sum(m.support[0] for m in self.aset.marginals))
        return -self.reflected.level_point(1.0 - level)


def envelope(aset, side="lower"):
    """Clipped lower or upper cdf bound; the clip level is in ``.clip``."""
    if side == "lower":
        return ClippedLowerEnvelope(aset, aset.clip_level("lower"))
    if side == "upper":
        return ClippedUpperEnvelope(aset, aset.clip_level("upper"))
    raise InvalidInputError(f"side must be 'lower' or 'upper', got {side!r}")
