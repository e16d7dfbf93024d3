"""Extremal distribution functions of a Wasserstein ball around a baseline.

In one dimension the p-Wasserstein distance is the L^p distance between
quantile functions. The worst level l(a) solves

    int_a^1 (l - q_t)_+^p dt = eps^p

and the best level u(a) solves int_0^a (q_t - u)_+^p dt = eps^p. Both
integrals are evaluated on the x axis, where they become integrals of the
baseline cdf against p (l - y)^(p-1) and have no endpoint singularities:

    int_a^1 (l - q_t)_+^p dt = int_{-inf}^{l} p (l - y)^(p-1) (F(y) - a)_+ dy
    int_0^a (q_t - u)_+^p dt = int_{u}^{inf}  p (y - u)^(p-1) (a - F(y))_+ dy

For p = 1 these reduce to closed-form tail integrals of the baseline.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from rlq.curves import INF, InverseOfIncreasing, QuantileCurve
from rlq.distributions import Distribution
from rlq.errors import InvalidInputError, NumericalFailure

_QUAD_TOL = 1e-12
_ROOT_TOL = 1e-12


@dataclass(frozen=True)
class WassersteinBall:
    p: float
    baseline: Distribution
    eps: float

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p >= 1):
            raise InvalidInputError(f"Wasserstein order must be >= 1, got {self.p}")
        if not (math.isfinite(self.eps) and self.eps >= 0):
            raise InvalidInputError(f"radius must be finite and nonnegative, got {self.eps}")
        if not math.isfinite(self.baseline.central_moment(self.p)):
            raise InvalidInputError(f"baseline has no finite moment of order {self.p}")


def _check_level(alpha):
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise InvalidInputError(f"level must lie strictly inside (0, 1), got {alpha}")
    return alpha


def _quad(fn, a, b, kinks=()):
    """Adaptive quadrature split at interior kinks of the integrand."""
    cuts = [a] + sorted(k for k in kinks if math.isfinite(k) and a < k < b) + [b]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, _ = integrate.quad(fn, lo, hi, limit=400, epsabs=_QUAD_TOL, epsrel=1e-12)
        total += val
    return total


def worst_cost(ball, alpha, level):
    """int_alpha^1 (level - q_t)_+^p dt for the baseline quantile q."""
    g, p = ball.baseline, ball.p
    start = g.right_inverse(alpha)
    if level <= start:
        return 0.0
    if p == 1:
        if not math.isfinite(start):
            return g.cdf_integral(-INF, level)
        if alpha <= 0.5:
            return max(0.0, g.cdf_integral(start, level) - alpha * (level - start))
        return max(0.0, (1 - alpha) * (level - start) - g.survival_integral(start, level))

    def integrand(y):
        return p * (level - y) ** (p - 1) * max(float(g.cdf(y)) - alpha, 0.0)

    lo = start if math.isfinite(start) else -INF
    return max(0.0, _quad(integrand, lo, level, g.support))


def best_cost(ball, alpha, level):
    """int_0^alpha (q_t - level)_+^p dt for the baseline quantile q."""
    g, p = ball.baseline, ball.p
    stop = g.left_inverse(alpha)
    if level >= stop:
        return 0.0
    if p == 1:
        if not math.isfinite(stop):
            return g.survival_integral(level, INF)
        if alpha <= 0.5:
            return max(0.0, alpha * (stop - level) - g.cdf_integral(level, stop))
        return max(0.0, g.survival_integral(level, stop) - (1 - alpha) * (stop - level))

    def integrand(y):
        return p * (y - level) ** (p - 1) * max(alpha - float(g.cdf(y)), 0.0)

    hi = stop if math.isfinite(stop) else INF
    return max(0.0, _quad(integrand, level, hi, g.support))


def _expanding_root(fn, lo, step, direction):
    """Root of a monotone fn with fn(lo) < 0, stepping away from lo in ``direction``."""
    hi = lo + direction * step
    for _ in range(200):
        if fn(hi) >= 0:
            a, b = (lo, hi) if lo < hi else (hi, lo)
            try:
                return optimize.brentq(fn, a, b, xtol=_ROOT_TOL, rtol=1e-15, maxiter=500)
            except (ValueError, RuntimeError) as exc:
                raise NumericalFailure(f"root finding failed on [{a}, {b}]") from exc
        lo = hi
        step *= 2.0
        hi = lo + direction * step
    raise NumericalFailure("bracket expansion did not find a sign change")


def level_curve(ball, alpha, side="worst"):
    """l(alpha) (side='worst') or u(alpha) (side='best')."""
    alpha = _check_level(alpha)
    g, p, eps = ball.baseline, ball.p, ball.eps
    target = eps**p
    if side == "worst":
        start = float(g.left_inverse(alpha))
        if eps == 0:
            return start
        step = eps * (1 - alpha) ** (-1.0 / p) + 1.0
        return _expanding_root(lambda x: worst_cost(ball, alpha, x) - target, start, step, +1)
    if side == "best":
        start = float(g.right_inverse(alpha))
        if eps == 0:
            return start
        step = eps * alpha ** (-1.0 / p) + 1.0
        return _expanding_root(lambda x: best_cost(ball, alpha, x) - target, start, step, -1)
    raise InvalidInputError(f"side must be 'worst' or 'best', got {side!r}")


def _lower_value(ball, x):
    """inf over the ball of F(x): the level a with l(a) = x."""
    target = ball.eps**ball.p
    if worst_cost(ball, 0.0, x) <= target:
        return 0.0
    top = 1.0 - 1e-15
    fn = lambda a: worst_cost(ball, a, x) - target  # noqa: E731
    if fn(top) > 0:
        return top
    try:
        return optimize.brentq(fn, 0.0, top, xtol=1e-15, rtol=1e-15, maxiter=500)
    except (ValueError, RuntimeError) as exc:
        raise NumericalFailure(f"envelope inversion failed at x={x}") from exc


def _upper_value(ball, x):
    """sup over the ball of F(x): the level a with u(a) = x."""
    target = ball.eps**ball.p
    if best_cost(ball, 1.0, x) <= target:
        return 1.0
    bottom = 1e-15
    fn = lambda a: best_cost(ball, a, x) - target  # noqa: E731
    if fn(bottom) > 0:
        return 0.0
    try:
        return optimize.brentq(fn, bottom, 1.0, xtol=1e-15, rtol=1e-15, maxiter=500)
    except (ValueError, RuntimeError) as exc:
        raise NumericalFailure(f"envelope inversion failed at x={x}") from exc


def envelope(ball, side="lower"):
    """Continuous lower/upper cdf bound of the ball as an inverse of its level curve."""
    if ball.eps == 0:
        return ball.baseline
    g = ball.baseline
    if side == "lower":
        start = _lower_support_start(ball)
        return InverseOfIncreasing(
            lambda a: level_curve(ball, a, "worst"),
            lower=start,
            upper=INF,
            eval_fn=lambda x: _lower_value(ball, x),
            window=(float(g.left_inverse(1e-4)), level_curve(ball, 1 - 1e-4, "worst")),
        )
    if side == "upper":
        stop = _upper_support_stop(ball)
        return InverseOfIncreasing(
            lambda a: level_curve(ball, a, "best"),
            lower=-INF,
            upper=stop,
            eval_fn=lambda x: _upper_value(ball, x),
            window=(level_curve(ball, 1e-4, "best"), float(g.left_inverse(1 - 1e-4))),
        )
    raise InvalidInputError(f"side must be 'lower' or 'upper', got {side!r}")


def _lower_support_start(ball):
    # l(0+): the level x where the whole-distribution cost int_0^1 (x - q_t)_+^p dt hits eps^p
    g = ball.baseline
    target = ball.eps**ball.p
    start = min(g.support[0], float(g.left_inverse(1e-12)))
    if not math.isfinite(start):
        start = float(g.left_inverse(1e-12))
    return _expanding_root(lambda x: worst_cost(ball, 0.0, x) - target, start, ball.eps + 1.0, +1)


def _upper_support_stop(ball):
    g = ball.baseline
    target = ball.eps**ball.p
    stop = max(g.support[1], float(g.left_inverse(1 - 1e-12)))
    if not math.isfinite(stop):
        stop = float(g.left_inverse(1 - 1e-12))
    return _expanding_root(lambda x: best_cost(ball, 1.0, x) - target, stop, ball.eps + 1.0, -1)


def witness(ball, alpha, side="worst"):
    """A member of the ball attaining the envelope at the alpha-level point.

    Worst side: quantile max(q_t, l(alpha)) on (alpha, 1], baseline below.
    Best side: quantile min(q_t, u(alpha)) on [0, alpha), baseline above.
    """
    alpha = _check_level(alpha)
    g = ball.baseline
    if side == "worst":
        lv = level_curve(ball, alpha, "worst")

        def quantile(t):
            t = np.asarray(t, dtype=float)
            q = np.asarray(g.ppf(t), dtype=float)
            return np.where(t > alpha, np.maximum(q, lv), q)

    elif side == "best":
        lv = level_curve(ball, alpha, "best")

        def quantile(t):
            t = np.asarray(t, dtype=float)
            q = np.asarray(g.ppf(t), dtype=float)
            return np.where(t <= alpha, np.minimum(q, lv), q)

    else:
        raise InvalidInputError(f"side must be 'worst' or 'best', got {side!r}")
    lo, hi = g.window
    return QuantileCurve(quantile, window=(min(lo, lv) - 1.0, max(hi, lv) + 1.0))


def transport_cost(quantile_a, quantile_b, p, breakpoints=()):
    """(int_0^1 |qa(t) - qb(t)|^p dt)^(1/p) by adaptive quadrature in t."""
    fn = lambda t: abs(float(quantile_a(t)) - float(quantile_b(t))) ** p  # noqa: E731
    pts = sorted(b for b in breakpoints if 0 < b < 1)
    # full_output keeps quad quiet when the tight tolerance hits roundoff; the
    # error estimate is checked instead
    val, err, *_ = integrate.quad(fn, 0.0, 1.0, limit=400, points=pts or None, epsabs=1e-13, epsrel=1e-12,
                                  full_output=1)
    if not err <= 1e-8 * max(1.0, val):
        raise NumericalFailure(f"transport cost quadrature error {err:g} too large")
    return val ** (1.0 / p)
