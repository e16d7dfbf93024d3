"""Random instances shared by the property tests."""

import mpmath
import numpy as np
from scipy import integrate, optimize

from rlq.distributions import Discrete, Normal
from rlq.lambda_core import StepLambda

# atoms and breakpoints live on a coarse lattice so that ties between them,
# and between levels and cumulative weights, occur often
LATTICE = np.arange(-8, 9) / 2.0
LEVELS = np.array([0.0, 0.1, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75, 0.8, 0.9, 1.0])


def random_discrete(rng, max_atoms=6):
    k = int(rng.integers(1, max_atoms + 1))
    pts = rng.choice(LATTICE, size=k)
    if rng.uniform() < 0.5:
        w = rng.choice([1, 2, 3, 4], size=k).astype(float)
    else:
        w = rng.dirichlet(np.ones(k))
    return Discrete(pts, w / w.sum())


def random_lambda(rng, shape="any", max_breaks=4):
    k = int(rng.integers(0, max_breaks + 1))
    breaks = np.sort(rng.choice(LATTICE, size=k, replace=False))
    if rng.uniform() < 0.6:
        levels = rng.choice(LEVELS, size=k + 1)
    else:
        levels = rng.uniform(0, 1, size=k + 1)
    if shape == "decreasing":
        levels = np.sort(levels)[::-1]
    elif shape == "increasing":
        levels = np.sort(levels)
    return StepLambda(tuple(breaks), tuple(levels))


# ---------------------------------------------------------------- wasserstein oracles


def transcendental_root(level, eps):
    # exp(1) baseline, p = 1: the cost equation collapses to (1-a) l + e^-l = eps + (1-a)(1 + ln(1/(1-a)))
    mpmath.mp.dps = 30
    a = mpmath.mpf(level)
    rhs = eps + (1 - a) * (1 + mpmath.log(1 / (1 - a)))
    return float(mpmath.findroot(lambda x: (1 - a) * x + mpmath.exp(-x) - rhs, 5))


def normal_best_quantile_domain(level, eps):
    # int_0^a (q_t - u)_+ dt = eps with q_t from a 30-digit inverse
    mpmath.mp.dps = 30
    a = mpmath.mpf(level)
    q = lambda t: 1 + mpmath.sqrt(2) * mpmath.erfinv(2 * t - 1)  # noqa: E731

    def cost(u):
        cut = mpmath.ncdf(u, 1, 1)
        if cut >= a:
            return -eps
        return mpmath.quad(lambda t: q(t) - u, [cut, a]) - eps

    return float(mpmath.findroot(cost, (0.0, 1.5), solver="anderson"))


def normal_best_x_domain(level, eps):
    # same cost as int_u^{q_a} (a - F(y)) dy, integrated in x with scipy
    d = Normal(1, 1)
    qa = float(d.ppf(level))

    def cost(u):
        val, _ = integrate.quad(lambda y: level - float(d.cdf(y)), u, qa, epsabs=1e-13)
        return val - eps

    return optimize.brentq(cost, qa - 10, qa, xtol=1e-14)
