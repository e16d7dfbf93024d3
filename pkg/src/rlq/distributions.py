"""Parametric and empirical distribution functions.

Each family is a nondecreasing curve (its cdf) that also knows its
quantiles, tail integrals and a certificate about where its density is
monotone. Tail integrals are differences of closed-form antiderivatives:

    survival antiderivative  psi(y) with psi' = 1 - F
    cdf antiderivative       phi(y) with phi' = F

normalised so that psi(+inf) is finite exactly when the mean is finite and
phi(-inf) is finite exactly when the lower tail is integrable.
"""

import functools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate, special

from rlq import _kernels
from rlq.curves import INF, MonotoneCurve, _scalar_or_array
from rlq.errors import DivergenceError, InvalidInputError

_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class DensityCertificate:
    """Where a density is known to be monotone.

    The density is monotone in direction ``beyond_dir`` on the part of the
    support above the ``beyond`` quantile, and in direction ``below_dir``
    below the ``below`` quantile. Directions are 'decreasing', 'increasing'
    or 'constant'.
    """

    beyond: float
    beyond_dir: str
    below: float
    below_dir: str

    def reflected(self):
        flip = {"decreasing": "increasing", "increasing": "decreasing", "constant": "constant"}
        return DensityCertificate(1.0 - self.below, flip[self.below_dir], 1.0 - self.beyond, flip[self.beyond_dir])


class Distribution(MonotoneCurve):
    """A probability distribution on the real line, seen through its cdf."""

    has_atoms = False

    def cdf(self, x):
        raise NotImplementedError

    def eval(self, x):
        return self.cdf(x)

    def ppf(self, u):
        """Left quantile inf{x : F(x) >= u} for u in (0, 1]."""
        raise NotImplementedError

    def ppf_right(self, u):
        """Right quantile inf{x : F(x) > u} for u in [0, 1)."""
        return self.ppf(u)

    @property
    def support(self):
        return (-INF, INF)

    @property
    def window(self):
        return (float(self.ppf(1e-6)), float(self.ppf(1 - 1e-6)))

    def left_inverse(self, level):
        if level <= 0:
            return -INF
        if level > 1:
            return INF
        if level == 1:
            return float(self.support[1])
        return float(self.ppf(level))

    def right_inverse(self, level):
        if level < 0:
            return -INF
        if level >= 1:
            return INF
        if level == 0:
            return float(self.support[0])
        return float(self.ppf_right(level))

    def reaches(self, x, level):
        if self.has_atoms:
            return bool(self.cdf(float(x)) >= level)
        return bool(x >= self.left_inverse(level))

    def exceeds(self, x, level):
        if self.has_atoms:
            return bool(self.cdf(float(x)) > level)
        if level < 0:
            return True
        if level >= 1:
            return False
        if level == 0:
            return bool(x > self.support[0])
        return bool(x > self.right_inverse(level))

    # tail integrals -------------------------------------------------------

    def _psi(self, y):
        raise NotImplementedError

    def _phi(self, y):
        raise NotImplementedError

    def survival_integral(self, a, b):
        """Integral of 1 - F over [a, b]."""
        a, b = float(a), float(b)
        if a > b:
            raise InvalidInputError(f"survival integral needs a <= b, got [{a}, {b}]")
        if a == b:
            return 0.0
        if a == -INF:
            raise DivergenceError("survival integral diverges at -inf")
        top = self._psi(b)
        if not math.isfinite(top):
            raise DivergenceError("survival integral diverges at +inf (infinite mean)")
        return max(0.0, float(top - self._psi(a)))

    def cdf_integral(self, a, b):
        """Integral of F over [a, b]."""
        a, b = float(a), float(b)
        if a > b:
            raise InvalidInputError(f"cdf integral needs a <= b, got [{a}, {b}]")
        if a == b:
            return 0.0
        if b == INF:
            raise DivergenceError("cdf integral diverges at +inf")
        bottom = self._phi(a)
        if not math.isfinite(bottom):
            raise DivergenceError("cdf integral diverges at -inf")
        return max(0.0, float(self._phi(b) - bottom))

    def survival_antiderivative(self, y):
        """Vectorised psi; only differences of it are meaningful."""
        return self._psi(y)

    # moments and transforms ------------------------------------------------

    @property
    def mean(self):
        top = self._psi(INF)
        if not math.isfinite(top):
            return INF
        # psi(+inf) - psi(y) + y is constant and equals the mean once y is below the support
        lo = self.support[0]
        if math.isfinite(lo):
            return float(lo + top - self._psi(lo))
        y = float(self.ppf(1e-12)) - 1.0
        return float(y + top - self._psi(y) - self._phi(y))

    def central_moment(self, p):
        """E|X - mean|^p by quadrature over the quantile function."""
        mu = self.mean
        if not math.isfinite(mu):
            return INF
        val, _ = integrate.quad(lambda u: abs(float(self.ppf(u)) - mu) ** p, 0.0, 1.0, limit=200)
        return float(val)

    def reflect(self):
        return Reflected(self)

    def scaled(self, c):
        raise NotImplementedError

    @property
    def certificate(self):
        return None

    def sample(self, rng, size):
        return np.asarray(self.ppf(rng.uniform(size=size)), dtype=float)


def _ensure_positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise InvalidInputError(f"{name} must be positive and finite, got {value}")


# ---------------------------------------------------------------- normal


def _std_normal_ppf(u):
    z = special.ndtri(u)
    # one Newton step; skipped deep in the tails where it only adds noise
    with np.errstate(all="ignore"):
        dens = np.exp(-0.5 * z * z) / _SQRT2PI
        step = (special.ndtr(z) - u) / dens
    return np.where(np.abs(z) < 5.0, z - step, z)


@dataclass(frozen=True, eq=True)
class Normal(Distribution):
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        _ensure_positive("sigma", self.sigma)

    def cdf(self, x):
        return _scalar_or_array(x, special.ndtr((np.asarray(x, dtype=float) - self.mu) / self.sigma))

    def ppf(self, u):
        return _scalar_or_array(u, self.mu + self.sigma * _std_normal_ppf(np.asarray(u, dtype=float)))

    def _psi(self, y):
        z = (np.asarray(y, dtype=float) - self.mu) / self.sigma
        with np.errstate(invalid="ignore"):
            g = z * special.ndtr(-z) - np.exp(-0.5 * z * z) / _SQRT2PI
        g = np.where(z == INF, 0.0, np.where(z == -INF, -INF, g))
        return _scalar_or_array(y, self.sigma * g)

    def _phi(self, y):
        z = (np.asarray(y, dtype=float) - self.mu) / self.sigma
        with np.errstate(invalid="ignore"):
            k = z * special.ndtr(z) + np.exp(-0.5 * z * z) / _SQRT2PI
        k = np.where(z == -INF, 0.0, np.where(z == INF, INF, k))
        return _scalar_or_array(y, self.sigma * k)

    @property
    def mean(self):
        return self.mu

    def central_moment(self, p):
        return self.sigma**p * 2 ** (p / 2) * math.gamma((p + 1) / 2) / math.sqrt(math.pi)

    def reflect(self):
        return Normal(-self.mu, self.sigma)

    def scaled(self, c):
        _ensure_positive("scale", c)
        return Normal(c * self.mu, c * self.sigma)

    @property
    def certificate(self):
        return DensityCertificate(0.5, "decreasing", 0.5, "increasing")


# ---------------------------------------------------------------- exponential


@dataclass(frozen=True, eq=True)
class Exponential(Distribution):
    rate: float = 1.0

    def __post_init__(self):
        _ensure_positive("rate", self.rate)

    @property
    def support(self):
        return (0.0, INF)

    def cdf(self, x):
        if isinstance(x, float):
            return -math.expm1(-self.rate * x) if x > 0 else 0.0
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0))

    def ppf(self, u):
        with np.errstate(divide="ignore"):
            return _scalar_or_array(u, -np.log1p(-np.asarray(u, dtype=float)) / self.rate)

    def _psi(self, y):
        if isinstance(y, float):
            return -math.expm1(-self.rate * y) / self.rate if y > 0 else y
        y = np.asarray(y, dtype=float)
        pos = -np.expm1(-self.rate * np.maximum(y, 0.0)) / self.rate
        return _scalar_or_array(y, np.where(y > 0, pos, y))

    def _phi(self, y):
        y = np.asarray(y, dtype=float)
        ypos = np.maximum(y, 0.0)
        with np.errstate(invalid="ignore"):
            pos = ypos + np.expm1(-self.rate * ypos) / self.rate
        pos = np.where(ypos == INF, INF, pos)
        return _scalar_or_array(y, np.where(y > 0, pos, 0.0))

    @property
    def mean(self):
        return 1.0 / self.rate

    def central_moment(self, p):
        # E|X - 1|^p for rate one, rescaled
        inner, _ = integrate.quad(lambda s: s**p * math.exp(s), 0.0, 1.0)
        return (math.exp(-1.0) * (inner + math.gamma(p + 1))) / self.rate**p

    def scaled(self, c):
        _ensure_positive("scale", c)
        return Exponential(self.rate / c)

    @property
    def certificate(self):
        return DensityCertificate(0.0, "decreasing", 1.0, "decreasing")


# ---------------------------------------------------------------- uniform


@dataclass(frozen=True, eq=True)
class Uniform(Distribution):
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.low) and math.isfinite(self.high) and self.low < self.high):
            raise InvalidInputError(f"uniform needs finite low < high, got {self.low}, {self.high}")

    @property
    def support(self):
        return (self.low, self.high)

    @property
    def window(self):
        return (self.low, self.high)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, np.clip((x - self.low) / (self.high - self.low), 0.0, 1.0))

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return _scalar_or_array(u, self.low + u * (self.high - self.low))

    def _psi(self, y):
        y = np.asarray(y, dtype=float)
        w = self.high - self.low
        inner = np.clip(y, self.low, self.high) - self.low
        return _scalar_or_array(y, np.minimum(y, self.low) + inner - inner**2 / (2 * w))

    def _phi(self, y):
        y = np.asarray(y, dtype=float)
        w = self.high - self.low
        inner = np.clip(y, self.low, self.high) - self.low
        with np.errstate(invalid="ignore"):
            above = np.where(y > self.high, y - self.high, 0.0)
        return _scalar_or_array(y, inner**2 / (2 * w) + above)

    @property
    def mean(self):
        return 0.5 * (self.low + self.high)

    def central_moment(self, p):
        half = 0.5 * (self.high - self.low)
        return half**p / (p + 1)

    def reflect(self):
        return Uniform(-self.high, -self.low)

    def scaled(self, c):
        _ensure_positive("scale", c)
        return Uniform(c * self.low, c * self.high)

    @property
    def certificate(self):
        return DensityCertificate(0.0, "constant", 1.0, "constant")


# ---------------------------------------------------------------- pareto


@dataclass(frozen=True, eq=True)
class Pareto(Distribution):
    shape: float = 2.0
    scale: float = 1.0

    def __post_init__(self):
        _ensure_positive("shape", self.shape)
        _ensure_positive("scale", self.scale)

    @property
    def support(self):
        return (self.scale, INF)

    def cdf(self, x):
        if isinstance(x, float) and math.isfinite(x):
            return 1.0 - (self.scale / x) ** self.shape if x > self.scale else 0.0
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = (self.scale / np.maximum(x, self.scale)) ** self.shape
        return _scalar_or_array(x, np.where(x > self.scale, 1.0 - tail, 0.0))

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return _scalar_or_array(u, self.scale * (1.0 - u) ** (-1.0 / self.shape))

    def _psi(self, y):
        s, a = self.scale, self.shape
        if isinstance(y, float) and math.isfinite(y):
            if y <= s:
                return y
            if a == 1.0:
                return s + s * math.log(y / s)
            return s + s**a * (y ** (1 - a) - s ** (1 - a)) / (1 - a)
        y = np.asarray(y, dtype=float)
        yy = np.maximum(y, s)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if a == 1.0:
                tail = s * np.log(yy / s)
            else:
                tail = s**a * (yy ** (1 - a) - s ** (1 - a)) / (1 - a)
        return _scalar_or_array(y, np.where(y > s, s + tail, y))

    def _phi(self, y):
        y = np.asarray(y, dtype=float)
        s = self.scale
        with np.errstate(invalid="ignore"):
            val = (y - s) - (np.asarray(self._psi(y)) - s)
        val = np.where(y == INF, INF, val)
        return _scalar_or_array(y, np.where(y > s, val, 0.0))

    def central_moment(self, p):
        if p >= self.shape:
            return INF
        return super().central_moment(p)

    def scaled(self, c):
        _ensure_positive("scale", c)
        return Pareto(self.shape, c * self.scale)

    @property
    def certificate(self):
        return DensityCertificate(0.0, "decreasing", 1.0, "decreasing")


# ---------------------------------------------------------------- student t


@dataclass(frozen=True, eq=True)
class StudentT(Distribution):
    dof: float = 3.0
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        _ensure_positive("degrees of freedom", self.dof)
        _ensure_positive("scale", self.scale)

    @functools.cached_property
    def _log_norm(self):
        nu = self.dof
        return float(special.gammaln((nu + 1) / 2) - special.gammaln(nu / 2) - 0.5 * math.log(nu * math.pi))

    def _pdf_std(self, z):
        nu = self.dof
        return np.exp(self._log_norm - (nu + 1) / 2 * np.log1p(z * z / nu))

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return _scalar_or_array(x, special.stdtr(self.dof, z))

    def _ppf_scalar(self, u):
        if u <= 0:
            return -INF
        if u >= 1:
            return INF
        nu = self.dof
        z = float(special.stdtrit(nu, u))
        dens = math.exp(self._log_norm - (nu + 1) / 2 * math.log1p(z * z / nu))
        if dens > 1e-8:
            z -= (float(special.stdtr(nu, z)) - u) / dens
        return self.loc + self.scale * z

    def ppf(self, u):
        if np.ndim(u) == 0 and not math.isnan(u):
            return self._ppf_scalar(float(u))
        u = np.asarray(u, dtype=float)
        z = special.stdtrit(self.dof, u)
        # one Newton step on the cdf; only where the density is not negligible
        with np.errstate(all="ignore"):
            dens = self._pdf_std(z)
            step = (special.stdtr(self.dof, z) - u) / dens
        z = np.where(np.isfinite(step) & (dens > 1e-8), z - step, z)
        z = np.where(u >= 1, INF, np.where(u <= 0, -INF, z))
        return _scalar_or_array(u, self.loc + self.scale * z)

    def _antiderivative(self, y, upper_tail):
        nu = self.dof
        if nu <= 1:
            return None
        z = (np.asarray(y, dtype=float) - self.loc) / self.scale
        with np.errstate(invalid="ignore", over="ignore"):
            dens_term = (nu + z * z) / (nu - 1) * self._pdf_std(z)
            if upper_tail:
                g = z * special.stdtr(nu, -z) - dens_term
                g = np.where(z == INF, 0.0, np.where(z == -INF, -INF, g))
            else:
                g = z * special.stdtr(nu, z) + dens_term
                g = np.where(z == -INF, 0.0, np.where(z == INF, INF, g))
        return _scalar_or_array(y, self.scale * g)

    def _psi(self, y):
        out = self._antiderivative(y, True)
        if out is None:
            raise DivergenceError("student t with dof <= 1 has no finite mean")
        return out

    def _phi(self, y):
        out = self._antiderivative(y, False)
        if out is None:
            raise DivergenceError("student t with dof <= 1 has no finite mean")
        return out

    def survival_integral(self, a, b):
        if self.dof <= 1:
            a, b = float(a), float(b)
            if not (math.isfinite(a) and math.isfinite(b)):
                raise DivergenceError("student t with dof <= 1 has no finite mean")
            val, _ = integrate.quad(lambda y: 1.0 - self.cdf(y), a, b, limit=200)
            return float(val)
        return super().survival_integral(a, b)

    def cdf_integral(self, a, b):
        if self.dof <= 1:
            a, b = float(a), float(b)
            if not (math.isfinite(a) and math.isfinite(b)):
                raise DivergenceError("student t with dof <= 1 has no finite mean")
            val, _ = integrate.quad(self.cdf, a, b, limit=200)
            return float(val)
        return super().cdf_integral(a, b)

    @property
    def mean(self):
        return self.loc if self.dof > 1 else INF

    def central_moment(self, p):
        nu = self.dof
        if p >= nu:
            return INF
        val = (
            self.scale**p
            * nu ** (p / 2)
            * math.exp(special.gammaln((p + 1) / 2) + special.gammaln((nu - p) / 2) - special.gammaln(nu / 2))
            / math.sqrt(math.pi)
        )
        return float(val)

    def reflect(self):
        return StudentT(self.dof, -self.loc, self.scale)

    def scaled(self, c):
        _ensure_positive("scale", c)
        return StudentT(self.dof, c * self.loc, c * self.scale)

    @property
    def certificate(self):
        return DensityCertificate(0.5, "decreasing", 0.5, "increasing")


# ---------------------------------------------------------------- atoms


class Discrete(Distribution):
    """Finitely many atoms with nonnegative weights summing to one."""

    has_atoms = True

    def __init__(self, points, weights=None):
        pts = np.asarray(points, dtype=float).ravel()
        if pts.size == 0:
            raise InvalidInputError("a discrete distribution needs at least one atom")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("atoms must be finite")
        if weights is None:
            w = np.full(pts.size, 1.0 / pts.size)
        else:
            w = np.asarray(weights, dtype=float).ravel()
            if w.shape != pts.shape or np.any(w < 0) or not np.all(np.isfinite(w)):
                raise InvalidInputError("weights must be finite, nonnegative and match the atoms")
            total = w.sum()
            if not abs(total - 1.0) <= 1e-9:
                raise InvalidInputError(f"weights must sum to one, got {total}")
            if abs(total - 1.0) > 1e-12:
                w = w / total
        order = np.argsort(pts, kind="mergesort")
        pts, w = pts[order], w[order]
        uniq, inv = np.unique(pts, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inv, w)
        keep = merged > 0
        self.points = uniq[keep]
        self.weights = merged[keep]
        self.cumulative = np.cumsum(self.weights)
        self.cumulative[-1] = 1.0
        self._first_moment = np.concatenate(([0.0], np.cumsum(self.weights * self.points)))

    def __repr__(self):
        return f"Discrete(n_atoms={self.points.size})"

    def __eq__(self, other):
        return (
            isinstance(other, Discrete)
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        return hash((self.points.tobytes(), self.weights.tobytes()))

    @property
    def support(self):
        return (float(self.points[0]), float(self.points[-1]))

    @property
    def window(self):
        lo, hi = self.support
        pad = max(1.0, hi - lo) * 0.05
        return (lo - pad, hi + pad)

    def cdf(self, x):
        return _scalar_or_array(x, _kernels.step_cdf(self.points, self.cumulative, np.asarray(x, dtype=float)))

    def left_limit(self, x):
        idx = np.searchsorted(self.points, np.asarray(x, dtype=float), side="left")
        padded = np.concatenate(([0.0], self.cumulative))
        return _scalar_or_array(x, padded[idx])

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        idx = np.searchsorted(self.cumulative, u, side="left")
        idx = np.clip(idx, 0, self.points.size - 1)
        return _scalar_or_array(u, self.points[idx])

    def ppf_right(self, u):
        u = np.asarray(u, dtype=float)
        idx = np.searchsorted(self.cumulative, u, side="right")
        idx = np.clip(idx, 0, self.points.size - 1)
        return _scalar_or_array(u, self.points[idx])

    def left_inverse(self, level):
        if level <= 0:
            return -INF
        if level > 1:
            return INF
        return float(self.ppf(level))

    def right_inverse(self, level):
        if level < 0:
            return -INF
        if level >= 1:
            return INF
        return float(self.ppf_right(level))

    def _psi(self, y):
        # sum of w_i * min(y, x_i)
        y = np.asarray(y, dtype=float)
        k = np.searchsorted(self.points, y, side="right")
        below = self._first_moment[k]
        above_mass = 1.0 - np.concatenate(([0.0], self.cumulative))[k]
        with np.errstate(invalid="ignore"):
            val = below + np.where(above_mass > 0, y * above_mass, 0.0)
        return _scalar_or_array(y, val)

    def _phi(self, y):
        # sum of w_i * max(y - x_i, 0)
        y = np.asarray(y, dtype=float)
        k = np.searchsorted(self.points, y, side="right")
        mass = np.concatenate(([0.0], self.cumulative))[k]
        with np.errstate(invalid="ignore"):
            val = np.where(mass > 0, y * mass, 0.0) - self._first_moment[k]
        return _scalar_or_array(y, val)

    @property
    def mean(self):
        return float(self._first_moment[-1])

    def central_moment(self, p):
        return float(np.sum(self.weights * np.abs(self.points - self.mean) ** p))

    def reflect(self):
        return Discrete(-self.points, self.weights)

    def scaled(self, c):
        _ensure_positive("scale", c)
        return Discrete(c * self.points, self.weights)

    def affine(self, slope, intercept):
        if slope == 0:
            return PointMass(intercept)
        return Discrete(slope * self.points + intercept, self.weights)

    def sample(self, rng, size):
        return rng.choice(self.points, size=size, p=self.weights)


class PointMass(Discrete):
    def __init__(self, value):
        super().__init__([value], [1.0])
        self.value = float(value)

    def __repr__(self):
        return f"PointMass({self.value})"

    @property
    def window(self):
        return (self.value - 1.0, self.value + 1.0)


class Empirical(Discrete):
    """Equally weighted sample."""

    def __init__(self, samples):
        super().__init__(np.asarray(samples, dtype=float), None)
        self.n_samples = int(np.asarray(samples).size)

    def __repr__(self):
        return f"Empirical(n={self.n_samples})"

    @classmethod
    def from_file(cls, path):
        values = []
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise InvalidInputError(f"{path}:{lineno}: not a number: {line!r}") from exc
        if not values:
            raise InvalidInputError(f"{path}: no samples")
        if not all(math.isfinite(v) for v in values):
            raise InvalidInputError(f"{path}: non-finite sample")
        return cls(values)


# ---------------------------------------------------------------- reflection


class Reflected(Distribution):
    """Law of -X; cdf is 1 - F(-x-)."""

    def __init__(self, base):
        self.base = base
        self.has_atoms = base.has_atoms

    def __repr__(self):
        return f"Reflected({self.base!r})"

    def __eq__(self, other):
        return isinstance(other, Reflected) and self.base == other.base

    def __hash__(self):
        return hash(("reflected", self.base))

    @property
    def support(self):
        lo, hi = self.base.support
        return (-hi, -lo)

    @property
    def window(self):
        lo, hi = self.base.window
        return (-hi, -lo)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, 1.0 - np.asarray(self.base.left_limit(-x)))

    def left_limit(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(x, 1.0 - np.asarray(self.base.cdf(-x)))

    def ppf(self, u):
        return _scalar_or_array(u, -np.asarray(self.base.ppf_right(1.0 - np.asarray(u, dtype=float))))

    def ppf_right(self, u):
        return _scalar_or_array(u, -np.asarray(self.base.ppf(1.0 - np.asarray(u, dtype=float))))

    def left_inverse(self, level):
        if level <= 0:
            return -INF
        if level > 1:
            return INF
        return -self.base.right_inverse(1.0 - level)

    def right_inverse(self, level):
        if level < 0:
            return -INF
        if level >= 1:
            return INF
        return -self.base.left_inverse(1.0 - level)

    def _psi(self, y):
        return _scalar_or_array(y, -np.asarray(self.base._phi(-np.asarray(y, dtype=float))))

    def _phi(self, y):
        return _scalar_or_array(y, -np.asarray(self.base._psi(-np.asarray(y, dtype=float))))

    @property
    def mean(self):
        return -self.base.mean

    def central_moment(self, p):
        return self.base.central_moment(p)

    def reflect(self):
        return self.base

    def scaled(self, c):
        return Reflected(self.base.scaled(c))

    @property
    def certificate(self):
        cert = self.base.certificate
        return None if cert is None else cert.reflected()

    def sample(self, rng, size):
        return -self.base.sample(rng, size)


def reflect(dist):
    """Law of -X."""
    return dist.reflect()


def survival_integral(dist, a, b):
    """Integral of 1 - F over [a, b]; raises DivergenceError when it is infinite."""
    return dist.survival_integral(a, b)


def cdf_integral(dist, a, b):
    """Integral of F over [a, b]; raises DivergenceError when it is infinite."""
    return dist.cdf_integral(a, b)


# ---------------------------------------------------------------- parsing


def _numbers(text, count, name):
    try:
        vals = [float(v) for v in text.split(",")] if text else []
    except ValueError as exc:
        raise InvalidInputError(f"{name}: parameters must be numbers, got {text!r}") from exc
    if len(vals) not in count:
        raise InvalidInputError(f"{name}: expected {' or '.join(map(str, count))} parameters, got {len(vals)}")
    return vals


def parse_distribution(text):
    """Parse a descriptor such as ``norm:1,1``, ``exp:1``, ``unif:0,1``,
    ``t:3,0,1``, ``pareto:3,1``, ``point:0`` or ``emp:path/to/samples.txt``."""
    text = text.strip()
    family, _, params = text.partition(":")
    family = family.strip().lower()
    params = params.strip()
    if family in ("norm", "normal"):
        mu, sigma = _numbers(params, (2,), "norm")
        return Normal(mu, sigma)
    if family in ("exp", "expon"):
        (rate,) = _numbers(params, (1,), "exp")
        return Exponential(rate)
    if family in ("unif", "uniform"):
        lo, hi = _numbers(params, (2,), "unif")
        return Uniform(lo, hi)
    if family in ("t", "student"):
        vals = _numbers(params, (1, 3), "t")
        return StudentT(*vals)
    if family == "pareto":
        shape, scale = _numbers(params, (2,), "pareto")
        return Pareto(shape, scale)
    if family in ("point", "dirac"):
        (c,) = _numbers(params, (1,), "point")
        if not math.isfinite(c):
            raise InvalidInputError("point mass location must be finite")
        return PointMass(c)
    if family in ("emp", "empirical"):
        if not params:
            raise InvalidInputError("emp: needs a file path")
        try:
            return Empirical.from_file(params)
        except OSError as exc:
            raise InvalidInputError(f"emp: cannot read {params!r}: {exc}") from exc
    raise InvalidInputError(f"unknown distribution family {family!r} in {text!r}")
