"""Distribution families for positive size data and their log-space images.

Size-space families describe the raw sizes x > 0; each one maps through
``to_log_space`` to the law of y = ln(x).  Densities are evaluated through
``log_pdf`` first (stable deep in the tails) and exponentiated for ``pdf``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy.special import log_ndtr, logsumexp, ndtr, ndtri

from .errors import SupportError
from .sample import Sample

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def _prepare(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(values: np.ndarray, scalar: bool):
    return values[()] if scalar else values


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _check_positive(arr: np.ndarray, what: str):
    if np.any(arr <= 0.0):
        raise SupportError(f"{what} requires x > 0")


def _check_at_least(arr: np.ndarray, bound: float, what: str):
    if np.any(arr < bound):
        raise SupportError(f"{what} requires x >= {bound}")


def _bisect_quantile(cdf, lo: np.ndarray, hi: np.ndarray, q: np.ndarray, max_iter: int = 200):
    """Monotone-CDF bisection, vectorized over q.  Brackets must satisfy
    cdf(lo) <= q <= cdf(hi)."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        below = cdf(mid) < q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 1e-13 * np.maximum(1.0, np.abs(mid))):
            break
    return 0.5 * (lo + hi)


def _validate_q(q: np.ndarray):
    if np.any(q <= 0.0) or np.any(q >= 1.0):
        raise SupportError("quantile level q must lie strictly inside (0, 1)")


# ---------------------------------------------------------------------------
# size-space families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StretchedExponential:
    """Stretched-exponential size law with shape gamma and scale eta.

    Density (gamma/eta) * (x/eta)**(gamma-1) * exp(-(x/eta)**gamma) on x > 0.
    Fits constrain gamma to (0, 1); evaluation tolerates any gamma > 0 so the
    gamma = 1 exponential boundary can be probed.
    """

    gamma: float
    eta: float

    space: ClassVar[str] = "size"
    family_name: ClassVar[str] = "stexp"

    def __post_init__(self):
        if not (self.gamma > 0.0 and np.isfinite(self.gamma)):
            raise ValueError("gamma must be positive and finite")
        if not (self.eta > 0.0 and np.isfinite(self.eta)):
            raise ValueError("eta must be positive and finite")

    @property
    def support(self):
        return (0.0, np.inf)

    def log_pdf(self, x):
        arr, scalar = _prepare(x)
        _check_positive(arr, "stretched-exponential density")
        t = self.gamma * (np.log(arr) - np.log(self.eta))
        return _ret(np.log(self.gamma) - np.log(arr) + t - np.exp(t), scalar)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def cdf(self, x):
        arr, scalar = _prepare(x)
        out = np.zeros_like(arr)
        pos = arr > 0.0
        t = self.gamma * (np.log(arr[pos]) - np.log(self.eta))
        out[pos] = -np.expm1(-np.exp(t))
        return _ret(out, scalar)

    def quantile(self, q):
        arr, scalar = _prepare(q)
        _validate_q(arr)
        return _ret(self.eta * (-np.log1p(-arr)) ** (1.0 / self.gamma), scalar)

    def sample(self, n: int, seed=None) -> Sample:
        u = _rng(seed).random(n)
        return Sample.from_values(self.quantile(np.clip(u, 1e-16, 1.0 - 1e-16)))

    def to_log_space(self) -> "ExpStretchedExponential":
        return ExpStretchedExponential(self.gamma, self.eta)

    def free_parameters(self) -> np.ndarray:
        return np.array([self.gamma, self.eta])

    def with_parameters(self, theta) -> "StretchedExponential":
        return StretchedExponential(float(theta[0]), float(theta[1]))


@dataclass(frozen=True)
class Lognormal:
    """Lognormal size law: ln(x) ~ N(mu, sigma**2)."""

    mu: float
    sigma: float

    space: ClassVar[str] = "size"
    family_name: ClassVar[str] = "ln"

    def __post_init__(self):
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise ValueError("sigma must be positive and finite")
        if not np.isfinite(self.mu):
            raise ValueError("mu must be finite")

    @property
    def support(self):
        return (0.0, np.inf)

    def log_pdf(self, x):
        arr, scalar = _prepare(x)
        _check_positive(arr, "lognormal density")
        y = np.log(arr)
        z = (y - self.mu) / self.sigma
        return _ret(-np.log(self.sigma) - _HALF_LOG_2PI - 0.5 * z * z - y, scalar)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def cdf(self, x):
        arr, scalar = _prepare(x)
        out = np.zeros_like(arr)
        pos = arr > 0.0
        out[pos] = ndtr((np.log(arr[pos]) - self.mu) / self.sigma)
        return _ret(out, scalar)

    def quantile(self, q):
        arr, scalar = _prepare(q)
        _validate_q(arr)
        return _ret(np.exp(self.mu + self.sigma * ndtri(arr)), scalar)

    def sample(self, n: int, seed=None) -> Sample:
        y = _rng(seed).normal(self.mu, self.sigma, size=n)
        return Sample.from_values(np.exp(y))

    def to_log_space(self) -> "NormalModel":
        return NormalModel(self.mu, self.sigma)

    def free_parameters(self) -> np.ndarray:
        return np.array([self.mu, self.sigma])

    def with_parameters(self, theta) -> "Lognormal":
        return Lognormal(float(theta[0]), float(theta[1]))


def _validate_mixture(mu, sigma, weights):
    m = len(mu)
    if m < 2:
        raise ValueError("a mixture needs at least two components")
    if len(sigma) != m:
        raise ValueError("mu and sigma must have the same length")
    if len(weights) != m - 1:
        raise ValueError("weights holds the first m-1 mixing probabilities")
    if not all(np.isfinite(v) for v in mu):
        raise ValueError("component means must be finite")
    if not all(s > 0.0 and np.isfinite(s) for s in sigma):
        raise ValueError("component sigmas must be positive and finite")
    if any(w < 0.0 for w in weights):
        raise ValueError("mixing probabilities must be nonnegative")
    if sum(weights) > 1.0 + 1e-12:
        raise ValueError("mixing probabilities must sum to at most 1")


def _mixture_probs(weights, m) -> np.ndarray:
    p = np.empty(m)
    p[: m - 1] = weights
    p[m - 1] = max(0.0, 1.0 - float(sum(weights)))
    return p


@dataclass(frozen=True)
class LognormalMixture:
    """Finite mixture of lognormal components.

    ``weights`` lists the first m-1 mixing probabilities; the last one is
    implicit, so the free-parameter count is 3m - 1.
    """

    mu: tuple
    sigma: tuple
    weights: tuple

    space: ClassVar[str] = "size"

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        object.__setattr__(self, "sigma", tuple(float(v) for v in self.sigma))
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
        _validate_mixture(self.mu, self.sigma, self.weights)

    @property
    def m(self) -> int:
        return len(self.mu)

    @property
    def family_name(self) -> str:
        return f"{self.m}ln"

    @property
    def probs(self) -> np.ndarray:
        return _mixture_probs(self.weights, self.m)

    @property
    def support(self):
        return (0.0, np.inf)

    def _log_space(self) -> "NormalMixture":
        return NormalMixture(self.mu, self.sigma, self.weights)

    def log_pdf(self, x):
        arr, scalar = _prepare(x)
        _check_positive(arr, "lognormal-mixture density")
        y = np.log(arr)
        return _ret(self._log_space().log_pdf(y) - y, scalar)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def cdf(self, x):
        arr, scalar = _prepare(x)
        out = np.zeros_like(arr)
        pos = arr > 0.0
        out[pos] = self._log_space().cdf(np.log(arr[pos]))
        return _ret(out, scalar)

    def quantile(self, q):
        arr, scalar = _prepare(q)
        _validate_q(arr)
        return _ret(np.exp(self._log_space().quantile(arr)), scalar)

    def sample(self, n: int, seed=None) -> Sample:
        rng = _rng(seed)
        comp = rng.choice(self.m, size=n, p=self.probs)
        y = rng.normal(np.asarray(self.mu)[comp], np.asarray(self.sigma)[comp])
        return Sample.from_values(np.exp(y))

    def responsibilities(self, y):
        """Posterior component probabilities at log-size y."""
        return self._log_space().responsibilities(y)

    def canonical(self) -> "LognormalMixture":
        """Components reordered by decreasing mean (label-switching guard)."""
        order = np.argsort(-np.asarray(self.mu), kind="stable")
        p = self.probs[order]
        return LognormalMixture(
            tuple(np.asarray(self.mu)[order]),
            tuple(np.asarray(self.sigma)[order]),
            tuple(p[:-1]),
        )

    def to_log_space(self) -> "NormalMixture":
        return self._log_space()

    def free_parameters(self) -> np.ndarray:
        return np.concatenate([self.mu, self.sigma, self.weights])

    def with_parameters(self, theta) -> "LognormalMixture":
        m = self.m
        theta = np.asarray(theta, dtype=float)
        return LognormalMixture(tuple(theta[:m]), tuple(theta[m : 2 * m]), tuple(theta[2 * m :]))


@dataclass(frozen=True)
class Pareto:
    """Pure power law above a known lower cutoff x_min.

    Density (alpha - 1) / x_min * (x / x_min)**(-alpha) on x >= x_min,
    normalized for alpha > 1.
    """

    alpha: float
    x_min: float

    space: ClassVar[str] = "size"
    family_name: ClassVar[str] = "pareto"

    def __post_init__(self):
        if not (self.alpha > 1.0 and np.isfinite(self.alpha)):
            raise ValueError("alpha must exceed 1 for a normalizable tail")
        if not (self.x_min > 0.0 and np.isfinite(self.x_min)):
            raise ValueError("x_min must be positive and finite")

    @property
    def support(self):
        return (self.x_min, np.inf)

    def log_pdf(self, x):
        arr, scalar = _prepare(x)
        _check_at_least(arr, self.x_min, "power-law density")
        out = (
            np.log(self.alpha - 1.0)
            - np.log(self.x_min)
            - self.alpha * (np.log(arr) - np.log(self.x_min))
        )
        return _ret(out, scalar)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def cdf(self, x):
        arr, scalar = _prepare(x)
        out = np.zeros_like(arr)
        above = arr > self.x_min
        out[above] = -np.expm1((1.0 - self.alpha) * (np.log(arr[above]) - np.log(self.x_min)))
        return _ret(out, scalar)

    def quantile(self, q):
        arr, scalar = _prepare(q)
        _validate_q(arr)
        return _ret(self.x_min * np.exp(np.log1p(-arr) / (1.0 - self.alpha)), scalar)

    def sample(self, n: int, seed=None) -> Sample:
        u = _rng(seed).random(n)
        return Sample.from_values(self.quantile(np.clip(u, 1e-16, 1.0 - 1e-16)))

    def to_log_space(self) -> "ShiftedExponential":
        return ShiftedExponential(self.alpha - 1.0, np.log(self.x_min))

    def free_parameters(self) -> np.ndarray:
        return np.array([self.alpha])

    def with_parameters(self, theta) -> "Pareto":
        return Pareto(float(theta[0]), self.x_min)


@dataclass(frozen=True)
class TruncatedLognormal:
    """Lognormal conditioned on x >= x_min (left truncation, renormalized)."""

    mu: float
    sigma: float
    x_min: float

    space: ClassVar[str] = "size"
    family_name: ClassVar[str] = "lnt"

    def __post_init__(self):
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise ValueError("sigma must be positive and finite")
        if not np.isfinite(self.mu):
            raise ValueError("mu must be finite")
        if not (self.x_min > 0.0 and np.isfinite(self.x_min)):
            raise ValueError("x_min must be positive and finite")

    @property
    def support(self):
        return (self.x_min, np.inf)

    @property
    def _z0(self) -> float:
        return (np.log(self.x_min) - self.mu) / self.sigma

    @property
    def _log_sf0(self) -> float:
        # ln P(x >= x_min) under the parent lognormal, stable far on the ridge
        return float(log_ndtr(-self._z0))

    def log_pdf(self, x):
        arr, scalar = _prepare(x)
        _check_at_least(arr, self.x_min, "truncated-lognormal density")
        y = np.log(arr)
        z = (y - self.mu) / self.sigma
        out = -np.log(self.sigma) - _HALF_LOG_2PI - 0.5 * z * z - y - self._log_sf0
        return _ret(out, scalar)

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def cdf(self, x):
        arr, scalar = _prepare(x)
        out = np.zeros_like(arr)
        above = arr > self.x_min
        z = (np.log(arr[above]) - self.mu) / self.sigma
        sf0 = np.exp(self._log_sf0)
        out[above] = np.clip((ndtr(z) - ndtr(self._z0)) / sf0, 0.0, 1.0)
        return _ret(out, scalar)

    def quantile(self, q):
        arr, scalar = _prepare(q)
        _validate_q(arr)
        # invert the survival side: P(X > x) = (1-q) * P(X > x_min)
        tail = np.exp(self._log_sf0) * (1.0 - arr)
        z = -ndtri(tail)
        return _ret(np.exp(self.mu + self.sigma * z), scalar)

    def sample(self, n: int, seed=None) -> Sample:
        u = _rng(seed).random(n)
        return Sample.from_values(self.quantile(np.clip(u, 1e-16, 1.0 - 1e-16)))

    def to_log_space(self) -> "TruncatedNormal":
        return TruncatedNormal(self.mu, self.sigma, np.log(self.x_min))

    def free_parameters(self) -> np.ndarray:
        return np.array([self.mu, self.sigma])

    def with_parameters(self, theta) -> "TruncatedLognormal":
        return TruncatedLognormal(float(theta[0]), float(theta[1]), self.x_min)


# ---------------------------------------------------------------------------
# log-space images
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpStretchedExponential:
    """Law of y = ln(x) when x is stretched-exponential(gamma, eta).

    Density gamma * w * exp(-w) with w = (exp(y)/eta)**gamma, y real.
    """

    gamma: float
    eta: float

    space: ClassVar[str] = "log"
    family_name: ClassVar[str] = "estexp"

    def __post_init__(self):
        if not (self.gamma > 0.0 and np.isfinite(self.gamma)):
            raise ValueError("gamma must be positive and finite")
        if not (self.eta > 0.0 and np.isfinite(self.eta)):
            raise ValueError("eta must be positive and finite")

    @property
    def support(self):
        return (-np.inf, np.inf)

    def log_pdf(self, y):
        arr, scalar = _prepare(y)
        t = self.gamma * (arr - np.log(self.eta))
        return _ret(np.log(self.gamma) + t - np.exp(t), scalar)

    def pdf(self, y):
        return np.exp(self.log_pdf(y))

    def cdf(self, y):
        arr, scalar = _prepare(y)
        t = self.gamma * (arr - np.log(self.eta))
        return _ret(-np.expm1(-np.exp(t)), scalar)

    def quantile(self, q):
        arr, scalar = _prepare(q)
        _validate_q(arr)
        return _ret(np.log(self.eta) + np.log(-np.log1p(-arr)) / self.gamma, scalar)

    def sample(self, n: int, seed=None) -> np.ndarray:
        u = _rng(seed).random(n)
        return self.quantile(np.clip(u, 1e-16, 1.0 - 1e-16))


@dataclass(frozen=True)
class NormalModel:
    """Gaussian law for log sizes."""

    mu: float
    sigma: float

    space: ClassVar[str] = "log"
    family_name: ClassVar[str] = "normal"

    def __post_init__(self):
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise ValueError("sigma must be positive and finite")
        if not np.isfinite(self.mu):
            raise ValueError("mu must be finite")

    @property
    def support(self):
        return (-np.inf, np.inf)

    def log_pdf(self, y):
        arr, scalar = _prepare(y)
        z = (arr - self.mu) / self.sigma
        return _ret(-np.log(self.sigma) - _HALF_LOG_2PI - 0.5 * z * z, scalar)

    def pdf(self, y):
        return np.exp(self.log_pdf(y))

    def cdf(self, y):
        arr, scalar = _prepare(y)
        return _ret(ndtr((arr - self.mu) / self.sigma), scalar)

    def quantile(self, q):
        arr, scalar = _prepare(q)
        _validate_q(arr)
        return _ret(self.mu + self.sigma * ndtri(arr), scalar)

    def sample(self, n: int, seed=None) -> np.ndarray:
        return _rng(seed).normal(self.mu, self.sigma, size=n)


@dataclass(frozen=True)
class NormalMixture:
    """Finite Gaussian mixture for log sizes; weights as in LognormalMixture."""

    mu: tuple
    sigma: tuple
    weights: tuple

    space: ClassVar[str] = "log"

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(v) for v in self.mu))
        object.__setattr__(self, "sigma", tuple(float(v) for v in self.sigma))
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
        _validate_mixture(self.mu, self.sigma, self.weights)

    @property
    def m(self) -> int:
        return len(self.mu)

    @property
    def family_name(self) -> str:
        return f"{self.m}n"

    @property
    def probs(self) -> np.ndarray:
        return _mixture_probs(self.weights, self.m)

    @property
    def support(self):
        return (-np.inf, np.inf)

    def _component_logpdf(self, y: np.ndarray) -> np.ndarray:
        """(n, m) matrix of ln[p_j * phi_j(y_i)]; zero-weight components go to -inf."""
        mu = np.asarray(self.mu)
        sigma = np.asarray(self.sigma)
        p = self.probs
        z = (y[..., None] - mu) / sigma
        with np.errstate(divide="ignore"):
            logp = np.log(p)
        return logp - np.log(sigma) - _HALF_LOG_2PI - 0.5 * z * z

    def log_pdf(self, y):
        arr, scalar = _prepare(y)
        out = logsumexp(self._component_logpdf(np.atleast_1d(arr)), axis=-1)
        return out[0] if scalar else out

    def pdf(self, y):
        return np.exp(self.log_pdf(y))

    def cdf(self, y):
        arr, scalar = _prepare(y)
        mu = np.asarray(self.mu)
        sigma = np.asarray(self.sigma)
        vals = ndtr((arr[..., None] - mu) / sigma) @ self.probs
        return _ret(np.asarray(vals), scalar)

    def quantile(self, q):
        arr, scalar = _prepare(q)
        _validate_q(arr)
        flat = np.atleast_1d(arr)
        z = ndtri(flat)
        comp = np.asarray(self.mu) + np.asarray(self.sigma) * z[..., None]
        lo = comp.min(axis=-1)
        hi = comp.max(axis=-1)
        out = _bisect_quantile(self.cdf, lo, hi, flat)
        return _ret(out.reshape(np.shape(arr)), scalar)

    def sample(self, n: int, seed=None) -> np.ndarray:
        rng = _rng(seed)
        comp = rng.choice(self.m, size=n, p=self.probs)
        return rng.normal(np.asarray(self.mu)[comp], np.asarray(self.sigma)[comp])

    def responsibilities(self, y):
        """Posterior probability of each component at y; rows sum to one."""
        arr, scalar = _prepare(y)
        t = self._component_logpdf(np.atleast_1d(arr))
        t = t - t.max(axis=-1, keepdims=True)
        tau = np.exp(t)
        tau /= tau.sum(axis=-1, keepdims=True)
        return tau[0] if scalar else tau

    def canonical(self) -> "NormalMixture":
        order = np.argsort(-np.asarray(self.mu), kind="stable")
        p = self.probs[order]
        return NormalMixture(
            tuple(np.asarray(self.mu)[order]),
            tuple(np.asarray(self.sigma)[order]),
            tuple(p[:-1]),
        )


@dataclass(frozen=True)
class ShiftedExponential:
    """Exponential law for y - y_min: the log-space image of a power law."""

    rate: float
    y_min: float

    space: ClassVar[str] = "log"
    family_name: ClassVar[str] = "exp"

    def __post_init__(self):
        if not (self.rate > 0.0 and np.isfinite(self.rate)):
            raise ValueError("rate must be positive and finite")
        if not np.isfinite(self.y_min):
            raise ValueError("y_min must be finite")

    @property
    def support(self):
        return (self.y_min, np.inf)

    def log_pdf(self, y):
        arr, scalar = _prepare(y)
        if np.any(arr < self.y_min):
            raise SupportError(f"shifted-exponential density requires y >= {self.y_min}")
        return _ret(np.log(self.rate) - self.rate * (arr - self.y_min), scalar)

    def pdf(self, y):
        return np.exp(self.log_pdf(y))

    def cdf(self, y):
        arr, scalar = _prepare(y)
        out = np.zeros_like(arr)
        above = arr > self.y_min
        out[above] = -np.expm1(-self.rate * (arr[above] - self.y_min))
        return _ret(out, scalar)

    def quantile(self, q):
        arr, scalar = _prepare(q)
        _validate_q(arr)
        return _ret(self.y_min - np.log1p(-arr) / self.rate, scalar)

    def sample(self, n: int, seed=None) -> np.ndarray:
        u = _rng(seed).random(n)
        return self.quantile(np.clip(u, 1e-16, 1.0 - 1e-16))


@dataclass(frozen=True)
class TruncatedNormal:
    """Gaussian for log sizes conditioned on y >= y_min."""

    mu: float
    sigma: float
    y_min: float

    space: ClassVar[str] = "log"
    family_name: ClassVar[str] = "nt"

    def __post_init__(self):
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise ValueError("sigma must be positive and finite")
        if not np.isfinite(self.mu):
            raise ValueError("mu must be finite")
        if not np.isfinite(self.y_min):
            raise ValueError("y_min must be finite")

    @property
    def support(self):
        return (self.y_min, np.inf)

    @property
    def _z0(self) -> float:
        return (self.y_min - self.mu) / self.sigma

    @property
    def _log_sf0(self) -> float:
        return float(log_ndtr(-self._z0))

    def log_pdf(self, y):
        arr, scalar = _prepare(y)
        if np.any(arr < self.y_min):
            raise SupportError(f"truncated-normal density requires y >= {self.y_min}")
        z = (arr - self.mu) / self.sigma
        return _ret(-np.log(self.sigma) - _HALF_LOG_2PI - 0.5 * z * z - self._log_sf0, scalar)

    def pdf(self, y):
        return np.exp(self.log_pdf(y))

    def cdf(self, y):
        arr, scalar = _prepare(y)
        out = np.zeros_like(arr)
        above = arr > self.y_min
        z = (arr[above] - self.mu) / self.sigma
        out[above] = np.clip((ndtr(z) - ndtr(self._z0)) / np.exp(self._log_sf0), 0.0, 1.0)
        return _ret(out, scalar)

    def quantile(self, q):
        arr, scalar = _prepare(q)
        _validate_q(arr)
        tail = np.exp(self._log_sf0) * (1.0 - arr)
        return _ret(self.mu + self.sigma * (-ndtri(tail)), scalar)

    def sample(self, n: int, seed=None) -> np.ndarray:
        u = _rng(seed).random(n)
        return self.quantile(np.clip(u, 1e-16, 1.0 - 1e-16))


SIZE_FAMILIES = {
    "stexp": StretchedExponential,
    "ln": Lognormal,
    "pareto": Pareto,
    "lnt": TruncatedLognormal,
}
