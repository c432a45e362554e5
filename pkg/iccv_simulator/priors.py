from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.linalg import cho_solve

from .dist import ArrayLike, cholesky_lower, std_normal_cdf, std_normal_pdf, std_normal_sf
from .errors import FactorizationError, InvalidArgumentError, SingularPriorError, UnsupportedPriorError

QUADRATURE_TOL = 1e-12


class Tail(Enum):
    TWO_SIDED = 'two_sided'
    UPPER_ONE_SIDED = 'upper_one_sided'

    @property
    def two_sided(self) -> bool:
        return self is Tail.TWO_SIDED


def as_tail(tail) -> Tail:
    if isinstance(tail, Tail):
        return tail
    try:
        return Tail(str(tail).replace('-', '_'))
    except ValueError:
        raise InvalidArgumentError(f"Unknown tail: {tail!r}. Use 'two_sided' or 'upper_one_sided'.") from None


class Prior(ABC):
    """The researcher's belief about the true effect theta."""

    @abstractmethod
    def exceedance(self, upper: np.ndarray, lower: Optional[np.ndarray]) -> np.ndarray:
        """Closed form of E[1 - Phi(upper - theta) + Phi(lower - theta)].

        ``lower=None`` drops the lower-tail term.
        """

    @abstractmethod
    def integrate(self, g) -> float:
        """E[g(theta)] by adaptive quadrature."""

    @abstractmethod
    def to_dict(self) -> Dict:
        pass


@dataclass
class PointMassPrior(Prior):
    theta: float

    def __post_init__(self):
        if not np.isfinite(self.theta):
            raise InvalidArgumentError(f"Point-mass location must be finite, got {self.theta}.")

    def exceedance(self, upper, lower):
        out = std_normal_sf(upper - self.theta)
        if lower is not None:
            out = out + std_normal_cdf(lower - self.theta)
        return out

    def integrate(self, g) -> float:
        return float(g(self.theta))

    def to_dict(self) -> Dict:
        return {'type': 'PointMassPrior', 'theta': self.theta}

    @classmethod
    def from_dict(cls, d: Dict) -> 'PointMassPrior':
        return cls(d['theta'])


def _psi(t):
    # antiderivative of Phi
    return t * std_normal_cdf(t) + std_normal_pdf(t)


@dataclass
class UniformPrior(Prior):
    low: float
    high: float

    def __post_init__(self):
        if not (np.isfinite(self.low) and np.isfinite(self.high)) or not self.low < self.high:
            raise InvalidArgumentError(
                f"Uniform prior needs finite low < high, got low={self.low}, high={self.high}."
            )

    def exceedance(self, upper, lower):
        a, b = self.low, self.high
        out = (_psi(b - upper) - _psi(a - upper)) / (b - a)
        if lower is not None:
            out = out + (_psi(lower - a) - _psi(lower - b)) / (b - a)
        return out

    def integrate(self, g) -> float:
        value, _ = integrate.quad(g, self.low, self.high, epsabs=QUADRATURE_TOL, epsrel=QUADRATURE_TOL, limit=200)
        return value / (self.high - self.low)

    def to_dict(self) -> Dict:
        return {'type': 'UniformPrior', 'low': self.low, 'high': self.high}

    @classmethod
    def from_dict(cls, d: Dict) -> 'UniformPrior':
        return cls(d['low'], d['high'])


@dataclass
class NormalPrior(Prior):
    mean: float
    std: float

    def __post_init__(self):
        if not np.isfinite(self.mean) or not (np.isfinite(self.std) and self.std > 0):
            raise InvalidArgumentError(
                f"Normal prior needs a finite mean and std > 0, got mean={self.mean}, std={self.std}."
            )

    @property
    def variance(self) -> float:
        return self.std * self.std

    def exceedance(self, upper, lower):
        scale = np.sqrt(1.0 + self.variance)
        out = std_normal_sf((upper - self.mean) / scale)
        if lower is not None:
            out = out + std_normal_cdf((lower - self.mean) / scale)
        return out

    def integrate(self, g) -> float:
        # standardized, truncated at 10 std
        def weighted(x):
            return g(self.mean + self.std * x) * std_normal_pdf(x)

        value, _ = integrate.quad(weighted, -10.0, 10.0, epsabs=QUADRATURE_TOL, epsrel=QUADRATURE_TOL, limit=200)
        return value

    def to_dict(self) -> Dict:
        return {'type': 'NormalPrior', 'mean': self.mean, 'std': self.std}

    @classmethod
    def from_dict(cls, d: Dict) -> 'NormalPrior':
        return cls(d['mean'], d['std'])


def create_prior(d: Dict) -> Prior:
    typ = d['type']
    if typ == 'PointMassPrior':
        return PointMassPrior.from_dict(d)
    elif typ == 'UniformPrior':
        return UniformPrior.from_dict(d)
    elif typ == 'NormalPrior':
        return NormalPrior.from_dict(d)
    raise ValueError(f"Unknown prior type: {typ}")


def _bounds(upper: ArrayLike, lower: Optional[ArrayLike], tail: Tail):
    tail = as_tail(tail)
    u = np.asarray(upper, dtype=float)
    if not np.all(np.isfinite(u)):
        raise InvalidArgumentError(f"Upper bound must be finite, got {upper!r}.")
    if not tail.two_sided:
        return u, None
    if lower is None:
        raise InvalidArgumentError("A two-sided exceedance needs a lower bound.")
    l = np.asarray(lower, dtype=float)
    if not np.all(np.isfinite(l)):
        raise InvalidArgumentError(f"Lower bound must be finite, got {lower!r}.")
    if np.any(l > u):
        raise InvalidArgumentError("Lower bound must not exceed the upper bound.")
    return u, l


def _finish(value):
    value = np.clip(value, 0.0, 1.0)
    return float(value) if np.ndim(value) == 0 else value


def exceedance_prob(prior: Prior, upper: ArrayLike, lower: Optional[ArrayLike] = None,
                    tail: Tail = Tail.TWO_SIDED):
    """Prior-integrated probability that a unit-variance statistic centred at theta
    exceeds ``upper`` (or, two-sided, falls below ``lower``)."""
    u, l = _bounds(upper, lower, tail)
    return _finish(prior.exceedance(u, l))


def exceedance_prob_quadrature(prior: Prior, upper: ArrayLike, lower: Optional[ArrayLike] = None,
                               tail: Tail = Tail.TWO_SIDED):
    u, l = _bounds(upper, lower, tail)

    def one(ui: float, li: Optional[float]) -> float:
        if li is None:
            return prior.integrate(lambda t: std_normal_sf(ui - t))
        return prior.integrate(lambda t: std_normal_sf(ui - t) + std_normal_cdf(li - t))

    if u.ndim == 0:
        return _finish(one(float(u), None if l is None else float(l)))
    lows = [None] * u.size if l is None else np.broadcast_to(l, u.shape).ravel()
    values = [one(float(ui), None if li is None else float(li)) for ui, li in zip(u.ravel(), lows)]
    return _finish(np.asarray(values).reshape(u.shape))


def _check_z(z: ArrayLike) -> np.ndarray:
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise InvalidArgumentError(f"Critical value must be finite and non-negative, got {z!r}.")
    return arr


def rejection_prob(prior: Prior, z: ArrayLike, tail: Tail = Tail.TWO_SIDED):
    z = _check_z(z)
    return exceedance_prob(prior, z, -z, tail)


def rejection_prob_quadrature(prior: Prior, z: ArrayLike, tail: Tail = Tail.TWO_SIDED):
    z = _check_z(z)
    return exceedance_prob_quadrature(prior, z, -z, tail)


@dataclass
class PosteriorScalar:
    mean: float
    variance: float

    def as_prior(self) -> NormalPrior:
        return NormalPrior(self.mean, float(np.sqrt(self.variance)))


def posterior_scalar(prior: Prior, observations: Sequence[float]) -> PosteriorScalar:
    """Normal-normal update of theta given iid N(theta, 1) statistics."""
    if not isinstance(prior, NormalPrior):
        raise UnsupportedPriorError(
            f"Posterior updating needs a normal prior, got {type(prior).__name__}."
        )
    obs = np.asarray(observations, dtype=float).reshape(-1)
    if not np.all(np.isfinite(obs)):
        raise InvalidArgumentError("Observations must be finite.")
    s2 = prior.variance
    denom = obs.size * s2 + 1.0
    return PosteriorScalar((s2 * obs.sum() + prior.mean) / denom, s2 / denom)


@dataclass(eq=False)
class MvnPrior:
    mean: np.ndarray
    cov: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).reshape(-1)
        self.cov = np.array(self.cov, dtype=float, ndmin=2)
        n = self.mean.shape[0]
        if self.cov.shape != (n, n):
            raise InvalidArgumentError(f"Covariance shape {self.cov.shape} does not match mean length {n}.")
        scale = max(1.0, float(np.max(np.abs(self.cov)))) if n else 1.0
        if not np.allclose(self.cov, self.cov.T, rtol=0.0, atol=1e-12 * scale):
            raise InvalidArgumentError("Covariance must be symmetric.")

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def to_dict(self) -> Dict:
        return {'type': 'MvnPrior', 'mean': self.mean.tolist(), 'cov': self.cov.tolist()}

    @classmethod
    def from_dict(cls, d: Dict) -> 'MvnPrior':
        return cls(d['mean'], d['cov'])


def posterior_general(prior: MvnPrior, omega_prev: ArrayLike, observations: Sequence[float],
                      jitter: float = 0.0) -> MvnPrior:
    """Posterior of (theta_1..theta_n) after observing X*_1..X*_{n-1} ~ N(theta_{1..n-1}, omega_prev).

    Computed in covariance form, which equals the padded-precision form whenever the
    prior covariance is invertible and avoids inverting it.
    """
    n = prior.dim
    obs = np.asarray(observations, dtype=float).reshape(-1)
    m = obs.shape[0]
    if m != n - 1:
        raise InvalidArgumentError(f"Expected {n - 1} observations for a {n}-dimensional prior, got {m}.")
    if not np.all(np.isfinite(obs)):
        raise InvalidArgumentError("Observations must be finite.")
    omega = np.array(omega_prev, dtype=float, ndmin=2) if m else np.zeros((0, 0))
    if omega.shape != (m, m):
        raise InvalidArgumentError(f"Omega has shape {omega.shape}, expected ({m}, {m}).")
    if jitter < 0:
        raise InvalidArgumentError(f"Jitter must be non-negative, got {jitter}.")

    sigma = prior.cov + jitter * np.eye(n)
    try:
        cholesky_lower(sigma)
    except FactorizationError as exc:
        raise SingularPriorError(
            f"Prior covariance is singular (pivot {exc.pivot}); pass jitter=1e-8 to regularize it."
        ) from exc
    if m == 0:
        return MvnPrior(prior.mean.copy(), sigma)

    factor = cholesky_lower(sigma[:m, :m] + omega)
    cross = sigma[:, :m]
    mean = prior.mean + cross @ cho_solve((factor, True), obs - prior.mean[:m])
    cov = sigma - cross @ cho_solve((factor, True), sigma[:m, :])
    return MvnPrior(mean, 0.5 * (cov + cov.T))


def subjective_mixture(prior_term: float, posterior_term: float, alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise InvalidArgumentError(f"Sophistication weight must lie in [0, 1], got {alpha}.")
    for name, p in (('prior_term', prior_term), ('posterior_term', posterior_term)):
        if not 0.0 <= p <= 1.0:
            raise InvalidArgumentError(f"{name} must be a probability, got {p}.")
    return alpha * prior_term + (1.0 - alpha) * posterior_term
