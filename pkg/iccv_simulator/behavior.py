"""Researcher stopping rules and trajectory simulation.

Each model describes two things about the latent t-statistics X*_1, X*_2, ...:

* the true conditional law of the next statistic given the ones so far (``draw``), and
* the researcher's subjective probability that the next study rejects (``continue_prob``).

Both work on a per-row state matrix so that one trajectory and a block of
trajectories share the same arithmetic.  A researcher conducts study n iff
``v * prob - c(n) >= 0``.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
import logging
from typing import Dict, List, Sequence, Union

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .dist import RandomStream, cholesky_lower, standard_normals, std_normal_cdf, std_normal_sf
from .errors import (
    FactorizationError,
    InvalidArgumentError,
    PreconditionError,
    UnsupportedModelError,
    UnsupportedPriorError,
)
from .incentives import Incentives, PowerLawCost
from .omega import IdentityOmega, OmegaGenerator, create_omega
from .priors import (
    MvnPrior,
    NormalPrior,
    Prior,
    Tail,
    as_tail,
    exceedance_prob,
    posterior_general,
    rejection_prob,
    subjective_mixture,
)

logger = logging.getLogger(__name__)

DEFAULT_CAP = 10000


def _tail_prob(mean, scale, z: float, tail: Tail):
    """P(|Y| >= z) (or P(Y >= z)) for Y ~ N(mean, scale^2)."""
    out = std_normal_sf((z - mean) / scale)
    if tail.two_sided:
        out = out + std_normal_cdf((-z - mean) / scale)
    return np.clip(out, 0.0, 1.0)


class BehaviorModel(ABC):
    history_independent = False

    def check_prior(self, prior: Prior):
        pass

    @abstractmethod
    def new_state(self, rows: int) -> np.ndarray:
        pass

    @abstractmethod
    def observe(self, state: np.ndarray, x: np.ndarray, n: int) -> np.ndarray:
        """State after X*_n = x has been observed."""

    @abstractmethod
    def draw(self, state: np.ndarray, theta: float, zeta: np.ndarray, n: int) -> np.ndarray:
        """X*_n from the true law, given the innovations ``zeta``."""

    @abstractmethod
    def continue_prob(self, prior: Prior, state: np.ndarray, z: float, tail: Tail, n: int) -> np.ndarray:
        """Subjective probability that study n rejects, per row."""

    @abstractmethod
    def to_dict(self) -> Dict:
        pass


class _IidLatent(BehaviorModel):
    """Independent studies: X*_n ~ N(theta, 1)."""

    def new_state(self, rows: int) -> np.ndarray:
        return np.zeros((rows, 0))

    def observe(self, state, x, n):
        return state

    def draw(self, state, theta, zeta, n):
        return theta + zeta

    def continue_prob(self, prior, state, z, tail, n):
        return np.full(state.shape[0], rejection_prob(prior, z, tail))


@dataclass
class BaselineModel(_IidLatent):
    history_independent = True

    def to_dict(self) -> Dict:
        return {'type': 'BaselineModel'}

    @classmethod
    def from_dict(cls, d: Dict) -> 'BaselineModel':
        return cls()


@dataclass
class IncreasingCostModel(_IidLatent):
    history_independent = True

    def to_dict(self) -> Dict:
        return {'type': 'IncreasingCostModel'}

    @classmethod
    def from_dict(cls, d: Dict) -> 'IncreasingCostModel':
        return cls()


@dataclass
class LearningModel(BehaviorModel):
    """Independent studies, normal prior updated after every study."""

    def check_prior(self, prior):
        if not isinstance(prior, NormalPrior):
            raise UnsupportedPriorError(
                f"The learning model needs a normal prior, got {type(prior).__name__}."
            )

    def new_state(self, rows):
        return np.zeros((rows, 1))

    def observe(self, state, x, n):
        return state + np.reshape(x, (-1, 1))

    def draw(self, state, theta, zeta, n):
        return theta + zeta

    def continue_prob(self, prior, state, z, tail, n):
        self.check_prior(prior)
        s2 = prior.variance
        denom = (n - 1) * s2 + 1.0
        mean = (s2 * state[:, 0] + prior.mean) / denom
        return _tail_prob(mean, np.sqrt(1.0 + s2 / denom), z, tail)

    def to_dict(self) -> Dict:
        return {'type': 'LearningModel'}

    @classmethod
    def from_dict(cls, d: Dict) -> 'LearningModel':
        return cls()


@dataclass
class PoolingModel(BehaviorModel):
    """Each study pools all data so far: X*_n = (sqrt(n-1) X*_{n-1} + theta + zeta_n) / sqrt(n)."""

    def new_state(self, rows):
        return np.zeros((rows, 1))

    def observe(self, state, x, n):
        return np.reshape(np.asarray(x, dtype=float), (-1, 1))

    def draw(self, state, theta, zeta, n):
        return (np.sqrt(n - 1.0) * state[:, 0] + theta + zeta) / np.sqrt(n)

    def continue_prob(self, prior, state, z, tail, n):
        shift = np.sqrt(n - 1.0) * state[:, 0]
        upper = np.sqrt(n) * z - shift
        lower = -np.sqrt(n) * z - shift
        return np.atleast_1d(exceedance_prob(prior, upper, lower, tail))

    def to_dict(self) -> Dict:
        return {'type': 'PoolingModel'}

    @classmethod
    def from_dict(cls, d: Dict) -> 'PoolingModel':
        return cls()


def mean_multipliers(rule: Union[str, Sequence[float]], n: int) -> np.ndarray:
    """lambda_1..lambda_n for theta_i = lambda_i * theta."""
    idx = np.arange(1, n + 1, dtype=float)
    if isinstance(rule, str):
        if rule == 'ones':
            return np.ones(n)
        if rule == 'sqrt':
            return np.sqrt(idx)
        raise InvalidArgumentError(f"Unknown mean-multiplier rule: {rule!r}. Use 'ones', 'sqrt' or a list.")
    values = np.asarray(rule, dtype=float).reshape(-1)
    if values.size == 0:
        raise InvalidArgumentError("Mean-multiplier list must not be empty.")
    if values.size >= n:
        return values[:n].copy()
    return np.concatenate([values, np.full(n - values.size, values[-1])])


class _GeneralCoefficients:
    """Rows of chol(Omega_n) and the whitened mean multipliers, extended one study at a time.

    Identity correlation keeps no factor: every row is zero and every diagonal is one.
    """

    def __init__(self, omega: OmegaGenerator, lambdas):
        self.omega = omega
        self.lambdas = lambdas
        self.identity = isinstance(omega, IdentityOmega)
        self._lower = np.zeros((0, 0))
        self._lam = np.zeros(0)
        self._eta_lam = np.zeros(0)
        self._size = 0

    def _grow(self, n: int):
        capacity = max(n, 2 * self._lam.shape[0], 16)
        if not self.identity:
            lower = np.zeros((capacity, capacity))
            lower[:self._size, :self._size] = self._lower[:self._size, :self._size]
            self._lower = lower
        self._lam = mean_multipliers(self.lambdas, capacity)
        eta = np.zeros(capacity)
        eta[:self._size] = self._eta_lam[:self._size]
        self._eta_lam = eta
        logger.debug("General-model coefficients sized for %d studies", capacity)

    def ensure(self, n: int):
        if n <= self._size:
            return
        if n > self._lam.shape[0]:
            self._grow(n)
        if self.identity:
            self._eta_lam[self._size:n] = self._lam[self._size:n]
            self._size = n
            return
        for k in range(self._size, n):
            if k == 0:
                row = np.zeros(0)
            else:
                row = solve_triangular(self._lower[:k, :k], self.omega.column(k), lower=True, check_finite=False)
            resid = 1.0 - row @ row
            if not resid > 0:
                raise FactorizationError(pivot=k, size=n)
            self._lower[k, :k] = row
            self._lower[k, k] = np.sqrt(resid)
            self._eta_lam[k] = (self._lam[k] - row @ self._eta_lam[:k]) / self._lower[k, k]
        self._size = n

    def row(self, n: int) -> np.ndarray:
        self.ensure(n)
        if self.identity:
            return np.zeros(n - 1)
        return self._lower[n - 1, :n - 1]

    def omega_n(self, n: int) -> float:
        self.ensure(n)
        return 1.0 if self.identity else float(self._lower[n - 1, n - 1])

    def lam(self, n: int) -> np.ndarray:
        self.ensure(n)
        return self._lam[:n]

    def eta_lam(self, n: int) -> np.ndarray:
        self.ensure(n)
        return self._eta_lam[:n]


@dataclass
class GeneralModel(BehaviorModel):
    """Correlated studies with theta_i = lambda_i * theta and corr(X*) = Omega.

    ``alpha`` weighs the prior-based prediction against the posterior-based one.
    The state holds the whitened statistics L^{-1} X* of each row.
    """
    lambdas: Union[str, List[float]] = 'ones'
    omega: OmegaGenerator = field(default_factory=IdentityOmega)
    alpha: float = 1.0
    jitter: float = 1e-8
    _coef: _GeneralCoefficients = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidArgumentError(f"Sophistication weight must lie in [0, 1], got {self.alpha}.")
        mean_multipliers(self.lambdas, 1)
        self._coef = _GeneralCoefficients(self.omega, self.lambdas)

    def check_prior(self, prior):
        if not isinstance(prior, NormalPrior):
            raise UnsupportedPriorError(
                f"The general model needs a normal prior, got {type(prior).__name__}."
            )

    def new_state(self, rows):
        return np.zeros((rows, 0))

    def observe(self, state, x, n):
        row = self._coef.row(n)
        eta = (np.asarray(x, dtype=float) - state @ row) / self._coef.omega_n(n)
        return np.column_stack([state, eta])

    def draw(self, state, theta, zeta, n):
        row = self._coef.row(n)
        resid = state - theta * self._coef.eta_lam(n - 1)
        return self._coef.lam(n)[-1] * theta + resid @ row + self._coef.omega_n(n) * zeta

    def predictive_terms(self, prior: NormalPrior, state: np.ndarray, n: int):
        """Mean and variance of X*_n under the prior and under the posterior."""
        row = self._coef.row(n)
        eta_lam = self._coef.eta_lam(n - 1)
        c_n = self._coef.lam(n)[-1] - row @ eta_lam
        w_x = state @ row
        s2 = prior.variance
        precision = 1.0 / s2 + eta_lam @ eta_lam
        post_mean = (prior.mean / s2 + state @ eta_lam) / precision
        return (c_n * prior.mean + w_x, c_n * c_n * s2), (c_n * post_mean + w_x, c_n * c_n / precision)

    def continue_prob(self, prior, state, z, tail, n):
        self.check_prior(prior)
        (m0, v0), (m1, v1) = self.predictive_terms(prior, state, n)
        w2 = self._coef.omega_n(n) ** 2
        p0 = _tail_prob(m0, np.sqrt(w2 + v0), z, tail)
        p1 = _tail_prob(m1, np.sqrt(w2 + v1), z, tail)
        return self.alpha * p0 + (1.0 - self.alpha) * p1

    def continue_prob_mvn(self, prior: NormalPrior, latent: Sequence[float], z: float, tail: Tail) -> float:
        """Same probability through the vector posterior of (theta_1..theta_n).

        The rank-one prior covariance sigma^2 lambda lambda' is regularized by ``jitter``.
        """
        self.check_prior(prior)
        tail = as_tail(tail)
        x = np.asarray(latent, dtype=float)
        n = x.size + 1
        lam = self._coef.lam(n)
        omega = self.omega.matrix(n)
        vec_prior = MvnPrior(prior.mean * lam, prior.variance * np.outer(lam, lam))
        w = np.zeros(n - 1)
        if n > 1 and not self._coef.identity:
            w = cho_solve((cholesky_lower(omega[:n - 1, :n - 1]), True), omega[:n - 1, n - 1])
        a = np.append(-w, 1.0)
        w2 = self._coef.omega_n(n) ** 2
        probs = []
        for belief in (vec_prior, posterior_general(vec_prior, omega[:n - 1, :n - 1], x, jitter=self.jitter)):
            mean = a @ belief.mean + w @ x
            var = a @ belief.cov @ a
            probs.append(float(_tail_prob(mean, np.sqrt(w2 + var), z, tail)))
        return subjective_mixture(probs[0], probs[1], self.alpha)

    def to_dict(self) -> Dict:
        lambdas = self.lambdas if isinstance(self.lambdas, str) else [float(v) for v in self.lambdas]
        return {'type': 'GeneralModel', 'lambdas': lambdas, 'omega': self.omega.to_dict(),
                'alpha': self.alpha, 'jitter': self.jitter}

    @classmethod
    def from_dict(cls, d: Dict) -> 'GeneralModel':
        return cls(d.get('lambdas', 'ones'), create_omega(d.get('omega', {'type': 'IdentityOmega'})),
                   d.get('alpha', 1.0), d.get('jitter', 1e-8))


def create_behavior_model(d: Dict) -> BehaviorModel:
    typ = d['type']
    if typ == 'BaselineModel':
        return BaselineModel.from_dict(d)
    elif typ == 'IncreasingCostModel':
        return IncreasingCostModel.from_dict(d)
    elif typ == 'LearningModel':
        return LearningModel.from_dict(d)
    elif typ == 'PoolingModel':
        return PoolingModel.from_dict(d)
    elif typ == 'GeneralModel':
        return GeneralModel.from_dict(d)
    raise ValueError(f"Unknown behavior model type: {typ}")


@dataclass
class Trajectory:
    n_studies: int
    latent: List[float]
    reported: float
    rejected: bool
    capped: bool

    def to_dict(self) -> Dict:
        return {
            'n_studies': self.n_studies,
            'latent': list(self.latent),
            'reported': self.reported,
            'rejected': self.rejected,
            'capped': self.capped,
        }


def reported_statistic(latent: Sequence[float], tail: Tail) -> float:
    """X_N: running max of |X*| (two-sided) or X* (one-sided); 0 before any study."""
    if len(latent) == 0:
        return 0.0
    x = np.asarray(latent, dtype=float)
    return float(np.max(np.abs(x)) if as_tail(tail).two_sided else np.max(x))


def _replay(model: BehaviorModel, latent: Sequence[float]) -> np.ndarray:
    state = model.new_state(1)
    for i, x in enumerate(latent, start=1):
        state = model.observe(state, np.array([x], dtype=float), i)
    return state


def conducts_study(prob, incentives: Incentives, n: int):
    return incentives.v * prob - incentives.cost.cost(n) >= 0


def continue_decision(model: BehaviorModel, latent: Sequence[float], prior: Prior, incentives: Incentives,
                      z: float, tail: Tail = Tail.TWO_SIDED) -> bool:
    """Whether a researcher who has observed ``latent`` (and not rejected) conducts the next study."""
    tail = as_tail(tail)
    model.check_prior(prior)
    if len(latent) and reported_statistic(latent, tail) >= z:
        raise PreconditionError(
            f"The null is already rejected (X={reported_statistic(latent, tail):.6g} >= z={z:.6g}); "
            f"no further decision is made."
        )
    n = len(latent) + 1
    prob = model.continue_prob(prior, _replay(model, latent), z, tail, n)[0]
    return bool(conducts_study(prob, incentives, n))


def n_max_increasing_cost(prior: Prior, incentives: Incentives, z: float, tail: Tail = Tail.TWO_SIDED) -> int:
    """Largest n with c(n) <= v R(z); 0 when even the first study is unprofitable."""
    cost = incentives.cost
    if not isinstance(cost, PowerLawCost):
        raise UnsupportedModelError(
            f"n_max needs an increasing (power-law) cost, got {type(cost).__name__}; "
            f"use baseline_threshold for a constant cost."
        )
    budget = incentives.v * rejection_prob(prior, z, tail)
    n = int(np.floor(cost.inverse(budget)))
    # the decision rule is the authority at integer boundaries
    while budget - cost.cost(n + 1) >= 0:
        n += 1
    while n > 0 and budget - cost.cost(n) < 0:
        n -= 1
    return n


def next_latent(model: BehaviorModel, latent: Sequence[float], theta_true: float, stream: RandomStream) -> float:
    """X*_{k+1} given X*_1..X*_k, using variate k of the stream."""
    if not np.isfinite(theta_true):
        raise InvalidArgumentError(f"theta_true must be finite, got {theta_true}.")
    n = len(latent) + 1
    zeta = standard_normals(stream, 1, offset=n - 1)
    return float(model.draw(_replay(model, latent), theta_true, zeta, n)[0])


def simulate_trajectory(model: BehaviorModel, prior: Prior, incentives: Incentives, z: float, tail: Tail,
                        theta_true: float, cap: int, stream: RandomStream) -> Trajectory:
    """One researcher's run: decide, draw, stop at the first rejection, refusal or the cap."""
    if cap < 1:
        raise InvalidArgumentError(f"cap must be at least 1, got {cap}.")
    tail = as_tail(tail)
    model.check_prior(prior)
    gen = stream.generator()
    noise = np.zeros(0)
    latent: List[float] = []
    state = model.new_state(1)
    reported = 0.0
    n = 1
    while True:
        prob = model.continue_prob(prior, state, z, tail, n)[0]
        if not conducts_study(prob, incentives, n):
            return Trajectory(n - 1, latent, reported, False, False)
        if n == cap + 1:
            return Trajectory(cap, latent, reported, False, True)
        if n > noise.size:
            # sequential chunks continue the same variate sequence
            noise = np.concatenate([noise, gen.standard_normal(max(64, noise.size))])
        x = model.draw(state, theta_true, noise[n - 1:n], n)
        state = model.observe(state, x, n)
        latent.append(float(x[0]))
        value = abs(latent[-1]) if tail.two_sided else latent[-1]
        reported = value if n == 1 else max(reported, value)
        if reported >= z:
            return Trajectory(n, latent, reported, True, False)
        n += 1


def latent_matrix(model: BehaviorModel, theta_true: float, noise: np.ndarray) -> np.ndarray:
    """Latent statistics for every row of ``noise`` with no stopping."""
    noise = np.atleast_2d(np.asarray(noise, dtype=float))
    rows, cols = noise.shape
    out = np.empty((rows, cols))
    state = model.new_state(rows)
    for n in range(1, cols + 1):
        x = model.draw(state, theta_true, noise[:, n - 1], n)
        state = model.observe(state, x, n)
        out[:, n - 1] = x
    return out
