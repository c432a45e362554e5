"""Size and power of a critical value under strategic researchers, and the ICCV search."""
from dataclasses import dataclass, field
import logging
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import optimize

from .behavior import DEFAULT_CAP, BehaviorModel
from .dist import std_normal_cdf, std_normal_quantile
from .errors import InvalidArgumentError, NoThresholdError, SearchFailureError, UnsupportedModelError
from .incentives import ConstantCost, Incentives
from .priors import Prior, Tail, as_tail, rejection_prob
from .replicate_runner import CAPPED, REJECTED, STUDIES, tally_outcomes

logger = logging.getLogger(__name__)

DEFAULT_REPS = 100000
DEFAULT_SEED = 20200501
CAP_WARNING_RATE = 0.001

SIZE_CURVE_COLUMNS = ['z', 'size', 'std_error', 'reps', 'cap_hit_rate', 'mean_studies']


@dataclass
class SizeEstimate:
    size: float
    std_error: float
    reps: int
    cap_hit_rate: float

    @classmethod
    def from_counts(cls, rejected: int, capped: int, reps: int) -> 'SizeEstimate':
        size = rejected / reps
        return cls(size, float(np.sqrt(size * (1.0 - size) / reps)), reps, capped / reps)

    def to_dict(self) -> Dict:
        return {'size': self.size, 'std_error': self.std_error, 'reps': self.reps,
                'cap_hit_rate': self.cap_hit_rate}


@dataclass
class ZGrid:
    lo: float
    hi: float = 6.0
    step: float = 0.005

    def __post_init__(self):
        if not self.step > 0:
            raise InvalidArgumentError(f"Grid step must be positive, got {self.step}.")
        if self.hi < self.lo:
            raise InvalidArgumentError(f"Grid upper bound {self.hi} is below its lower bound {self.lo}.")

    def values(self) -> np.ndarray:
        count = int(np.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        values = np.maximum(np.round(self.lo + self.step * np.arange(count + 1), 12), self.lo)
        return values[values <= self.hi + 1e-12]

    def to_dict(self) -> Dict:
        return {'lo': self.lo, 'hi': self.hi, 'step': self.step}


@dataclass
class ICCVResult:
    z_star: float
    size_at_z: SizeEstimate
    grid_step: float
    nonzero_power: bool
    mean_studies: float
    size_curve: pd.DataFrame = field(default=None, repr=False)

    def to_dict(self) -> Dict:
        return {'z_star': self.z_star, 'size': self.size_at_z.size, 'std_error': self.size_at_z.std_error,
                'reps': self.size_at_z.reps, 'cap_hit_rate': self.size_at_z.cap_hit_rate,
                'grid_step': self.grid_step, 'nonzero_power': self.nonzero_power,
                'mean_studies': self.mean_studies}


def classical_quantile(alpha: float, tail: Tail = Tail.TWO_SIDED) -> float:
    """The single-test critical value: 1.96 (two-sided) or 1.645 (one-sided) at alpha = 0.05."""
    tail = as_tail(tail)
    return std_normal_quantile(1.0 - alpha / 2.0 if tail.two_sided else 1.0 - alpha)


def size_closed_form_iid(z: float, n: int, tail: Tail = Tail.TWO_SIDED) -> float:
    """Size when exactly n independent null studies are run and the largest is reported."""
    if n < 0:
        raise InvalidArgumentError(f"Study count must be non-negative, got {n}.")
    if n == 0:
        return 0.0
    tail = as_tail(tail)
    accept = std_normal_cdf(z) - std_normal_cdf(-z) if tail.two_sided else std_normal_cdf(z)
    return float(1.0 - accept ** n)


def size_curve(model: BehaviorModel, prior: Prior, incentives: Incentives, tail: Tail,
               z_values: Sequence[float], reps: int = DEFAULT_REPS, seed: int = DEFAULT_SEED,
               cap: int = DEFAULT_CAP, workers: int = 1, theta: float = 0.0) -> pd.DataFrame:
    """Rejection frequency at every z, all z sharing the same replicate streams."""
    tail = as_tail(tail)
    z_values = np.asarray(z_values, dtype=float).reshape(-1)
    tallies = tally_outcomes(model, prior, incentives, tail, theta, z_values, reps, seed, cap, workers)
    rows = []
    for z, t in zip(z_values, tallies):
        est = SizeEstimate.from_counts(int(t[REJECTED]), int(t[CAPPED]), reps)
        rows.append([float(z), est.size, est.std_error, reps, est.cap_hit_rate, t[STUDIES] / reps])
    return pd.DataFrame(rows, columns=SIZE_CURVE_COLUMNS)


def _estimate(model, prior, incentives, z, tail, theta, reps, seed, cap, workers) -> SizeEstimate:
    t = tally_outcomes(model, prior, incentives, tail, theta, [z], reps, seed, cap, workers)[0]
    return SizeEstimate.from_counts(int(t[REJECTED]), int(t[CAPPED]), reps)


def estimate_size(model: BehaviorModel, prior: Prior, incentives: Incentives, z: float,
                  tail: Tail = Tail.TWO_SIDED, reps: int = DEFAULT_REPS, seed: int = DEFAULT_SEED,
                  cap: int = DEFAULT_CAP, workers: int = 1) -> SizeEstimate:
    est = _estimate(model, prior, incentives, z, tail, 0.0, reps, seed, cap, workers)
    if est.cap_hit_rate > CAP_WARNING_RATE:
        logger.warning("%.2f%% of null trajectories hit the cap of %d studies at z=%g",
                       100 * est.cap_hit_rate, cap, z)
    return est


def estimate_power(model: BehaviorModel, prior: Prior, incentives: Incentives, z: float, tail: Tail,
                   theta_true: float, reps: int = DEFAULT_REPS, seed: int = DEFAULT_SEED,
                   cap: int = DEFAULT_CAP, workers: int = 1) -> SizeEstimate:
    """Rejection frequency when the true effect is ``theta_true``; capped runs count as non-rejections."""
    return _estimate(model, prior, incentives, z, tail, theta_true, reps, seed, cap, workers)


def mean_num_studies(model: BehaviorModel, prior: Prior, incentives: Incentives, z: float,
                     tail: Tail = Tail.TWO_SIDED, reps: int = DEFAULT_REPS, seed: int = DEFAULT_SEED,
                     cap: int = DEFAULT_CAP, workers: int = 1) -> float:
    t = tally_outcomes(model, prior, incentives, tail, 0.0, [z], reps, seed, cap, workers)[0]
    return t[STUDIES] / reps


def _plateau_index(sizes: np.ndarray, alpha: float) -> int:
    """First index from which every size stays at or below alpha; -1 if the last one does not."""
    above = np.flatnonzero(sizes > alpha)
    if above.size == 0:
        return 0
    if above[-1] == sizes.size - 1:
        return -1
    return int(above[-1]) + 1


def find_iccv(model: BehaviorModel, prior: Prior, incentives: Incentives, tail: Tail = Tail.TWO_SIDED,
              alpha: float = 0.05, reps: int = DEFAULT_REPS, seed: int = DEFAULT_SEED,
              z_grid: Optional[ZGrid] = None, cap: int = DEFAULT_CAP, workers: int = 1) -> ICCVResult:
    """Smallest grid critical value whose size stays at or below alpha from there to the grid end."""
    if not 0.0 < alpha < 0.5:
        raise InvalidArgumentError(f"alpha must lie in (0, 0.5), got {alpha}.")
    tail = as_tail(tail)
    floor = classical_quantile(alpha, tail)
    if z_grid is None:
        z_grid = ZGrid(floor)
    elif z_grid.lo < floor:
        logger.warning("Grid lower bound %g is below the classical quantile %.6f; raising it", z_grid.lo, floor)
        z_grid = ZGrid(floor, max(z_grid.hi, floor), z_grid.step)
    values = z_grid.values()
    curve = size_curve(model, prior, incentives, tail, values, reps, seed, cap, workers)
    logger.info("Evaluated size at %d grid points in [%g, %g]", len(values), values[0], values[-1])

    idx = _plateau_index(curve['size'].to_numpy(), alpha)
    if idx < 0:
        at_min = int(curve['size'].idxmin())
        raise SearchFailureError(alpha, float(curve['size'].iloc[at_min]), float(curve['z'].iloc[at_min]),
                                 float(values[-1]))
    row = curve.iloc[idx]
    z_star = float(row['z'])
    size = SizeEstimate(float(row['size']), float(row['std_error']), int(row['reps']), float(row['cap_hit_rate']))
    if size.cap_hit_rate > CAP_WARNING_RATE:
        logger.warning("%.2f%% of null trajectories hit the cap at z*=%g", 100 * size.cap_hit_rate, z_star)
    nonzero_power = bool(rejection_prob(prior, z_star, tail) >= incentives.cost_ratio(1))
    logger.info("ICCV z*=%g with size %.5f (se %.5f)", z_star, size.size, size.std_error)
    return ICCVResult(z_star, size, z_grid.step, nonzero_power, float(row['mean_studies']), curve)


def baseline_threshold(prior: Prior, incentives: Incentives, tail: Tail = Tail.TWO_SIDED) -> float:
    """Critical value above which a constant-cost researcher never starts research: R(z) = c/v."""
    if not isinstance(incentives.cost, ConstantCost):
        raise UnsupportedModelError(
            f"baseline_threshold needs a constant cost, got {type(incentives.cost).__name__}."
        )
    tail = as_tail(tail)
    ratio = incentives.cost_ratio(1)
    at_zero = rejection_prob(prior, 0.0, tail)
    if ratio >= at_zero:
        raise NoThresholdError(
            f"Cost ratio c/v={ratio:.6g} is at least the rejection probability at z=0 ({at_zero:.6g}); "
            f"research is never profitable."
        )
    if ratio <= 0:
        raise NoThresholdError("With zero cost research is profitable at every critical value.")

    def excess(z: float) -> float:
        return rejection_prob(prior, z, tail) - ratio

    hi = 1.0
    while excess(hi) >= 0:
        hi *= 2.0
        if hi > 1e3:
            raise NoThresholdError(f"No critical value below {hi:g} makes research unprofitable.")
    return float(optimize.bisect(excess, 0.0, hi, xtol=1e-8))
