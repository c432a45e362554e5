"""Prior calibration from matched-pairs study summaries, and cost-ratio elicitation bounds."""
from dataclasses import dataclass
import logging
import os
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .dist import RandomStream, standard_normals, std_normal_cdf, std_normal_sf
from .errors import InconsistentSummaryError, InsufficientDataError, InvalidArgumentError, UnsupportedPriorError
from .priors import NormalPrior, PointMassPrior, Prior, Tail, exceedance_prob

logger = logging.getLogger(__name__)

TARGET_N = 48.75
STUDY_COLUMNS = ['n', 'sum_x', 'sum_y', 'beta_hat']
SYNTHETIC_STUDIES = os.path.join(os.path.dirname(__file__), 'data', 'synthetic_matched_pairs.csv')

# cost-ratio bounds as printed for n_bar = 1..7 at mu=1.99, sigma=0.4, z=1.96
REFERENCE_BOUNDS = pd.DataFrame({
    'n_bar': [1, 2, 3, 4, 5, 6, 7],
    'lower': [0.366, 0.266, 0.212, 0.180, 0.158, 0.142, 0.130],
    'upper': [0.596, 0.366, 0.266, 0.212, 0.180, 0.158, 0.142],
})


@dataclass
class MatchedPairsStudy:
    """Binary outcomes x_i, y_i of n subjects observed under two treatments."""
    n: int
    sum_x: int
    sum_y: int
    beta_hat: Optional[float] = None

    def __post_init__(self):
        if self.n < 2:
            raise InvalidArgumentError(f"A study needs at least 2 subjects, got n={self.n}.")
        for name, value in (('sum_x', self.sum_x), ('sum_y', self.sum_y)):
            if not 0 <= value <= self.n:
                raise InvalidArgumentError(f"{name}={value} must lie in [0, n={self.n}].")
        if self.beta_hat is None or (isinstance(self.beta_hat, float) and np.isnan(self.beta_hat)):
            self.beta_hat = (self.sum_x - self.sum_y) / self.n

    def to_dict(self) -> Dict:
        return {'n': self.n, 'sum_x': self.sum_x, 'sum_y': self.sum_y, 'beta_hat': self.beta_hat}


@dataclass
class SdBounds:
    sd_lb: float
    sd_ub: float

    @property
    def sd_mid(self) -> float:
        return 0.5 * (self.sd_lb + self.sd_ub)


def load_studies(path: str = SYNTHETIC_STUDIES) -> List[MatchedPairsStudy]:
    try:
        df = pd.read_csv(path)
    except (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise InvalidArgumentError(f"Cannot read studies file {path}: {exc}") from exc
    missing = [c for c in STUDY_COLUMNS[:3] if c not in df.columns]
    if missing:
        raise InvalidArgumentError(f"{path} is missing column(s) {missing}; expected header {','.join(STUDY_COLUMNS)}.")
    if 'beta_hat' not in df.columns:
        df['beta_hat'] = np.nan
    studies = []
    for i, row in enumerate(df.itertuples(index=False), start=1):
        try:
            beta = None if pd.isna(row.beta_hat) else float(row.beta_hat)
            studies.append(MatchedPairsStudy(int(row.n), int(row.sum_x), int(row.sum_y), beta))
        except (TypeError, ValueError) as exc:
            raise InvalidArgumentError(f"Row {i} of {path} is not a valid study: {exc}") from exc
    logger.info("Loaded %d studies from %s", len(studies), path)
    return studies


def matched_pairs_sd_bounds(study: MatchedPairsStudy) -> SdBounds:
    """Bounds on the sd of the paired differences x_i - y_i when only the margins are known.

    The cross term sum x_i y_i is unreported; it lies in [0, min(sum_x, sum_y)].
    """
    n = study.n
    numerator = study.sum_x + study.sum_y - n * study.beta_hat ** 2
    if numerator < 0:
        raise InconsistentSummaryError(
            f"Study with n={n}, sum_x={study.sum_x}, sum_y={study.sum_y} cannot have beta_hat={study.beta_hat}: "
            f"n*beta_hat^2 exceeds sum_x + sum_y."
        )
    lower = max(0.0, numerator - 2 * min(study.sum_x, study.sum_y))
    return SdBounds(float(np.sqrt(lower / (n - 1))), float(np.sqrt(numerator / (n - 1))))


def calibrate_prior(studies: Sequence[MatchedPairsStudy], target_n: float = TARGET_N) -> Prior:
    """Normal prior for the t-statistic of a study with ``target_n`` subjects."""
    if len(studies) < 2:
        raise InsufficientDataError(f"Calibration needs at least 2 studies, got {len(studies)}.")
    n = np.array([s.n for s in studies], dtype=float)
    t = np.array([np.sqrt(s.n) * s.beta_hat / matched_pairs_sd_bounds(s).sd_mid for s in studies])
    scaled = np.sqrt(target_n / n) * t
    weights = n / n.sum()
    mean = float(weights @ scaled)
    variance = float(weights @ (scaled - mean) ** 2)
    if np.ptp(scaled) == 0.0 or variance <= 0:
        logger.warning("Calibrated prior has zero dispersion; returning a point mass at %g", mean)
        return PointMassPrior(mean)
    return NormalPrior(mean, float(np.sqrt(variance)))


def _require_normal(prior: Prior) -> NormalPrior:
    if not isinstance(prior, NormalPrior):
        raise UnsupportedPriorError(f"Elicitation bounds need a normal prior, got {type(prior).__name__}.")
    return prior


def _next_study_prob(k: int, z: float, prior: NormalPrior) -> float:
    """E_H0[P(|X*_{k+1}| > z | X*_k)] when X*_{k+1} pools study k+1 into the first k."""
    scale = np.sqrt(1.0 + prior.variance + k)
    bound = np.sqrt(k + 1.0) * z
    return float(std_normal_sf((bound - prior.mean) / scale) + std_normal_cdf((-bound - prior.mean) / scale))


def elicitation_bounds(n_bar: int, z: float, prior: Prior) -> Tuple[float, float]:
    """Bounds on c/v implied by a researcher who stops after ``n_bar`` pooled studies."""
    prior = _require_normal(prior)
    if n_bar < 1:
        raise InvalidArgumentError(f"n_bar must be at least 1, got {n_bar}.")
    if z < 0:
        raise InvalidArgumentError(f"z must be non-negative, got {z}.")
    return _next_study_prob(n_bar, z, prior), _next_study_prob(n_bar - 1, z, prior)


@dataclass
class BoundsEstimate:
    lower: float
    lower_se: float
    upper: float
    upper_se: float


def _monte_carlo_prob(k: int, z: float, prior: NormalPrior, reps: int, stream: RandomStream) -> Tuple[float, float]:
    if k == 0:
        return float(exceedance_prob(prior, z, -z)), 0.0
    x = standard_normals(stream, reps)
    shift = np.sqrt(k) * x
    bound = np.sqrt(k + 1.0) * z
    probs = exceedance_prob(prior, bound - shift, -bound - shift, Tail.TWO_SIDED)
    return float(probs.mean()), float(probs.std(ddof=1) / np.sqrt(reps))


def elicitation_bounds_monte_carlo(n_bar: int, z: float, prior: Prior, reps: int = 100000,
                                   seed: int = 20200501) -> BoundsEstimate:
    """Both bounds by averaging the pooling-law conditional probability over null draws of X*_k."""
    prior = _require_normal(prior)
    if n_bar < 1:
        raise InvalidArgumentError(f"n_bar must be at least 1, got {n_bar}.")
    lower, lower_se = _monte_carlo_prob(n_bar, z, prior, reps, RandomStream(seed, (n_bar,)))
    upper, upper_se = _monte_carlo_prob(n_bar - 1, z, prior, reps, RandomStream(seed, (n_bar - 1,)))
    return BoundsEstimate(lower, lower_se, upper, upper_se)


def cost_ratio_bounds_table(z: float, prior: Prior, n_bar_max: int,
                            cost_ratio: Optional[float] = None) -> pd.DataFrame:
    """One row per n_bar with its bounds; ``brackets`` marks where lower < c/v <= upper."""
    if n_bar_max < 1:
        raise InvalidArgumentError(f"n_bar_max must be at least 1, got {n_bar_max}.")
    rows = []
    for n_bar in range(1, n_bar_max + 1):
        lower, upper = elicitation_bounds(n_bar, z, prior)
        rows.append({'n_bar': n_bar, 'lower': lower, 'upper': upper})
    table = pd.DataFrame(rows, columns=['n_bar', 'lower', 'upper'])
    if cost_ratio is not None:
        table['brackets'] = (table['lower'] < cost_ratio) & (cost_ratio <= table['upper'])
    return table


def implied_n_bar(table: pd.DataFrame, cost_ratio: float) -> Optional[int]:
    """The n_bar whose bounds bracket ``cost_ratio``; None when it falls outside the table."""
    hit = table[(table['lower'] < cost_ratio) & (cost_ratio <= table['upper'])]
    if hit.empty:
        logger.warning("Cost ratio %g is outside (%.6g, %.6g]; no n_bar in the table implies it",
                       cost_ratio, table['lower'].iloc[-1], table['upper'].iloc[0])
        return None
    return int(hit['n_bar'].iloc[0])


def reference_comparison(z: float, prior: Prior) -> pd.DataFrame:
    """Computed bounds next to the printed ones."""
    computed = cost_ratio_bounds_table(z, prior, len(REFERENCE_BOUNDS))
    out = computed.merge(REFERENCE_BOUNDS, on='n_bar', suffixes=('', '_reference'))
    out['lower_diff'] = out['lower'] - out['lower_reference']
    out['upper_diff'] = out['upper'] - out['upper_reference']
    return out
