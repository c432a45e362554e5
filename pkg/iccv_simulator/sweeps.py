import logging
from typing import Dict, List

import numpy as np
import pandas as pd

from .config import SWEEP_AXES, RunConfig
from .errors import InvalidArgumentError, SearchFailureError
from .solver import estimate_size, find_iccv

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['axis', 'value', 'z', 'size_at_z', 'size_se', 'z_star', 'iccv_size', 'iccv_se',
                 'nonzero_power', 'mean_studies']


def axis_values(lo: float, hi: float, points: int) -> np.ndarray:
    if points < 1:
        raise InvalidArgumentError(f"A sweep needs at least one point, got {points}.")
    if points == 1:
        return np.array([float(lo)])
    return np.linspace(lo, hi, points)


def config_at(base: RunConfig, axis: str, value: float) -> RunConfig:
    """The base configuration with one parameter moved to ``value``."""
    if axis == 'prior_mean':
        return base.updated(prior_mean=value)
    elif axis == 'prior_sd':
        return base.updated(prior_sd=value)
    elif axis == 'cost_ratio':
        return base.updated(c0=value * base.v)
    elif axis == 'epsilon':
        return base.updated(epsilon=value)
    raise InvalidArgumentError(f"Unknown sweep axis: {axis!r}. Use one of {', '.join(SWEEP_AXES)}.")


def sweep_point(cfg: RunConfig, axis: str, value: float) -> Dict:
    model, prior = cfg.build_model(), cfg.build_prior()
    incentives, tail = cfg.build_incentives(), cfg.build_tail()
    size = estimate_size(model, prior, incentives, cfg.z, tail, cfg.reps, cfg.seed, cfg.cap, cfg.workers)
    row = {'axis': axis, 'value': float(value), 'z': cfg.z, 'size_at_z': size.size, 'size_se': size.std_error,
           'z_star': np.nan, 'iccv_size': np.nan, 'iccv_se': np.nan, 'nonzero_power': False,
           'mean_studies': np.nan}
    try:
        result = find_iccv(model, prior, incentives, tail, cfg.alpha, cfg.reps, cfg.seed, cfg.build_grid(),
                           cfg.cap, cfg.workers)
    except SearchFailureError as exc:
        logger.warning("%s=%g: %s", axis, value, exc)
        return row
    row.update({'z_star': result.z_star, 'iccv_size': result.size_at_z.size,
                'iccv_se': result.size_at_z.std_error, 'nonzero_power': result.nonzero_power,
                'mean_studies': result.mean_studies})
    return row


def sweep(axis: str, lo: float, hi: float, points: int, base: RunConfig) -> pd.DataFrame:
    """Size at ``base.z`` and the ICCV across one parameter, with the same seed at every value."""
    if axis not in SWEEP_AXES:
        raise InvalidArgumentError(f"Unknown sweep axis: {axis!r}. Use one of {', '.join(SWEEP_AXES)}.")
    rows: List[Dict] = []
    for value in axis_values(lo, hi, points):
        rows.append(sweep_point(config_at(base, axis, value), axis, value))
        logger.info("Sweep %s=%g done", axis, value)
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
