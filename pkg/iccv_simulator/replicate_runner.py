"""Block-wise Monte Carlo engine for many researcher trajectories at once.

Replicate r is driven by ``RandomStream(seed, (r,))`` and study i of it uses variate i
of that stream, exactly as ``simulate_trajectory`` does.  Replicates are cut into
fixed blocks, so tallies depend on neither the worker count nor the order in which
blocks finish.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .behavior import BehaviorModel, conducts_study
from .dist import RandomStream
from .errors import InvalidArgumentError
from .incentives import Incentives
from .priors import Prior, Tail, as_tail, rejection_prob

logger = logging.getLogger(__name__)

BLOCK_SIZE = 16384
BASE_WIDTH = 32
MIN_REPS = 1000

# columns of a tally row
REJECTED, CAPPED, STUDIES = 0, 1, 2


class NoiseBlock:
    """Innovations of replicates ``start .. stop-1``.

    The first ``width`` variates of every row are held in one matrix; rows that run
    longer extend privately from their own generator.
    """

    def __init__(self, seed: int, start: int, stop: int, width: int = BASE_WIDTH):
        self.width = width
        self._gens = [RandomStream(seed, (r,)).generator() for r in range(start, stop)]
        self._base = np.empty((len(self._gens), width))
        for i, gen in enumerate(self._gens):
            self._base[i] = gen.standard_normal(width)
        self._extra: Dict[int, np.ndarray] = {}

    @property
    def rows(self) -> int:
        return len(self._gens)

    def _extended(self, i: int, length: int) -> np.ndarray:
        extra = self._extra.get(i, np.zeros(0))
        if extra.size < length:
            more = max(length - extra.size, extra.size, self.width)
            extra = np.concatenate([extra, self._gens[i].standard_normal(more)])
            self._extra[i] = extra
        return extra

    def columns(self, lo: int, hi: int, rows: np.ndarray) -> np.ndarray:
        """Variates ``lo .. hi-1`` for the given block rows."""
        out = np.empty((len(rows), hi - lo))
        split = min(hi, self.width)
        if lo < split:
            out[:, :split - lo] = self._base[rows, lo:split]
        if hi > self.width:
            first = max(lo, self.width)
            for j, i in enumerate(rows):
                out[j, first - lo:] = self._extended(int(i), hi - self.width)[first - self.width:hi - self.width]
        return out

    def column(self, n: int, rows: np.ndarray) -> np.ndarray:
        return self.columns(n - 1, n, rows)[:, 0]


@dataclass
class BlockOutcome:
    n_studies: np.ndarray
    rejected: np.ndarray
    capped: np.ndarray

    def tally(self) -> np.ndarray:
        return np.array([self.rejected.sum(), self.capped.sum(), self.n_studies.sum()], dtype=np.int64)


def _study_limit(prior: Prior, incentives: Incentives, z: float, tail: Tail, cap: int) -> Tuple[int, bool]:
    """Studies a history-free researcher will conduct before stopping, and whether that is the cap."""
    prob = rejection_prob(prior, z, tail)
    go = conducts_study(prob, incentives, np.arange(1, cap + 2))
    refusals = np.flatnonzero(~go)
    if refusals.size == 0:
        return cap, True
    return int(refusals[0]), False


def _simulate_history_free(model, prior, incentives, tail, theta, z, cap, noise: NoiseBlock) -> BlockOutcome:
    m = noise.rows
    limit, capped_at_limit = _study_limit(prior, incentives, z, tail, cap)
    n_studies = np.full(m, limit, dtype=np.int64)
    rejected = np.zeros(m, dtype=bool)
    active = np.arange(m)
    k = 0
    while k < limit and active.size:
        hi = min(limit, k + BASE_WIDTH)
        # history-free models draw iid N(theta, 1)
        x = theta + noise.columns(k, hi, active)
        hit = (np.abs(x) if tail.two_sided else x) >= z
        any_hit = hit.any(axis=1)
        n_studies[active[any_hit]] = k + hit[any_hit].argmax(axis=1) + 1
        rejected[active[any_hit]] = True
        active = active[~any_hit]
        k = hi
    capped = np.zeros(m, dtype=bool)
    if capped_at_limit:
        capped[active] = True
    return BlockOutcome(n_studies, rejected, capped)


def simulate_block(model: BehaviorModel, prior: Prior, incentives: Incentives, tail: Tail, theta: float,
                   z: float, cap: int, noise: NoiseBlock) -> BlockOutcome:
    """Every row of ``noise`` run through the stopping rule at critical value ``z``."""
    if model.history_independent:
        return _simulate_history_free(model, prior, incentives, tail, theta, z, cap, noise)
    m = noise.rows
    n_studies = np.zeros(m, dtype=np.int64)
    rejected = np.zeros(m, dtype=bool)
    capped = np.zeros(m, dtype=bool)
    active = np.arange(m)
    state = model.new_state(m)
    reported = np.zeros(m)
    for n in range(1, cap + 2):
        if active.size == 0:
            break
        go = conducts_study(model.continue_prob(prior, state, z, tail, n), incentives, n)
        n_studies[active[~go]] = n - 1
        active, state, reported = active[go], state[go], reported[go]
        if n == cap + 1:
            n_studies[active] = cap
            capped[active] = True
            break
        x = model.draw(state, theta, noise.column(n, active), n)
        state = model.observe(state, x, n)
        value = np.abs(x) if tail.two_sided else x
        reported = value if n == 1 else np.maximum(reported, value)
        hit = reported >= z
        n_studies[active[hit]] = n
        rejected[active[hit]] = True
        active, state, reported = active[~hit], state[~hit], reported[~hit]
    return BlockOutcome(n_studies, rejected, capped)


@dataclass
class BlockJob:
    model: BehaviorModel
    prior: Prior
    incentives: Incentives
    tail: Tail
    theta: float
    z_values: Tuple[float, ...]
    cap: int
    seed: int
    reps: int


def _run_block(job: BlockJob, index: int) -> np.ndarray:
    start = index * BLOCK_SIZE
    stop = min(job.reps, start + BLOCK_SIZE)
    noise = NoiseBlock(job.seed, start, stop)
    out = np.zeros((len(job.z_values), 3), dtype=np.int64)
    for j, z in enumerate(job.z_values):
        out[j] = simulate_block(job.model, job.prior, job.incentives, job.tail, job.theta, z, job.cap, noise).tally()
    logger.debug("Block %d: replicates %d..%d done", index, start, stop - 1)
    return out


class ReplicateRunner:
    """Runs a job over all its blocks and sums the integer tallies."""

    def __init__(self, workers: int = 1):
        if workers < 1:
            raise InvalidArgumentError(f"workers must be at least 1, got {workers}.")
        self.workers = workers

    def run(self, job: BlockJob) -> np.ndarray:
        if job.reps < MIN_REPS:
            raise InvalidArgumentError(f"reps must be at least {MIN_REPS}, got {job.reps}.")
        if job.cap < 1:
            raise InvalidArgumentError(f"cap must be at least 1, got {job.cap}.")
        job.model.check_prior(job.prior)
        n_blocks = -(-job.reps // BLOCK_SIZE)
        run_func = partial(_run_block, job)
        if self.workers == 1 or n_blocks == 1:
            parts: List[np.ndarray] = [run_func(i) for i in range(n_blocks)]
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as executor:
                parts = list(executor.map(run_func, range(n_blocks)))
        return np.sum(parts, axis=0)


def tally_outcomes(model: BehaviorModel, prior: Prior, incentives: Incentives, tail: Tail, theta: float,
                   z_values: Sequence[float], reps: int, seed: int, cap: int, workers: int = 1) -> np.ndarray:
    """Integer tallies (rejected, capped, total studies) per z under common random numbers."""
    job = BlockJob(model, prior, incentives, as_tail(tail), float(theta), tuple(float(z) for z in z_values),
                   int(cap), int(seed), int(reps))
    return ReplicateRunner(workers).run(job)
