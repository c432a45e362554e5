"""Normal-distribution primitives and the addressable random-number contract.

Every variate used by the simulator comes from a ``RandomStream``: a seed plus a
path of non-negative integers.  The stream for ``(seed, path)`` is a Philox
(counter-based) generator keyed by ``SeedSequence(seed, spawn_key=path)``, so a
substream is found by its address rather than by how many numbers were drawn
before it, and any worker layout reproduces the same numbers.
"""
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple, Union

import numpy as np
from scipy import special
from scipy.linalg import lapack

from .errors import FactorizationError, InvalidArgumentError

ArrayLike = Union[float, Sequence[float], np.ndarray]

_MAX_SEED = 2 ** 64


@dataclass(frozen=True)
class RandomStream:
    seed: int
    path: Tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < _MAX_SEED:
            raise InvalidArgumentError(f"Seed must be a 64-bit unsigned integer, got {self.seed}.")
        path = tuple(int(p) for p in self.path)
        if any(p < 0 for p in path):
            raise InvalidArgumentError(f"Stream path entries must be non-negative, got {path}.")
        object.__setattr__(self, 'seed', int(self.seed))
        object.__setattr__(self, 'path', path)

    def child(self, *indices: int) -> 'RandomStream':
        return RandomStream(self.seed, self.path + tuple(indices))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(seq))

    def to_dict(self) -> Dict:
        return {'seed': self.seed, 'path': list(self.path)}

    @classmethod
    def from_dict(cls, d: Dict) -> 'RandomStream':
        return cls(d['seed'], tuple(d.get('path', ())))


def _finite_array(x: ArrayLike, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be finite, got {x!r}.")
    return arr


def _unwrap(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


def std_normal_cdf(x: ArrayLike):
    """Phi(x), evaluated through the complementary error function."""
    return _unwrap(special.ndtr(_finite_array(x, 'x')))


def std_normal_sf(x: ArrayLike):
    """1 - Phi(x) without cancellation in the upper tail."""
    return _unwrap(special.ndtr(-_finite_array(x, 'x')))


def std_normal_pdf(x: ArrayLike):
    arr = _finite_array(x, 'x')
    return _unwrap(np.exp(-0.5 * arr * arr) / np.sqrt(2.0 * np.pi))


def std_normal_quantile(p: ArrayLike):
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise InvalidArgumentError(f"Quantile level must lie strictly inside (0, 1), got {p!r}.")
    return _unwrap(special.ndtri(arr))


def standard_normals(stream: RandomStream, size: int, offset: int = 0) -> np.ndarray:
    """Variates ``offset .. offset + size - 1`` of the stream."""
    if size < 0 or offset < 0:
        raise InvalidArgumentError(f"size and offset must be non-negative, got {size}, {offset}.")
    return stream.generator().standard_normal(offset + size)[offset:]


def sample_std_normal(stream: RandomStream) -> float:
    return float(stream.generator().standard_normal())


def cholesky_lower(cov: ArrayLike) -> np.ndarray:
    a = np.array(cov, dtype=float, ndmin=2)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"Covariance must be a square matrix, got shape {a.shape}.")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("Covariance entries must be finite.")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * scale):
        raise InvalidArgumentError("Covariance must be symmetric.")
    factor, info = lapack.dpotrf(np.asfortranarray(a), lower=1, clean=1)
    if info > 0:
        raise FactorizationError(pivot=int(info) - 1, size=a.shape[0])
    if info < 0:
        raise InvalidArgumentError(f"LAPACK rejected argument {-info} of the factorization.")
    return np.tril(factor)


def sample_mvn(mean: ArrayLike, cov: ArrayLike, stream: RandomStream) -> np.ndarray:
    mu = _finite_array(mean, 'mean').reshape(-1)
    lower = cholesky_lower(cov)
    if lower.shape[0] != mu.shape[0]:
        raise InvalidArgumentError(
            f"Mean has length {mu.shape[0]} but covariance is {lower.shape[0]}x{lower.shape[0]}."
        )
    zeta = standard_normals(stream, mu.shape[0])
    return mu + lower @ zeta
