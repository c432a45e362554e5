"""Correlation generators for the latent statistics of the general research process.

A generator maps a study count n to the n x n correlation matrix Omega_n of
(X*_1, ..., X*_n).  Every generator must be consistent across n: Omega_n is the
leading block of Omega_{n+1}.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from .errors import InvalidArgumentError


class OmegaGenerator(ABC):
    @abstractmethod
    def matrix(self, n: int) -> np.ndarray:
        pass

    def column(self, k: int) -> np.ndarray:
        """Correlations of study k+1 with studies 1..k."""
        return self.matrix(k + 1)[:k, k]

    @abstractmethod
    def to_dict(self) -> Dict:
        pass


@dataclass
class IdentityOmega(OmegaGenerator):
    """Independent samples."""

    def matrix(self, n: int) -> np.ndarray:
        return np.eye(n)

    def to_dict(self) -> Dict:
        return {'type': 'IdentityOmega'}

    @classmethod
    def from_dict(cls, d: Dict) -> 'IdentityOmega':
        return cls()


@dataclass
class PoolingOmega(OmegaGenerator):
    """Nested samples: corr(X*_i, X*_j) = sqrt(T_i / T_j) for i <= j, with T_i = i."""

    def matrix(self, n: int) -> np.ndarray:
        t = np.arange(1, n + 1, dtype=float)
        return np.sqrt(np.minimum.outer(t, t) / np.maximum.outer(t, t))

    def column(self, k: int) -> np.ndarray:
        return np.sqrt(np.arange(1, k + 1, dtype=float) / (k + 1))

    def to_dict(self) -> Dict:
        return {'type': 'PoolingOmega'}

    @classmethod
    def from_dict(cls, d: Dict) -> 'PoolingOmega':
        return cls()


@dataclass
class EquicorrelatedOmega(OmegaGenerator):
    rho: float

    def __post_init__(self):
        if not -1.0 < self.rho < 1.0:
            raise InvalidArgumentError(f"Correlation rho must lie in (-1, 1), got {self.rho}.")

    def _check(self, n: int):
        # positive definite only while rho > -1/(n-1)
        if n > 1 and self.rho <= -1.0 / (n - 1):
            raise InvalidArgumentError(
                f"rho={self.rho} gives a singular correlation matrix for {n} studies."
            )

    def matrix(self, n: int) -> np.ndarray:
        self._check(n)
        return (1.0 - self.rho) * np.eye(n) + self.rho * np.ones((n, n))

    def column(self, k: int) -> np.ndarray:
        self._check(k + 1)
        return np.full(k, float(self.rho))

    def to_dict(self) -> Dict:
        return {'type': 'EquicorrelatedOmega', 'rho': self.rho}

    @classmethod
    def from_dict(cls, d: Dict) -> 'EquicorrelatedOmega':
        return cls(d['rho'])


@dataclass(eq=False)
class ExplicitOmega(OmegaGenerator):
    values: List[List[float]] = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, ndmin=2)
        if arr.shape[0] != arr.shape[1] or not np.allclose(arr, arr.T, rtol=0.0, atol=1e-12):
            raise InvalidArgumentError(f"Explicit omega must be a symmetric square matrix, got shape {arr.shape}.")
        if not np.allclose(np.diag(arr), 1.0):
            raise InvalidArgumentError("Explicit omega must have a unit diagonal.")
        self._array = arr

    @property
    def size(self) -> int:
        return self._array.shape[0]

    def matrix(self, n: int) -> np.ndarray:
        if n > self.size:
            raise InvalidArgumentError(f"Explicit omega covers {self.size} studies; {n} were requested.")
        return self._array[:n, :n].copy()

    def to_dict(self) -> Dict:
        return {'type': 'ExplicitOmega', 'values': self._array.tolist()}

    @classmethod
    def from_dict(cls, d: Dict) -> 'ExplicitOmega':
        return cls(d['values'])


def create_omega(d: Dict) -> OmegaGenerator:
    typ = d['type']
    if typ == 'IdentityOmega':
        return IdentityOmega.from_dict(d)
    elif typ == 'PoolingOmega':
        return PoolingOmega.from_dict(d)
    elif typ == 'EquicorrelatedOmega':
        return EquicorrelatedOmega.from_dict(d)
    elif typ == 'ExplicitOmega':
        return ExplicitOmega.from_dict(d)
    raise ValueError(f"Unknown omega type: {typ}")
