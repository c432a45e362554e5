from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict

import numpy as np

from .errors import InvalidArgumentError, UnsupportedModelError


class CostSchedule(ABC):
    """Cost c(n) of conducting the n-th study."""

    @abstractmethod
    def cost(self, n):
        pass

    @abstractmethod
    def to_dict(self) -> Dict:
        pass

    def inverse(self, budget: float) -> float:
        raise UnsupportedModelError(f"{type(self).__name__} has no inverse.")


@dataclass
class ConstantCost(CostSchedule):
    c: float

    def __post_init__(self):
        if not (np.isfinite(self.c) and self.c >= 0):
            raise InvalidArgumentError(f"Constant cost must be finite and non-negative, got {self.c}.")

    def cost(self, n):
        return np.full(np.shape(n), float(self.c)) if np.ndim(n) else float(self.c)

    def to_dict(self) -> Dict:
        return {'type': 'ConstantCost', 'c': self.c}

    @classmethod
    def from_dict(cls, d: Dict) -> 'ConstantCost':
        return cls(d['c'])


@dataclass
class PowerLawCost(CostSchedule):
    """c(n) = c0 * n**epsilon."""
    c0: float
    epsilon: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.c0) and self.c0 > 0):
            raise InvalidArgumentError(f"c0 must be positive, got {self.c0}.")
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise InvalidArgumentError(f"epsilon must be positive, got {self.epsilon}.")

    def cost(self, n):
        value = self.c0 * np.power(np.asarray(n, dtype=float), self.epsilon)
        return float(value) if np.ndim(value) == 0 else value

    def inverse(self, budget: float) -> float:
        if budget <= 0:
            return 0.0
        return float((budget / self.c0) ** (1.0 / self.epsilon))

    def to_dict(self) -> Dict:
        return {'type': 'PowerLawCost', 'c0': self.c0, 'epsilon': self.epsilon}

    @classmethod
    def from_dict(cls, d: Dict) -> 'PowerLawCost':
        return cls(d['c0'], d.get('epsilon', 1.0))


def create_cost_schedule(d: Dict) -> CostSchedule:
    typ = d['type']
    if typ == 'ConstantCost':
        return ConstantCost.from_dict(d)
    elif typ == 'PowerLawCost':
        return PowerLawCost.from_dict(d)
    raise ValueError(f"Unknown cost schedule type: {typ}")


@dataclass
class Incentives:
    v: float
    cost: CostSchedule

    def __post_init__(self):
        if not (np.isfinite(self.v) and self.v > 0):
            raise InvalidArgumentError(f"Publication payoff v must be positive, got {self.v}.")

    def cost_ratio(self, n):
        """c(n) / v."""
        return self.cost.cost(n) / self.v

    def to_dict(self) -> Dict:
        return {'v': self.v, 'cost': self.cost.to_dict()}

    @classmethod
    def from_dict(cls, d: Dict) -> 'Incentives':
        return cls(d['v'], create_cost_schedule(d['cost']))
