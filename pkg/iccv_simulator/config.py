"""Run configuration: one flat set of parameters, defaulting to the calibrated inputs."""
from dataclasses import asdict, dataclass, fields
import json
import logging
from typing import Any, Dict, List, Optional, Union

from .behavior import (
    DEFAULT_CAP,
    BaselineModel,
    BehaviorModel,
    GeneralModel,
    IncreasingCostModel,
    LearningModel,
    PoolingModel,
)
from .errors import ConfigError, InvalidArgumentError
from .incentives import ConstantCost, CostSchedule, Incentives, PowerLawCost
from .omega import EquicorrelatedOmega, ExplicitOmega, IdentityOmega, OmegaGenerator, PoolingOmega
from .priors import NormalPrior, PointMassPrior, Prior, Tail, UniformPrior, as_tail
from .solver import ZGrid, classical_quantile

logger = logging.getLogger(__name__)

MODELS = {
    'baseline': BaselineModel,
    'increasing_cost': IncreasingCostModel,
    'learning': LearningModel,
    'pooling': PoolingModel,
    'general': GeneralModel,
}
PRIORS = ('normal', 'uniform', 'point_mass')
COSTS = ('auto', 'constant', 'power_law')
OMEGAS = ('identity', 'pooling', 'equicorrelated', 'explicit')
SWEEP_AXES = ('prior_mean', 'prior_sd', 'cost_ratio', 'epsilon')
FORMATS = ('csv', 'json')


def _name(value: str) -> str:
    return str(value).strip().lower().replace('-', '_')


def _number(key: str, value: Any, kind: type) -> Union[int, float]:
    if isinstance(value, bool):
        raise ConfigError(f"{key} must be a number, got {value!r}.", key)
    if isinstance(value, kind):
        return value
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {value!r}.", key) from None
    if kind is int:
        if not number.is_integer():
            raise ConfigError(f"{key} must be an integer, got {value!r}.", key)
        return int(number)
    return number


# field annotation -> (number type, None allowed)
NUMERIC_FIELDS = {
    int: (int, False),
    float: (float, False),
    Optional[int]: (int, True),
    Optional[float]: (float, True),
}


@dataclass
class RunConfig:
    model: str = 'increasing_cost'
    prior: str = 'normal'
    prior_mean: float = 1.99
    prior_sd: float = 0.40
    prior_low: float = -1.0
    prior_high: float = 1.0
    prior_theta: float = 0.0
    v: float = 5000.0
    cost: str = 'auto'
    c0: float = 933.0
    epsilon: float = 1.0
    tail: str = 'two_sided'
    alpha: float = 0.05
    reps: int = 100000
    seed: int = 20200501
    cap: int = DEFAULT_CAP
    workers: int = 1
    z: float = 1.96
    theta_true: float = 0.0
    z_lo: Optional[float] = None
    z_hi: float = 6.0
    z_step: float = 0.005
    lambdas: Union[str, List[float]] = 'ones'
    omega: str = 'identity'
    omega_matrix: Optional[List[List[float]]] = None
    rho: float = 0.0
    sophistication: float = 1.0
    jitter: float = 1e-8
    sweep_axis: str = 'cost_ratio'
    sweep_lo: float = 0.05
    sweep_hi: float = 1.0
    sweep_points: int = 5
    studies: Optional[str] = None
    target_n: float = 48.75
    n_bar: int = 4
    n_bar_max: int = 7
    cost_ratio: Optional[float] = None
    format: str = 'csv'
    out: Optional[str] = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        for f in fields(self):
            if f.type not in NUMERIC_FIELDS:
                continue
            kind, optional = NUMERIC_FIELDS[f.type]
            value = getattr(self, f.name)
            if value is not None or not optional:
                setattr(self, f.name, _number(f.name, value, kind))
        self.model = _name(self.model)
        self.prior = _name(self.prior)
        self.cost = _name(self.cost)
        self.tail = _name(self.tail)
        self.omega = _name(self.omega)
        self.sweep_axis = _name(self.sweep_axis)
        choices = (('model', tuple(MODELS)), ('prior', PRIORS), ('cost', COSTS), ('omega', OMEGAS),
                   ('sweep_axis', SWEEP_AXES), ('format', FORMATS), ('tail', tuple(t.value for t in Tail)))
        for key, allowed in choices:
            if getattr(self, key) not in allowed:
                raise ConfigError(f"{key} must be one of {', '.join(allowed)}; got {getattr(self, key)!r}.", key)
        if self.reps < 1:
            raise ConfigError(f"reps must be positive, got {self.reps}.", 'reps')
        if self.cap < 1:
            raise ConfigError(f"cap must be at least 1, got {self.cap}.", 'cap')
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}.", 'workers')
        if self.sweep_points < 1:
            raise ConfigError(f"sweep_points must be at least 1, got {self.sweep_points}.", 'sweep_points')
        self._validate_lambdas()
        self._validate_omega_matrix()

    def _validate_lambdas(self):
        if isinstance(self.lambdas, str):
            if _name(self.lambdas) not in ('ones', 'sqrt'):
                raise ConfigError(f"lambdas must be 'ones', 'sqrt' or a list of numbers; got {self.lambdas!r}.",
                                  'lambdas')
            self.lambdas = _name(self.lambdas)
        elif not isinstance(self.lambdas, (list, tuple)) or not self.lambdas:
            raise ConfigError(f"lambdas must be 'ones', 'sqrt' or a list of numbers; got {self.lambdas!r}.",
                              'lambdas')
        else:
            self.lambdas = [_number('lambdas', v, float) for v in self.lambdas]

    def _validate_omega_matrix(self):
        if self.omega_matrix is None:
            if self.omega == 'explicit':
                raise ConfigError("omega 'explicit' needs omega_matrix.", 'omega_matrix')
            return
        rows = self.omega_matrix
        if not isinstance(rows, (list, tuple)) or not all(isinstance(r, (list, tuple)) for r in rows):
            raise ConfigError(f"omega_matrix must be a list of rows; got {rows!r}.", 'omega_matrix')
        self.omega_matrix = [[_number('omega_matrix', v, float) for v in row] for row in rows]
        try:
            ExplicitOmega(self.omega_matrix)
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc), 'omega_matrix') from exc
        # the stopping rule at the cap looks one study ahead
        if self.omega == 'explicit' and self.cap >= len(self.omega_matrix):
            raise ConfigError(f"omega_matrix covers {len(self.omega_matrix)} studies; cap must be at most "
                              f"{len(self.omega_matrix) - 1}, got {self.cap}.", 'cap')

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> 'RunConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"Unknown config key(s): {', '.join(unknown)}.", unknown[0])
        return cls(**d)

    def updated(self, **changes) -> 'RunConfig':
        d = self.to_dict()
        d.update({k: v for k, v in changes.items() if v is not None})
        return RunConfig.from_dict(d)

    def save_json(self, filepath: str):
        with open(filepath, 'w') as f:
            json.dump(self.to_dict(), f, indent=4)

    @staticmethod
    def read_json(filepath: str) -> Dict[str, Any]:
        try:
            with open(filepath, 'r') as f:
                d = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"Cannot read config file {filepath}: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError(f"Config file {filepath} must hold a JSON object.")
        logger.info("Loaded config from %s", filepath)
        return d

    @classmethod
    def load_json(cls, filepath: str) -> 'RunConfig':
        return cls.from_dict(cls.read_json(filepath))

    def build_tail(self) -> Tail:
        return as_tail(self.tail)

    def build_prior(self) -> Prior:
        if self.prior == 'normal':
            return NormalPrior(self.prior_mean, self.prior_sd)
        elif self.prior == 'uniform':
            return UniformPrior(self.prior_low, self.prior_high)
        return PointMassPrior(self.prior_theta)

    def cost_kind(self) -> str:
        if self.cost != 'auto':
            return self.cost
        return 'power_law' if self.model == 'increasing_cost' else 'constant'

    def build_cost(self) -> CostSchedule:
        if self.cost_kind() == 'power_law':
            return PowerLawCost(self.c0, self.epsilon)
        return ConstantCost(self.c0)

    def build_incentives(self) -> Incentives:
        return Incentives(self.v, self.build_cost())

    def build_omega(self) -> OmegaGenerator:
        if self.omega == 'pooling':
            return PoolingOmega()
        elif self.omega == 'explicit':
            return ExplicitOmega(self.omega_matrix)
        elif self.omega == 'equicorrelated':
            return EquicorrelatedOmega(self.rho)
        return IdentityOmega()

    def build_model(self) -> BehaviorModel:
        if self.model == 'general':
            return GeneralModel(self.lambdas, self.build_omega(), self.sophistication, self.jitter)
        return MODELS[self.model]()

    def build_grid(self) -> ZGrid:
        floor = classical_quantile(self.alpha, self.build_tail())
        lo = floor if self.z_lo is None else self.z_lo
        return ZGrid(lo, max(self.z_hi, lo), self.z_step)
