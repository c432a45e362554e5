import pytest

from iccv_simulator import (
    ConstantCost,
    Incentives,
    NormalPrior,
    PointMassPrior,
    PowerLawCost,
)


@pytest.fixture
def calibrated_prior():
    return NormalPrior(1.99, 0.40)


@pytest.fixture
def null_prior():
    return PointMassPrior(0.0)


@pytest.fixture
def increasing_incentives():
    # c(n) = 933 n, v = 5000
    return Incentives(5000.0, PowerLawCost(933.0, 1.0))


@pytest.fixture
def single_study_incentives():
    # v R(z) < c(2) for every z >= 1.96 under the calibrated prior
    return Incentives(5000.0, PowerLawCost(2000.0, 1.0))


@pytest.fixture
def constant_incentives():
    return Incentives(5000.0, ConstantCost(933.0))
