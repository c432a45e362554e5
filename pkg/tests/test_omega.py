import numpy as np
import pytest

from iccv_simulator import (
    EquicorrelatedOmega,
    ExplicitOmega,
    IdentityOmega,
    InvalidArgumentError,
    PoolingOmega,
    create_omega,
)


def test_pooling_omega():
    m = PoolingOmega().matrix(3)
    assert m[0, 1] == pytest.approx(np.sqrt(1 / 2))
    assert m[0, 2] == pytest.approx(np.sqrt(1 / 3))
    assert m[1, 2] == pytest.approx(np.sqrt(2 / 3))
    assert np.allclose(np.diag(m), 1.0)


def test_columns_agree_with_matrices():
    generators = [IdentityOmega(), PoolingOmega(), EquicorrelatedOmega(0.3),
                  ExplicitOmega(PoolingOmega().matrix(6).tolist())]
    for gen in generators:
        for k in range(1, 6):
            assert np.allclose(gen.column(k), gen.matrix(k + 1)[:k, k])
            assert np.allclose(gen.matrix(k), gen.matrix(k + 1)[:k, :k])


def test_equicorrelated_bounds():
    assert EquicorrelatedOmega(-0.4).matrix(2)[0, 1] == -0.4
    with pytest.raises(InvalidArgumentError):
        EquicorrelatedOmega(-0.6).matrix(3)
    with pytest.raises(InvalidArgumentError):
        EquicorrelatedOmega(1.0)


def test_explicit_omega():
    gen = ExplicitOmega([[1.0, 0.5], [0.5, 1.0]])
    assert gen.size == 2
    with pytest.raises(InvalidArgumentError):
        gen.matrix(3)
    with pytest.raises(InvalidArgumentError):
        ExplicitOmega([[1.0, 0.5], [0.4, 1.0]])
    with pytest.raises(InvalidArgumentError):
        ExplicitOmega([[2.0, 0.0], [0.0, 1.0]])


def test_create_omega():
    assert create_omega({'type': 'EquicorrelatedOmega', 'rho': 0.2}) == EquicorrelatedOmega(0.2)
    assert isinstance(create_omega(PoolingOmega().to_dict()), PoolingOmega)
    gen = create_omega(ExplicitOmega([[1.0, 0.1], [0.1, 1.0]]).to_dict())
    assert np.allclose(gen.matrix(2), [[1.0, 0.1], [0.1, 1.0]])
    with pytest.raises(ValueError):
        create_omega({'type': 'BandedOmega'})
