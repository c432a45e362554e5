import numpy as np
import pytest

from iccv_simulator import (
    FactorizationError,
    InvalidArgumentError,
    RandomStream,
    cholesky_lower,
    sample_mvn,
    sample_std_normal,
    standard_normals,
    std_normal_cdf,
    std_normal_quantile,
)
from iccv_simulator.dist import std_normal_pdf, std_normal_sf


def test_stream_is_addressable():
    a = standard_normals(RandomStream(7, (3,)), 10)
    b = standard_normals(RandomStream(7, (3,)), 10)
    c = standard_normals(RandomStream(7, (4,)), 10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert RandomStream(7).child(3) == RandomStream(7, (3,))


def test_stream_offset_reads_later_variates():
    stream = RandomStream(11, (0,))
    full = standard_normals(stream, 8)
    assert np.array_equal(standard_normals(stream, 5, offset=3), full[3:])
    assert sample_std_normal(stream) == full[0]


def test_sequential_chunks_continue_the_sequence():
    stream = RandomStream(11, (2,))
    gen = stream.generator()
    chunks = np.concatenate([gen.standard_normal(3), gen.standard_normal(40), gen.standard_normal(1)])
    assert np.array_equal(chunks, standard_normals(stream, 44))


def test_stream_rejects_bad_addresses():
    with pytest.raises(InvalidArgumentError):
        RandomStream(-1)
    with pytest.raises(InvalidArgumentError):
        RandomStream(1, (0, -2))
    assert RandomStream.from_dict(RandomStream(5, (1, 2)).to_dict()) == RandomStream(5, (1, 2))


def test_normal_functions():
    assert std_normal_cdf(1.96) == pytest.approx(0.9750021, abs=1e-7)
    assert std_normal_sf(1.96) == pytest.approx(0.0249979, abs=1e-7)
    assert std_normal_sf(10.0) > 0
    assert std_normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)
    assert std_normal_pdf(0.0) == pytest.approx(1 / np.sqrt(2 * np.pi))
    assert np.allclose(std_normal_cdf(np.array([-1.0, 0.0])), [0.1586553, 0.5], atol=1e-7)


def test_normal_functions_validate_input():
    with pytest.raises(InvalidArgumentError):
        std_normal_quantile(0.0)
    with pytest.raises(InvalidArgumentError):
        std_normal_quantile(1.0)
    with pytest.raises(InvalidArgumentError):
        std_normal_cdf(np.nan)


def test_cholesky_lower():
    a = np.array([[4.0, 2.0], [2.0, 3.0]])
    lower = cholesky_lower(a)
    assert np.allclose(lower @ lower.T, a)
    assert lower[0, 1] == 0.0


def test_cholesky_reports_the_failing_pivot():
    with pytest.raises(FactorizationError) as info:
        cholesky_lower([[1.0, 2.0], [2.0, 1.0]])
    assert info.value.pivot == 1
    with pytest.raises(InvalidArgumentError):
        cholesky_lower([[1.0, 0.5], [0.0, 1.0]])


def test_cholesky_accepts_near_singular_matrix():
    r = 1.0 - 1e-10
    lower = cholesky_lower([[1.0, r], [r, 1.0]])
    assert lower[1, 1] > 0


def test_sample_mvn_with_diagonal_covariance():
    stream = RandomStream(3, (1,))
    x = sample_mvn([1.0, -2.0], np.diag([4.0, 9.0]), stream)
    zeta = standard_normals(stream, 2)
    assert np.allclose(x, [1.0 + 2.0 * zeta[0], -2.0 + 3.0 * zeta[1]])
    with pytest.raises(InvalidArgumentError):
        sample_mvn([0.0], np.eye(2), stream)


def test_draws_are_standard_normal():
    draws = standard_normals(RandomStream(1), 10 ** 6)
    assert abs(draws.mean()) <= 0.005
    assert draws.var() == pytest.approx(1.0, abs=0.01)

    firsts = np.array([sample_std_normal(RandomStream(1, (i,))) for i in range(10000)])
    assert abs(firsts.mean()) <= 0.04
    assert firsts.var() == pytest.approx(1.0, abs=0.06)


def test_distinct_paths_are_uncorrelated():
    a = standard_normals(RandomStream(5, (0,)), 10 ** 5)
    b = standard_normals(RandomStream(5, (1,)), 10 ** 5)
    c = standard_normals(RandomStream(5, (0, 1)), 10 ** 5)
    assert abs(np.corrcoef(a, b)[0, 1]) <= 0.02
    assert abs(np.corrcoef(a, c)[0, 1]) <= 0.02


@pytest.mark.slow
def test_sample_mvn_covariance():
    cov = np.array([[1.0, 0.5], [0.5, 1.0]])
    root = RandomStream(9)
    draws = np.array([sample_mvn([0.0, 0.0], cov, root.child(i)) for i in range(10 ** 5)])
    assert np.allclose(np.cov(draws, rowvar=False), cov, atol=0.02)
    assert np.allclose(draws.mean(axis=0), 0.0, atol=0.02)


def test_cdf_symmetry_and_inverse():
    x = np.linspace(-8.0, 8.0, 1601)
    assert np.allclose(std_normal_cdf(x) + std_normal_cdf(-x), 1.0, rtol=0.0, atol=1e-12)
    lower = x[x <= 0]
    assert np.allclose(std_normal_quantile(std_normal_cdf(lower)), lower, rtol=0.0, atol=1e-8)
    # above zero Phi(x) rounds to within an ulp of 1, so the inverse goes through the upper tail
    upper = x[x >= 0]
    assert np.allclose(-std_normal_quantile(std_normal_sf(upper)), upper, rtol=0.0, atol=1e-8)
    assert np.all(np.diff(std_normal_cdf(x)) >= 0)


def test_cdf_deep_in_the_tail():
    value = std_normal_cdf(-38.0)
    assert 0.0 <= value < 1e-300
