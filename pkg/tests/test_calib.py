from itertools import combinations

import numpy as np
import pytest

from iccv_simulator import (
    InconsistentSummaryError,
    InsufficientDataError,
    InvalidArgumentError,
    MatchedPairsStudy,
    NormalPrior,
    PointMassPrior,
    REFERENCE_BOUNDS,
    UnsupportedPriorError,
    calibrate_prior,
    cost_ratio_bounds_table,
    elicitation_bounds,
    elicitation_bounds_monte_carlo,
    implied_n_bar,
    load_studies,
    matched_pairs_sd_bounds,
    reference_comparison,
)


def test_sd_bounds_example():
    bounds = matched_pairs_sd_bounds(MatchedPairsStudy(10, 6, 3))
    assert bounds.sd_lb == pytest.approx(0.483, abs=1e-3)
    assert bounds.sd_ub == pytest.approx(0.949, abs=1e-3)
    assert bounds.sd_mid == pytest.approx(0.716, abs=1e-3)


def test_sd_bounds_edges():
    same = matched_pairs_sd_bounds(MatchedPairsStudy(10, 4, 4))
    assert same.sd_lb == 0.0
    no_y = matched_pairs_sd_bounds(MatchedPairsStudy(10, 4, 0))
    assert no_y.sd_lb == pytest.approx(no_y.sd_ub)


def test_sd_bounds_cover_every_arrangement():
    for n in range(2, 13):
        for sum_x in range(n + 1):
            x = np.array([1] * sum_x + [0] * (n - sum_x))
            for sum_y in range(n + 1):
                sds = []
                for ones in combinations(range(n), sum_y):
                    y = np.zeros(n, dtype=int)
                    y[list(ones)] = 1
                    sds.append(np.std(x - y, ddof=1))
                bounds = matched_pairs_sd_bounds(MatchedPairsStudy(n, sum_x, sum_y))
                assert min(sds) == pytest.approx(bounds.sd_lb, abs=1e-9)
                assert max(sds) <= bounds.sd_ub + 1e-9
                if sum_x + sum_y <= n:
                    assert max(sds) == pytest.approx(bounds.sd_ub, abs=1e-9)


def test_inconsistent_summary():
    with pytest.raises(InconsistentSummaryError):
        matched_pairs_sd_bounds(MatchedPairsStudy(10, 1, 0, beta_hat=0.9))
    with pytest.raises(InvalidArgumentError):
        MatchedPairsStudy(10, 11, 0)
    with pytest.raises(InvalidArgumentError):
        MatchedPairsStudy(1, 1, 0)


def test_load_studies_default_fixture():
    studies = load_studies()
    assert len(studies) == 4
    assert studies[0] == MatchedPairsStudy(48, 24, 17)
    assert studies[0].beta_hat == pytest.approx(7 / 48)


def test_load_studies_from_file(tmp_path):
    path = tmp_path / 'studies.csv'
    path.write_text('n,sum_x,sum_y,beta_hat\n20,10,4,\n30,12,9,0.1\n')
    studies = load_studies(str(path))
    assert studies[0].beta_hat == pytest.approx(0.3)
    assert studies[1].beta_hat == 0.1

    bad = tmp_path / 'bad.csv'
    bad.write_text('n,successes\n20,10\n')
    with pytest.raises(InvalidArgumentError):
        load_studies(str(bad))


def test_calibrate_prior_from_fixture():
    prior = calibrate_prior(load_studies())
    assert isinstance(prior, NormalPrior)
    assert prior.mean == pytest.approx(1.99, abs=0.01)
    assert prior.std == pytest.approx(0.40, abs=0.01)


def test_calibrate_prior_edges():
    study = MatchedPairsStudy(40, 20, 10)
    prior = calibrate_prior([study, study])
    assert isinstance(prior, PointMassPrior)
    with pytest.raises(InsufficientDataError):
        calibrate_prior([study])

    # at the studies' own size the prior mean is the n-weighted mean t-statistic
    studies = [MatchedPairsStudy(40, 20, 10), MatchedPairsStudy(40, 15, 12)]
    t = [np.sqrt(s.n) * s.beta_hat / matched_pairs_sd_bounds(s).sd_mid for s in studies]
    prior = calibrate_prior(studies, target_n=40)
    assert prior.mean == pytest.approx(np.mean(t))
    assert prior.std == pytest.approx(np.std(t))


def test_elicitation_bounds(calibrated_prior):
    lower, upper = elicitation_bounds(4, 1.96, calibrated_prior)
    assert lower == pytest.approx(0.1486, abs=2e-3)
    assert upper == pytest.approx(0.1739, abs=2e-3)
    for n_bar in range(2, 11):
        assert elicitation_bounds(n_bar, 1.96, calibrated_prior)[1] == \
            elicitation_bounds(n_bar - 1, 1.96, calibrated_prior)[0]


def test_elicitation_bounds_shape(calibrated_prior):
    table = cost_ratio_bounds_table(1.96, calibrated_prior, 7)
    assert np.all(np.diff(table['lower']) < 0)
    assert np.all(table['lower'] < table['upper'])
    assert elicitation_bounds(3, 2.5, calibrated_prior)[0] < elicitation_bounds(3, 1.96, calibrated_prior)[0]


def test_elicitation_under_a_null_prior():
    lower, upper = elicitation_bounds(1, 1.96, NormalPrior(0.0, 1e-8))
    assert upper == pytest.approx(0.05, abs=1e-4)
    # under a point null every pooled statistic is N(0, 1)
    assert lower == pytest.approx(upper, abs=1e-6)


def test_elicitation_validates_input(calibrated_prior):
    with pytest.raises(UnsupportedPriorError):
        elicitation_bounds(2, 1.96, PointMassPrior(0.0))
    with pytest.raises(InvalidArgumentError):
        elicitation_bounds(0, 1.96, calibrated_prior)
    with pytest.raises(InvalidArgumentError):
        elicitation_bounds(2, -1.0, calibrated_prior)


def test_elicitation_monte_carlo_agrees(calibrated_prior):
    for n_bar in range(1, 5):
        lower, upper = elicitation_bounds(n_bar, 1.96, calibrated_prior)
        mc = elicitation_bounds_monte_carlo(n_bar, 1.96, calibrated_prior, reps=20000, seed=11)
        assert mc.lower == pytest.approx(lower, abs=3 * mc.lower_se + 1e-12)
        assert mc.upper == pytest.approx(upper, abs=3 * mc.upper_se + 1e-12)


def test_implied_n_bar(calibrated_prior):
    table = cost_ratio_bounds_table(1.96, calibrated_prior, 7, cost_ratio=0.187)
    assert table['brackets'].sum() == 1
    assert implied_n_bar(table, 0.187) == 3
    assert implied_n_bar(table, 0.99) is None


def test_reference_comparison(calibrated_prior):
    out = reference_comparison(1.96, calibrated_prior)
    assert len(out) == len(REFERENCE_BOUNDS) == 7
    assert np.allclose(out['lower_diff'], out['lower'] - out['lower_reference'])
    assert np.allclose(out['upper_reference'].iloc[1:], REFERENCE_BOUNDS['lower'].iloc[:-1])
