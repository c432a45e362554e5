import io
import json
import os

import numpy as np
import pandas as pd
import pytest

from iccv_simulator import PoolingOmega
from iccv_simulator.cli import COMMANDS, run_command

GOLDEN = os.path.join(os.path.dirname(__file__), 'golden')

QUICK_ARGS = {
    'iccv': ['--reps', '2000', '--c0', '2000', '--z-hi', '2.2', '--z-step', '0.01'],
    'size': ['--reps', '1000'],
    'power': ['--reps', '1000', '--theta-true', '1.0'],
    'baseline-threshold': [],
    'mean-studies': ['--reps', '1000'],
    'sweep': ['--axis', 'cost_ratio', '--lo', '0.3', '--hi', '0.5', '--points', '2', '--reps', '2000',
              '--z-hi', '2.6', '--z-step', '0.05'],
    'calibrate-prior': [],
    'elicit': [],
    'table2': [],
}


def run(capsys, argv):
    code = run_command(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def golden_header(command):
    with open(os.path.join(GOLDEN, f'{command}.csv')) as f:
        return f.readline().rstrip('\n')


@pytest.mark.parametrize('command', sorted(COMMANDS))
def test_output_header_matches_golden(command, capsys):
    code, out, err = run(capsys, [command] + QUICK_ARGS[command])
    assert code == 0, err
    assert out.splitlines()[0] == golden_header(command)
    assert err.startswith('# config: ')


def test_table2_bounds_chain(capsys):
    code, out, _ = run(capsys, ['table2'])
    assert code == 0
    table = pd.read_csv(io.StringIO(out))
    assert table['n_bar'].tolist() == list(range(1, 8))
    assert np.allclose(table['upper'].iloc[1:].to_numpy(), table['lower'].iloc[:-1].to_numpy())


def test_size_is_deterministic(capsys):
    argv = ['size', '--model', 'pooling', '--reps', '1000', '--seed', '7']
    first = run(capsys, argv)
    second = run(capsys, argv)
    assert first[0] == second[0] == 0
    assert first[1] == second[1]


def test_iccv_single_study_regime(capsys):
    code, out, _ = run(capsys, ['iccv'] + QUICK_ARGS['iccv'])
    assert code == 0
    row = pd.read_csv(io.StringIO(out)).iloc[0]
    assert 1.959 <= row['z_star'] <= 2.2
    assert row['size'] <= 0.05


def test_usage_errors_exit_with_two(capsys, tmp_path):
    assert run(capsys, ['nonsense'])[0] == 2
    assert run(capsys, ['size', '--bogus'])[0] == 2
    assert run(capsys, ['size', '--model', 'oracle'])[0] == 2
    assert run(capsys, ['size', '--reps', '0'])[0] == 2

    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'model': 'pooling', 'colour': 'red'}))
    code, out, err = run(capsys, ['size', '--config', str(path)])
    assert code == 2
    assert out == ''
    assert 'colour' in err


def test_computation_errors_exit_with_one(capsys):
    code, out, err = run(capsys, ['baseline-threshold', '--c0', '5000'])
    assert code == 1
    assert out == ''
    assert 'never profitable' in err


def test_baseline_threshold_value(capsys):
    code, out, _ = run(capsys, ['baseline-threshold'])
    assert code == 0
    row = pd.read_csv(io.StringIO(out)).iloc[0]
    assert row['cost_ratio'] == pytest.approx(0.1866)
    assert row['z_threshold'] == pytest.approx(2.95, abs=0.01)


def test_dumped_config_reproduces_the_run(capsys, tmp_path):
    path = str(tmp_path / 'run.json')
    first = run(capsys, ['power', '--reps', '1000', '--theta-true', '1.0', '--seed', '3', '--dump-config', path])
    second = run(capsys, ['power', '--config', path])
    assert first[0] == second[0] == 0
    assert first[1] == second[1]


def test_json_output(capsys):
    code, out, _ = run(capsys, ['calibrate-prior', '--format', 'json'])
    assert code == 0
    records = json.loads(out)
    assert records[0]['prior'] == 'normal'
    assert records[0]['mean'] == pytest.approx(1.99, abs=0.01)
    assert records[0]['studies'] == 4


def test_output_file(capsys, tmp_path):
    path = tmp_path / 'out.csv'
    code, out, _ = run(capsys, ['elicit', '--n-bar', '3', '--cost-ratio', '0.187', '--out', str(path)])
    assert code == 0
    assert out == ''
    table = pd.read_csv(path)
    assert bool(table['brackets'].iloc[0])


def test_elicit_monte_carlo_columns(capsys):
    code, out, _ = run(capsys, ['elicit', '--monte-carlo', '--reps', '2000'])
    assert code == 0
    table = pd.read_csv(io.StringIO(out))
    assert {'lower_mc', 'lower_mc_se', 'upper_mc', 'upper_mc_se'} <= set(table.columns)


def test_mean_studies_reports_n_max(capsys):
    code, out, _ = run(capsys, ['mean-studies', '--reps', '1000'])
    assert code == 0
    row = pd.read_csv(io.StringIO(out)).iloc[0]
    assert row['n_max'] == 2
    assert 1.0 <= row['mean_studies'] <= 2.0


def test_general_model_with_an_explicit_omega(capsys):
    rows = PoolingOmega().matrix(4).tolist()
    common = ['size', '--model', 'general', '--lambdas', 'sqrt', '--cap', '3', '--reps', '1000']
    code, out, err = run(capsys, common + ['--omega', 'explicit', '--omega-matrix', json.dumps(rows)])
    assert code == 0, err
    explicit = pd.read_csv(io.StringIO(out)).iloc[0]
    code, out, _ = run(capsys, common + ['--omega', 'pooling'])
    assert code == 0
    pooled = pd.read_csv(io.StringIO(out)).iloc[0]
    assert explicit['size'] == pytest.approx(pooled['size'], abs=1e-12)
    assert explicit['cap_hit_rate'] == pytest.approx(pooled['cap_hit_rate'], abs=1e-12)


def test_explicit_omega_from_a_config_file(capsys, tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'model': 'general', 'omega': 'explicit'}))
    code, out, err = run(capsys, ['size', '--config', str(path)])
    assert code == 2
    assert out == ''
    assert 'omega_matrix' in err
    code, _, err = run(capsys, ['size', '--config', str(path), '--reps', '1000', '--cap', '1',
                                '--omega-matrix', '[[1, 0.3], [0.3, 1]]'])
    assert code == 0, err


def test_config_values_of_the_wrong_type_exit_with_two(capsys, tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'reps': 'many'}))
    code, out, err = run(capsys, ['size', '--config', str(path)])
    assert code == 2
    assert out == ''
    assert 'reps must be a number' in err


def test_unreadable_studies_exit_with_two(capsys, tmp_path):
    code, out, err = run(capsys, ['calibrate-prior', '--studies', str(tmp_path / 'missing.csv')])
    assert code == 2
    assert out == ''
    assert 'Cannot read studies file' in err

    path = tmp_path / 'studies.csv'
    path.write_text('n,sum_x,sum_y,beta_hat\n40,10,5,\n30,abc,4,\n')
    code, out, err = run(capsys, ['calibrate-prior', '--studies', str(path)])
    assert code == 2
    assert out == ''
    assert 'Row 2' in err


def test_table2_reports_the_implied_n_bar(capsys):
    code, out, _ = run(capsys, ['table2', '--cost-ratio', '0.187'])
    assert code == 0
    table = pd.read_csv(io.StringIO(out))
    assert (table['implied_n_bar'] == 3).all()
    assert table.loc[table['brackets'], 'n_bar'].tolist() == [3]

    code, out, _ = run(capsys, ['table2', '--cost-ratio', '0.99'])
    assert code == 0
    assert pd.read_csv(io.StringIO(out))['implied_n_bar'].isna().all()
