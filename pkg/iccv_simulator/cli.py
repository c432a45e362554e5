"""Command-line front end: every computation as a subcommand writing CSV or JSON."""
import argparse
import json
import logging
import sys
from typing import Callable, Dict, List, Optional, Sequence

import pandas as pd

from .behavior import n_max_increasing_cost
from .calib import (
    SYNTHETIC_STUDIES,
    calibrate_prior,
    cost_ratio_bounds_table,
    elicitation_bounds,
    elicitation_bounds_monte_carlo,
    implied_n_bar,
    load_studies,
    REFERENCE_BOUNDS,
)
from .config import COSTS, FORMATS, MODELS, OMEGAS, PRIORS, SWEEP_AXES, RunConfig
from .errors import ConfigError, ICCVError, InvalidArgumentError
from .incentives import ConstantCost, Incentives, PowerLawCost
from .priors import NormalPrior, PointMassPrior, Tail
from .solver import baseline_threshold, estimate_power, estimate_size, find_iccv, mean_num_studies
from .sweeps import sweep

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'

# flag dest -> RunConfig field
FLAG_FIELDS = {
    'model': 'model', 'prior': 'prior', 'mu': 'prior_mean', 'sigma': 'prior_sd', 'prior_low': 'prior_low',
    'prior_high': 'prior_high', 'prior_theta': 'prior_theta', 'v': 'v', 'cost': 'cost', 'c0': 'c0',
    'epsilon': 'epsilon', 'tail': 'tail', 'alpha': 'alpha', 'reps': 'reps', 'seed': 'seed', 'cap': 'cap',
    'workers': 'workers', 'z': 'z', 'theta_true': 'theta_true', 'z_lo': 'z_lo', 'z_hi': 'z_hi',
    'z_step': 'z_step', 'lambdas': 'lambdas', 'omega': 'omega', 'omega_matrix': 'omega_matrix', 'rho': 'rho',
    'sophistication': 'sophistication', 'jitter': 'jitter', 'axis': 'sweep_axis', 'lo': 'sweep_lo',
    'hi': 'sweep_hi', 'points': 'sweep_points', 'studies': 'studies', 'target_n': 'target_n',
    'n_bar': 'n_bar', 'nmax': 'n_bar_max', 'cost_ratio': 'cost_ratio', 'format': 'format', 'out': 'out',
}


def _lambdas(text: str):
    if text in ('ones', 'sqrt'):
        return text
    try:
        return [float(v) for v in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'ones', 'sqrt' or a comma-separated list, got {text!r}")


def _matrix(text: str):
    try:
        rows = json.loads(text)
    except json.JSONDecodeError:
        raise argparse.ArgumentTypeError(f"expected a JSON list of rows, got {text!r}")
    return rows


def _choice(choices: Sequence[str]) -> Callable[[str], str]:
    def parse(text: str) -> str:
        value = text.strip().lower().replace('-', '_')
        if value not in choices:
            raise argparse.ArgumentTypeError(f"choose from {', '.join(choices)}")
        return value
    return parse


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group('run')
    g.add_argument('--config', help='JSON file with RunConfig fields')
    g.add_argument('--dump-config', metavar='PATH', help='write the resolved configuration to PATH')
    g.add_argument('-v', '--verbose', action='store_true', help='debug logging on stderr')
    g.add_argument('--format', type=_choice(FORMATS))
    g.add_argument('--out', help='output file (default stdout)')
    g.add_argument('--reps', type=int)
    g.add_argument('--seed', type=int)
    g.add_argument('--cap', type=int)
    g.add_argument('--workers', type=int)

    g = p.add_argument_group('model')
    g.add_argument('--model', type=_choice(tuple(MODELS)))
    g.add_argument('--prior', type=_choice(PRIORS))
    g.add_argument('--mu', type=float, help='normal prior mean')
    g.add_argument('--sigma', type=float, help='normal prior sd')
    g.add_argument('--prior-low', type=float)
    g.add_argument('--prior-high', type=float)
    g.add_argument('--prior-theta', type=float, help='point-mass location')
    g.add_argument('--v', type=float, help='payoff of a publication')
    g.add_argument('--cost', type=_choice(COSTS))
    g.add_argument('--c0', type=float)
    g.add_argument('--epsilon', type=float)
    g.add_argument('--tail', type=_choice(tuple(t.value for t in Tail)))
    g.add_argument('--lambdas', type=_lambdas, help="general model: 'ones', 'sqrt' or a list")
    g.add_argument('--omega', type=_choice(OMEGAS))
    g.add_argument('--omega-matrix', type=_matrix,
                   help="general model: correlation rows as JSON, with --omega explicit")
    g.add_argument('--rho', type=float)
    g.add_argument('--sophistication', type=float, help='general model: weight on the prior prediction')
    g.add_argument('--jitter', type=float)

    g = p.add_argument_group('test')
    g.add_argument('--alpha', type=float)
    g.add_argument('--z', type=float)
    g.add_argument('--theta-true', type=float)
    g.add_argument('--z-lo', type=float)
    g.add_argument('--z-hi', type=float)
    g.add_argument('--z-step', type=float)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog='run_iccv', description='Incentive-compatible critical values.')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True
    sub.add_parser('iccv', parents=[common], help='smallest critical value controlling size')
    sub.add_parser('size', parents=[common], help='size at --z under strategic researchers')
    sub.add_parser('power', parents=[common], help='rejection rate at --z when theta = --theta-true')
    sub.add_parser('baseline-threshold', parents=[common], help='z above which constant-cost research stops')
    sub.add_parser('mean-studies', parents=[common], help='average number of studies at --z')
    p = sub.add_parser('sweep', parents=[common], help='size and ICCV along one parameter')
    p.add_argument('--axis', type=_choice(SWEEP_AXES))
    p.add_argument('--lo', type=float)
    p.add_argument('--hi', type=float)
    p.add_argument('--points', type=int)
    p = sub.add_parser('calibrate-prior', parents=[common], help='normal prior from matched-pairs studies')
    p.add_argument('--studies', help=f'CSV with n,sum_x,sum_y,beta_hat (default {SYNTHETIC_STUDIES})')
    p.add_argument('--target-n', type=float)
    p = sub.add_parser('elicit', parents=[common], help='cost-ratio bounds for one n_bar')
    p.add_argument('--n-bar', type=int)
    p.add_argument('--cost-ratio', type=float)
    p.add_argument('--monte-carlo', action='store_true', help='add simulated bounds with standard errors')
    p = sub.add_parser('table2', parents=[common], help='cost-ratio bounds for n_bar = 1..nmax')
    p.add_argument('--nmax', type=int)
    p.add_argument('--cost-ratio', type=float)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then flags."""
    d = RunConfig().to_dict()
    if args.config:
        d.update(RunConfig.read_json(args.config))
    d.update({field: getattr(args, dest) for dest, field in FLAG_FIELDS.items()
              if getattr(args, dest, None) is not None})
    return RunConfig.from_dict(d)


def _row(d: Dict) -> pd.DataFrame:
    return pd.DataFrame([d])


def cmd_iccv(cfg: RunConfig, args) -> pd.DataFrame:
    result = find_iccv(cfg.build_model(), cfg.build_prior(), cfg.build_incentives(), cfg.build_tail(), cfg.alpha,
                       cfg.reps, cfg.seed, cfg.build_grid(), cfg.cap, cfg.workers)
    return _row(result.to_dict())


def cmd_size(cfg: RunConfig, args) -> pd.DataFrame:
    est = estimate_size(cfg.build_model(), cfg.build_prior(), cfg.build_incentives(), cfg.z, cfg.build_tail(),
                        cfg.reps, cfg.seed, cfg.cap, cfg.workers)
    return _row({'z': cfg.z, **est.to_dict()})


def cmd_power(cfg: RunConfig, args) -> pd.DataFrame:
    est = estimate_power(cfg.build_model(), cfg.build_prior(), cfg.build_incentives(), cfg.z, cfg.build_tail(),
                         cfg.theta_true, cfg.reps, cfg.seed, cfg.cap, cfg.workers)
    return _row({'z': cfg.z, 'theta_true': cfg.theta_true, 'power': est.size, 'std_error': est.std_error,
                 'reps': est.reps, 'cap_hit_rate': est.cap_hit_rate})


def cmd_baseline_threshold(cfg: RunConfig, args) -> pd.DataFrame:
    incentives = cfg.build_incentives()
    if cfg.cost == 'auto':
        incentives = Incentives(cfg.v, ConstantCost(cfg.c0))
    z = baseline_threshold(cfg.build_prior(), incentives, cfg.build_tail())
    return _row({'cost_ratio': incentives.cost_ratio(1), 'z_threshold': z})


def cmd_mean_studies(cfg: RunConfig, args) -> pd.DataFrame:
    prior, incentives, tail = cfg.build_prior(), cfg.build_incentives(), cfg.build_tail()
    mean = mean_num_studies(cfg.build_model(), prior, incentives, cfg.z, tail, cfg.reps, cfg.seed, cfg.cap,
                            cfg.workers)
    n_max = None
    if cfg.model == 'increasing_cost' and isinstance(incentives.cost, PowerLawCost):
        n_max = n_max_increasing_cost(prior, incentives, cfg.z, tail)
    return _row({'z': cfg.z, 'mean_studies': mean, 'n_max': n_max, 'reps': cfg.reps})


def cmd_sweep(cfg: RunConfig, args) -> pd.DataFrame:
    return sweep(cfg.sweep_axis, cfg.sweep_lo, cfg.sweep_hi, cfg.sweep_points, cfg)


def cmd_calibrate_prior(cfg: RunConfig, args) -> pd.DataFrame:
    try:
        studies = load_studies(cfg.studies or SYNTHETIC_STUDIES)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc), 'studies') from exc
    prior = calibrate_prior(studies, cfg.target_n)
    if isinstance(prior, PointMassPrior):
        return _row({'prior': 'point_mass', 'mean': prior.theta, 'sd': 0.0, 'studies': len(studies),
                     'target_n': cfg.target_n})
    return _row({'prior': 'normal', 'mean': prior.mean, 'sd': prior.std, 'studies': len(studies),
                 'target_n': cfg.target_n})


def _normal_prior(cfg: RunConfig) -> NormalPrior:
    prior = cfg.build_prior()
    if not isinstance(prior, NormalPrior):
        raise ConfigError("Elicitation bounds need --prior normal.", 'prior')
    return prior


def cmd_elicit(cfg: RunConfig, args) -> pd.DataFrame:
    prior = _normal_prior(cfg)
    lower, upper = elicitation_bounds(cfg.n_bar, cfg.z, prior)
    row = {'n_bar': cfg.n_bar, 'z': cfg.z, 'lower': lower, 'upper': upper}
    if getattr(args, 'monte_carlo', False):
        mc = elicitation_bounds_monte_carlo(cfg.n_bar, cfg.z, prior, cfg.reps, cfg.seed)
        row.update({'lower_mc': mc.lower, 'lower_mc_se': mc.lower_se, 'upper_mc': mc.upper,
                    'upper_mc_se': mc.upper_se})
    if cfg.cost_ratio is not None:
        row['brackets'] = lower < cfg.cost_ratio <= upper
    return _row(row)


def cmd_table2(cfg: RunConfig, args) -> pd.DataFrame:
    prior = _normal_prior(cfg)
    table = cost_ratio_bounds_table(cfg.z, prior, cfg.n_bar_max, cfg.cost_ratio)
    table = table.merge(REFERENCE_BOUNDS.rename(columns={'lower': 'lower_reference', 'upper': 'upper_reference'}),
                        on='n_bar', how='left')
    if cfg.cost_ratio is not None:
        implied = implied_n_bar(table, cfg.cost_ratio)
        logger.info("Cost ratio %g implies n_bar=%s", cfg.cost_ratio, implied if implied else 'out of range')
        table['implied_n_bar'] = pd.array([implied] * len(table), dtype='Int64')
        cols = ['n_bar', 'lower', 'upper', 'lower_reference', 'upper_reference', 'brackets', 'implied_n_bar']
    else:
        cols = ['n_bar', 'lower', 'upper', 'lower_reference', 'upper_reference']
    return table[cols]


COMMANDS = {
    'iccv': cmd_iccv,
    'size': cmd_size,
    'power': cmd_power,
    'baseline-threshold': cmd_baseline_threshold,
    'mean-studies': cmd_mean_studies,
    'sweep': cmd_sweep,
    'calibrate-prior': cmd_calibrate_prior,
    'elicit': cmd_elicit,
    'table2': cmd_table2,
}


def write_table(df: pd.DataFrame, fmt: str, out: Optional[str]):
    if fmt == 'json':
        text = json.dumps(json.loads(df.to_json(orient='records', double_precision=15)), indent=4) + '\n'
    else:
        text = df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    if out:
        with open(out, 'w', newline='') as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def run_command(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        sys.stderr.write(f"run_iccv: error: {exc}\n")
        return 2
    sys.stderr.write('# config: ' + json.dumps(cfg.to_dict(), sort_keys=True) + '\n')
    if args.dump_config:
        cfg.save_json(args.dump_config)

    try:
        table = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        sys.stderr.write(f"run_iccv: error: {exc}\n")
        return 2
    except ICCVError as exc:
        sys.stderr.write(f"run_iccv: {exc}\n")
        return 1
    write_table(table, cfg.format, cfg.out)
    return 0


def main() -> int:
    return run_command(sys.argv[1:])
