import logging
import os

import numpy as np

from .. import settings
from ..constants import (
    SEED_COLUMNS, SIM_COLUMNS, SPLIT_SIM_COLUMNS, SPLIT_THEORY_COLUMNS, THEORY_COLUMNS,
    VALIDATION_FAILED,
)
from ..exceptions import ConfigError
from ..finite_sim import aggregate, average_sample_split_runs, simulate_seeds
from ..losses import get_nonlinearity
from ..numerics import RngStream
from ..sample_splitting import scalar_dmft
from ..solver import save_kernels, solve_fixed_point, theory_curves
from ..utils import utcnow
from .artifacts import (
    RunManifest, compare_tables, read_csv, save_report, table_rows, write_csv,
)
from .config import (
    algorithm_spec, model_params, output_dir, read_config, resolve, seed_overrides,
    solver_config,
)

logger = logging.getLogger(__name__)


def load_run_config(args, command):
    if not getattr(args, 'config', None):
        raise ConfigError('--config is required for {0}'.format(command), keys=('config',))
    overrides = seed_overrides(args.seed)
    if getattr(args, 'paths', None):
        overrides['solver.n_paths'] = args.paths
    if getattr(args, 'tol', None):
        overrides['solver.tol'] = args.tol
    cfg = resolve(read_config(args.config), command, overrides)
    out = output_dir(args.out)
    os.makedirs(out, exist_ok=True)
    return cfg, out


def run_solve(cfg, out):
    params, config = model_params(cfg), solver_config(cfg)
    result = solve_fixed_point(params, config)
    curves = theory_curves(result.kernels, params, config)
    outputs = {
        'kernels': save_kernels(os.path.join(out, 'kernels.json'), result, params, config),
        'theory': write_csv(os.path.join(out, 'theory.csv'), THEORY_COLUMNS, curves.rows()),
    }
    logger.info('solve: %s after %d sweeps, cosine[T] %.6f',
                'converged' if result.converged else 'NOT converged',
                result.sweeps, curves.cosine[-1])
    return result.converged, outputs


def run_simulate(cfg, out):
    params = model_params(cfg)
    spec = algorithm_spec(cfg, params)
    d = cfg['sim.d']
    n = max(1, int(round(params.alpha * d)))
    seeds = range(cfg['sim.seed'], cfg['sim.seed'] + cfg['sim.n_seeds'])
    runs = simulate_seeds(spec, n, d, seeds)
    seed_dir = os.path.join(out, 'seeds')
    os.makedirs(seed_dir, exist_ok=True)
    outputs = {
        'simulation': write_csv(
            os.path.join(out, 'simulation.csv'), SIM_COLUMNS,
            table_rows(aggregate(runs), SIM_COLUMNS)),
    }
    for seed, run in zip(seeds, runs):
        outputs['seed-{0}'.format(seed)] = write_csv(
            os.path.join(seed_dir, 'seed-{0}.csv'.format(seed)), SEED_COLUMNS, run.rows())
    logger.info('simulate: %s, n=%d d=%d, %d seeds', spec.variant, n, d, len(runs))
    return outputs


def _report(report, out, stem):
    outputs = {
        'deviations': write_csv(
            os.path.join(out, stem + '.csv'), report.columns(), report.rows()),
        'report': save_report(os.path.join(out, stem + '.json'), report),
    }
    print(report.summary())
    return outputs


def _manifest(command, cfg, seed, started, out, converged=None, outputs=None):
    manifest = RunManifest.build(
        command, cfg, seed, started, utcnow(), converged=converged, outputs=outputs)
    return manifest.save(os.path.join(out, command + '.manifest.json'))


def cmd_solve(args):
    started = utcnow()
    cfg, out = load_run_config(args, 'solve')
    converged, outputs = run_solve(cfg, out)
    _manifest('solve', cfg, cfg['solver.seed'], started, out, converged, outputs)
    return 0


def cmd_simulate(args):
    started = utcnow()
    cfg, out = load_run_config(args, 'simulate')
    outputs = run_simulate(cfg, out)
    _manifest('simulate', cfg, cfg['sim.seed'], started, out, outputs=outputs)
    return 0


def cmd_compare(args):
    """Compare two CSV files, or solve and simulate one config and compare those."""
    if args.theory and args.sim:
        tolerance = settings.COMPARE_TOLERANCE if args.tolerance is None else args.tolerance
        columns = args.columns.split(',') if args.columns else None
        report = compare_tables(read_csv(args.theory), read_csv(args.sim), tolerance,
                                columns=columns)
        _report(report, output_dir(args.out) if args.out else os.path.dirname(args.sim) or '.',
                'compare')
        return 0 if report.passed else VALIDATION_FAILED
    if args.theory or args.sim:
        raise ConfigError('compare needs both a theory and a simulation table')

    started = utcnow()
    cfg, out = load_run_config(args, 'compare')
    if args.tolerance is not None:
        cfg['compare.tolerance'] = args.tolerance
    if args.columns:
        cfg['compare.columns'] = args.columns
    converged, outputs = run_solve(cfg, out)
    outputs.update(run_simulate(cfg, out))
    report = compare_tables(
        read_csv(outputs['theory']), read_csv(outputs['simulation']), cfg['compare.tolerance'],
        columns=cfg['compare.columns'].split(','))
    outputs.update(_report(report, out, 'compare'))
    _manifest('compare', cfg, cfg['solver.seed'], started, out, converged, outputs)
    return 0 if report.passed else VALIDATION_FAILED


def cmd_split(args):
    """
    Sample-splitting GD against the scalar recursion. The recursion starts from
    the simulated rho_hat^0, so both curves share their initial condition.
    """
    started = utcnow()
    cfg, out = load_run_config(args, 'split')
    f = get_nonlinearity(cfg['split.f_prime'])
    n, d, steps = cfg['split.n'], cfg['split.d'], cfg['split.steps']
    sim = average_sample_split_runs(
        f.first, cfg['split.gamma'], n, d, steps, RngStream(cfg['split.seed']),
        rho0=cfg['split.rho0'], runs=cfg['split.runs'])
    theory = scalar_dmft(
        f.first, f.second, n / d, cfg['split.gamma'], rho0=float(sim.rho_hat[0]),
        steps=steps, order=cfg['split.quadrature_order'])
    t = np.arange(steps + 1)
    theory_table = {'t': t, 'rho': theory.rho, 'abs_moment': theory.abs_moment}
    sim_table = {'t': t, 'rho_hat': sim.rho_hat, 'abs_moment_hat': sim.abs_moment_hat}
    outputs = {
        'theory': write_csv(os.path.join(out, 'split_theory.csv'), SPLIT_THEORY_COLUMNS,
                            table_rows(theory_table, SPLIT_THEORY_COLUMNS)),
        'simulation': write_csv(os.path.join(out, 'split_sim.csv'), SPLIT_SIM_COLUMNS,
                                table_rows(sim_table, SPLIT_SIM_COLUMNS)),
    }
    report = compare_tables(theory_table, sim_table, cfg['split.tolerance'])
    outputs.update(_report(report, out, 'split_compare'))
    _manifest('split', cfg, cfg['split.seed'], started, out, outputs=outputs)
    return 0 if report.passed else VALIDATION_FAILED
