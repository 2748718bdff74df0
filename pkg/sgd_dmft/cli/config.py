"""
Experiment configuration: YAML with ``model``, ``solver``, ``sim``, ``split``
and ``compare`` sections, handled as flat dotted keys (``model.alpha``).
A run manifest may stand in for a YAML file; its resolved config is reused.
"""
import logging
import os

import yaml

from .. import settings
from ..effective_process import ModelParams
from ..exceptions import ArtifactError, ConfigError
from ..finite_sim import AlgorithmSpec
from ..solver import SolverConfig
from .artifacts import RunManifest

logger = logging.getLogger(__name__)

REQUIRED = object()

# dotted key -> (kind, default)
SCHEMA = {
    'model.alpha': ('float', REQUIRED),
    'model.gamma': ('float', 0.1),
    'model.lambda': ('float', 0.0),
    'model.b': ('float', 1.0),
    'model.temperature': ('float', 0.0),
    'model.horizon': ('int', 30),
    'model.loss': ('str', settings.LOSS),
    'model.m0': ('float', settings.M0),
    'model.c0': ('float', settings.C0),
    'model.grad_norm_mode': ('str', settings.GRAD_NORM_MODE),

    'solver.n_paths': ('int', settings.N_PATHS),
    'solver.damping': ('float', settings.DAMPING),
    'solver.max_sweeps': ('int', settings.MAX_SWEEPS),
    'solver.tol': ('float', settings.TOL),
    'solver.seed': ('int', settings.SEED),
    'solver.quadrature_order': ('int', settings.QUADRATURE_ORDER),
    'solver.psd_floor': ('float', settings.PSD_FLOOR),
    'solver.resample_each_sweep': ('bool', settings.RESAMPLE_EACH_SWEEP),
    'solver.noise_multiplier': ('float', settings.NOISE_MULTIPLIER),
    'solver.theta_paths': ('int', settings.THETA_PATHS),
    'solver.theta_method': ('str', 'sample'),

    'sim.variant': ('str', 'sgd'),
    'sim.d': ('int', REQUIRED),
    'sim.n_seeds': ('int', settings.N_SEEDS),
    'sim.seed': ('int', settings.SEED),
    'sim.beta': ('float', 0.0),
    'sim.tau': ('schedule', 0.0),
    'sim.mu': ('schedule', 0.0),
    'sim.nesterov_alpha': ('schedule', 0.0),
    'sim.nesterov_gamma': ('schedule', None),

    'split.f_prime': ('str', 'tanh'),
    'split.n': ('int', REQUIRED),
    'split.d': ('int', REQUIRED),
    'split.gamma': ('schedule', 0.1),
    'split.steps': ('int', 50),
    'split.rho0': ('float', 1.0),
    'split.runs': ('int', 1),
    'split.seed': ('int', settings.SEED),
    'split.quadrature_order': ('int', settings.QUADRATURE_ORDER),
    'split.tolerance': ('float', 0.1),

    'compare.tolerance': ('float', settings.COMPARE_TOLERANCE),
    'compare.columns': ('str', 'cosine'),
}

SECTIONS = {
    'solve': ('model', 'solver'),
    'simulate': ('model', 'sim'),
    'compare': ('model', 'solver', 'sim', 'compare'),
    'split': ('split',),
}


def flatten(nested, prefix=''):
    flat = {}
    for key, value in nested.items():
        dotted = '{0}.{1}'.format(prefix, key) if prefix else str(key)
        if isinstance(value, dict):
            flat.update(flatten(value, dotted))
        else:
            flat[dotted] = value
    return flat


def read_config(path):
    """Flat dotted mapping from a YAML config or a run manifest."""
    if str(path).endswith('.json'):
        try:
            manifest = RunManifest.load(path)
        except ArtifactError as e:
            raise ConfigError(str(e), keys=('config',))
        if not isinstance(manifest.config, dict):
            raise ConfigError('manifest {0} has no config section'.format(path), keys=('config',))
        return dict(manifest.config)
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError('cannot read config {0}: {1}'.format(path, e))
    try:
        nested = yaml.safe_load(text) or {}
    except yaml.YAMLError as e:
        raise ConfigError('invalid YAML in {0}: {1}'.format(path, e))
    if not isinstance(nested, dict):
        raise ConfigError('config {0} must be a mapping'.format(path))
    return flatten(nested)


def _coerce(key, kind, value):
    if value is None:
        return None
    try:
        if kind == 'float':
            return float(value)
        if kind == 'int':
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if kind == 'bool':
            if isinstance(value, str):
                return value.strip().lower() in ('1', 'true', 'yes', 'on')
            return bool(value)
        if kind == 'schedule':
            if isinstance(value, (list, tuple)):
                return [float(x) for x in value]
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(
            '{0} must be of type {1}, got {2!r}'.format(key, kind, value), keys=(key,))


def resolve(flat, command, overrides=None):
    """
    Check keys, apply ``overrides`` and defaults for the sections ``command``
    uses. Unknown keys and missing required keys raise ``ConfigError``.
    """
    flat = dict(flat)
    flat.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(flat) - set(SCHEMA))
    if unknown:
        raise ConfigError('unknown config keys: {0}'.format(', '.join(unknown)), keys=unknown)
    sections = SECTIONS[command]
    resolved = {}
    missing = []
    for key, (kind, default) in SCHEMA.items():
        if key.split('.', 1)[0] not in sections:
            continue
        if key in flat:
            resolved[key] = _coerce(key, kind, flat[key])
        elif default is REQUIRED:
            missing.append(key)
        else:
            resolved[key] = default
    if missing:
        raise ConfigError(
            'missing required config keys: {0}'.format(', '.join(missing)), keys=missing)
    logger.debug('resolved %s config: %s', command, resolved)
    return resolved


def seed_overrides(seed):
    if seed is None:
        return {}
    return {'solver.seed': seed, 'sim.seed': seed, 'split.seed': seed}


def output_dir(cli_value=None):
    """``--out`` wins over the environment, the environment over the default."""
    return cli_value or os.environ.get(settings.OUTPUT_DIR_ENV) or settings.OUTPUT_DIR


def model_params(cfg):
    return ModelParams(
        alpha=cfg['model.alpha'], gamma=cfg['model.gamma'], lam=cfg['model.lambda'],
        b=cfg['model.b'], temperature=cfg['model.temperature'],
        horizon=cfg['model.horizon'], loss=cfg['model.loss'], m0=cfg['model.m0'],
        c0=cfg['model.c0'], grad_norm_mode=cfg['model.grad_norm_mode'],
    )


def solver_config(cfg):
    return SolverConfig(**{key.split('.', 1)[1]: value for key, value in cfg.items()
                           if key.startswith('solver.')})


def algorithm_spec(cfg, params):
    return AlgorithmSpec.from_model(
        params, variant=cfg['sim.variant'], beta=cfg['sim.beta'], tau=cfg['sim.tau'],
        mu=cfg['sim.mu'], nesterov_alpha=cfg['sim.nesterov_alpha'],
        nesterov_gamma=cfg['sim.nesterov_gamma'],
    )
