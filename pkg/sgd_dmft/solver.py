"""
Damped fixed-point iteration of the DMFT kernels for SGD on the teacher-student
perceptron, and post-convergence sampling of the effective weight process.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import settings
from .effective_process import draw_paths, integrate_paths, noise_factor, weighted_mean
from .exceptions import ArtifactError, EmptyEnsembleError, ShapeMismatchError, ValidationError
from .kernels import (
    KERNEL_BLOCKS, KernelSet, blend, block_changes, magnetization_series, noise_floors,
)
from .numerics import RngStream, color_noise

__all__ = [
    'KernelSet', 'SolverConfig', 'SolveResult', 'CurveTable', 'estimate_kernels',
    'kernel_standard_errors', 'damped_update', 'solve_fixed_point', 'sample_weight_process',
    'theory_curves', 'save_kernels', 'load_kernels',
]

logger = logging.getLogger(__name__)

THETA_METHODS = ('sample', 'exact')


@dataclass(frozen=True)
class SolverConfig:
    n_paths: int = settings.N_PATHS
    damping: float = settings.DAMPING
    max_sweeps: int = settings.MAX_SWEEPS
    tol: float = settings.TOL
    seed: int = settings.SEED
    quadrature_order: int = settings.QUADRATURE_ORDER
    psd_floor: float = settings.PSD_FLOOR
    resample_each_sweep: bool = settings.RESAMPLE_EACH_SWEEP
    theta_paths: int = settings.THETA_PATHS
    theta_method: str = 'sample'
    noise_multiplier: float = settings.NOISE_MULTIPLIER

    def __post_init__(self):
        problems = []
        if not 0 < self.damping <= 1:
            problems.append('damping must be in (0, 1]')
        if not self.tol > 0:
            problems.append('tol must be > 0')
        if self.noise_multiplier < 0:
            problems.append('noise_multiplier must be >= 0')
        if self.n_paths < 100:
            problems.append('n_paths must be >= 100')
        if self.max_sweeps < 1:
            problems.append('max_sweeps must be >= 1')
        if self.psd_floor < 0:
            problems.append('psd_floor must be >= 0')
        if self.theta_method not in THETA_METHODS:
            problems.append('theta_method must be one of {0}'.format(THETA_METHODS))
        if problems:
            raise ValidationError('; '.join(problems))

    def echo(self):
        return {
            'n_paths': self.n_paths, 'damping': self.damping, 'max_sweeps': self.max_sweeps,
            'tol': self.tol, 'seed': self.seed, 'quadrature_order': self.quadrature_order,
            'psd_floor': self.psd_floor, 'resample_each_sweep': self.resample_each_sweep,
            'theta_paths': self.theta_paths, 'theta_method': self.theta_method,
            'noise_multiplier': self.noise_multiplier,
        }


@dataclass
class SolveResult:
    kernels: KernelSet
    trace: List[float] = field(default_factory=list)
    converged: bool = False
    # largest per-block noise floor of every sweep, 0 when the draws are frozen
    noise_floor: List[float] = field(default_factory=list)

    @property
    def sweeps(self):
        return len(self.trace)

    def __iter__(self):
        return iter((self.kernels, self.trace))


@dataclass
class CurveTable:
    m: np.ndarray
    C_theta: np.ndarray
    cosine: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def t(self):
        return np.arange(len(self.m))

    def rows(self):
        for t, row in enumerate(zip(self.m, self.C_theta, self.cosine)):
            yield (t,) + tuple(float(x) for x in row)


def estimate_kernels(ensemble, params, weights=None):
    """
    Empirical kernel proposal from an ensemble simulated under the current kernels.
    """
    if ensemble.n_paths == 0:
        raise EmptyEnsembleError('cannot estimate kernels from an empty ensemble')
    if weights is None:
        weights = ensemble.weights
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
    loss = params.loss_spec
    a_g = params.alpha * params.gamma_g
    r = ensemble.preactivations()
    y = ensemble.y[:, None]
    masks = ensemble.masks
    grad = masks * loss.first(r, y)
    curv = masks * loss.second(r, y)

    weighted = grad if weights is None else grad * weights[:, None]
    C_g = params.alpha * params.gamma_g ** 2 * (weighted.T @ grad)
    if weights is None:
        C_g /= ensemble.n_paths
    C_g = 0.5 * (C_g + C_g.T)

    Gamma = -a_g * weighted_mean(curv, weights)
    # response of -gamma_g s^t l'^t to a field on the loss argument at s < t:
    # R_g(t, s) = alpha gamma_g^2 E[s^t l''^t (d eta^t / d u^s) s^s l''^s]
    response = weighted_mean(
        curv[:, :, None] * ensemble.jac[:, :-1, :] * curv[:, None, :], weights)
    R_g = np.tril(a_g * params.gamma_g * response, k=-1)
    upsilon = a_g * weighted_mean(grad * ensemble.eta_star[:, None], weights)
    return KernelSet(
        C_g=C_g, R_g=R_g, Gamma=Gamma, upsilon=upsilon,
        m=magnetization_series(params.m0, params.decay, upsilon),
        decay=params.decay,
    )


def kernel_standard_errors(ensemble, params):
    """
    Monte Carlo standard error of every entry of ``estimate_kernels``, or None
    for weighted (quadrature) ensembles.
    """
    n = ensemble.n_paths
    if ensemble.weights is not None or n < 2:
        return None
    loss = params.loss_spec
    a_g = params.alpha * params.gamma_g
    r = ensemble.preactivations()
    y = ensemble.y[:, None]
    grad = ensemble.masks * loss.first(r, y)
    curv = ensemble.masks * loss.second(r, y)

    def stderr(values):
        return values.std(axis=0, ddof=1) / np.sqrt(n)

    response = curv[:, :, None] * ensemble.jac[:, :-1, :] * curv[:, None, :]
    return {
        'C_g': params.alpha * params.gamma_g ** 2 * stderr(grad[:, :, None] * grad[:, None, :]),
        'R_g': np.tril(a_g * params.gamma_g * stderr(response), k=-1),
        'Gamma': a_g * stderr(curv),
        'upsilon': a_g * stderr(grad * ensemble.eta_star[:, None]),
    }


def damped_update(old, proposal, damping, floor=settings.PSD_FLOOR):
    """``damping * proposal + (1 - damping) * old``, m rebuilt, C_g re-projected."""
    return blend(old, proposal, damping, floor)


def solve_fixed_point(params, config, draws_transform: Optional[Callable] = None):
    """
    Iterate simulate -> estimate -> damped update from the zero kernel set.

    ``draws_transform`` may rewrite the raw draws of every sweep (for
    instance to inject masks). Non-convergence is reported via
    ``SolveResult.converged``, not raised.

    With fresh draws every sweep the change never drops below the sampling
    noise, so a block also counts as converged once its change is under
    ``noise_multiplier`` standard errors of the damped proposal, for
    ``settings.NOISE_PATIENCE`` sweeps in a row.
    """
    rng = RngStream(config.seed)
    kernels = KernelSet.zeros(params)
    result = SolveResult(kernels=kernels)
    frozen = None
    quiet = 0
    for sweep in range(1, config.max_sweeps + 1):
        if config.resample_each_sweep:
            draws = draw_paths(params, config.n_paths, rng.with_epoch(sweep))
        else:
            if frozen is None:
                frozen = draw_paths(params, config.n_paths, rng.with_epoch(0))
            draws = frozen
        if draws_transform is not None:
            draws = draws_transform(draws)
        ensemble = integrate_paths(params, kernels, draws, floor=config.psd_floor)
        proposal = estimate_kernels(ensemble, params)
        updated = damped_update(kernels, proposal, config.damping, config.psd_floor)
        changes = block_changes(kernels, updated)
        errors = None
        if config.resample_each_sweep and config.noise_multiplier > 0:
            errors = kernel_standard_errors(ensemble, params)
        if errors is None:
            floors = dict.fromkeys(KERNEL_BLOCKS, 0.0)
        else:
            floors = noise_floors(kernels, errors, config.damping, config.noise_multiplier)
        change = max(changes.values())
        result.trace.append(change)
        result.noise_floor.append(max(floors.values()))
        kernels = updated
        logger.info('sweep %d: change %.3e, noise floor %.3e, m[T] %.6f',
                    sweep, change, result.noise_floor[-1], kernels.m[-1])
        if all(changes[name] < config.tol for name in KERNEL_BLOCKS):
            quiet = settings.NOISE_PATIENCE
        elif all(changes[name] < max(config.tol, floors[name]) for name in KERNEL_BLOCKS):
            quiet += 1
        else:
            quiet = 0
        if quiet >= settings.NOISE_PATIENCE:
            result.converged = True
            break
    result.kernels = kernels
    if not result.converged:
        logger.warning('no convergence after %d sweeps (last change %.3e, tol %.1e, '
                       'noise floor %.1e)', config.max_sweeps, result.trace[-1], config.tol,
                       result.noise_floor[-1])
    return result


def _signal_drift(kernels, t):
    return (kernels.upsilon[t] + kernels.Gamma[t] * kernels.m[t]
            + kernels.R_g[t, :t] @ kernels.m[:t])


def _linear_weight_coefficients(kernels, params):
    """
    theta^t = a_t xi + b_t theta* + sum_k c_{t,k} u^k with xi the orthogonal
    part of theta^0; the weight process is linear in its Gaussian inputs.
    """
    T = params.horizon
    a = np.zeros(T + 1)
    b = np.zeros(T + 1)
    c = np.zeros((T + 1, T))
    a[0], b[0] = 1.0, params.m0
    for t in range(T):
        drift = params.decay + kernels.Gamma[t]
        memory = kernels.R_g[t, :t]
        a[t + 1] = drift * a[t] + memory @ a[:t]
        b[t + 1] = drift * b[t] + memory @ b[:t] - _signal_drift(kernels, t)
        c[t + 1] = drift * c[t] + memory @ c[:t]
        c[t + 1, t] += 1.0
    return a, b, c


def sample_weight_process(kernels, params, n_paths=settings.THETA_PATHS, rng=None,
                          full=False, method='sample', floor=settings.PSD_FLOOR):
    """
    C_theta(t, t) of the effective weight process

        theta^{t+1} = (1 - gamma*lambda + Gamma^t) theta^t + sum_{k<t} R_g(t, k) theta^k
                      + u^t - theta* (upsilon^t + Gamma^t m^t + sum_{k<t} R_g(t, k) m^k)

    with theta^0 = theta* m0 + N(0, c0 - m0^2), so that E[theta* theta^t] = m^t.
    ``method='exact'`` propagates the covariance instead of sampling.
    Returns the diagonal, or the full (T+1) x (T+1) matrix when ``full``.
    """
    if kernels.horizon != params.horizon:
        raise ShapeMismatchError('kernels and params disagree on the horizon')
    T = params.horizon
    L = noise_factor(params, kernels, floor)
    orth_var = params.c0 - params.m0 ** 2
    if method == 'exact':
        a, b, c = _linear_weight_coefficients(kernels, params)
        C_u = L @ L.T
        C = orth_var * np.outer(a, a) + np.outer(b, b) + c @ C_u @ c.T
        return C if full else np.diag(C).copy()
    if method != 'sample':
        raise ValidationError('unknown method {0!r}'.format(method))
    if n_paths <= 0:
        raise EmptyEnsembleError('n_paths must be positive')
    rng = (rng or RngStream(settings.SEED)).with_epoch(settings.THETA_EPOCH)
    theta_star = rng.normal('teacher', n_paths, 1)[:, 0]
    xi = rng.normal('init', n_paths, 1)[:, 0]
    u = color_noise(L, rng.normal('noise', n_paths, T))
    theta = np.empty((n_paths, T + 1))
    theta[:, 0] = theta_star * params.m0 + np.sqrt(orth_var) * xi
    for t in range(T):
        theta[:, t + 1] = ((params.decay + kernels.Gamma[t]) * theta[:, t]
                           + theta[:, :t] @ kernels.R_g[t, :t] + u[:, t]
                           - theta_star * _signal_drift(kernels, t))
    if full:
        return theta.T @ theta / n_paths
    return np.mean(theta ** 2, axis=0)


def theory_curves(kernels, params, config):
    C_theta = sample_weight_process(
        kernels, params, n_paths=config.theta_paths, rng=RngStream(config.seed),
        method=config.theta_method, floor=config.psd_floor)
    m = kernels.m.copy()
    with np.errstate(divide='ignore', invalid='ignore'):
        cosine = np.where(C_theta > 0, m / np.sqrt(C_theta), 0.0)
    violations = np.flatnonzero(np.abs(cosine) > 1.0 + settings.COSINE_SLACK)
    if violations.size:
        logger.warning('|cosine| exceeds 1 at t=%s (max %.6f); m and C_theta disagree',
                       violations.tolist(), np.max(np.abs(cosine)))
    return CurveTable(
        m=m, C_theta=C_theta, cosine=cosine,
        diagnostics={'Gamma': kernels.Gamma.copy(), 'upsilon': kernels.upsilon.copy(),
                     'cosine_violations': violations.tolist()})


def save_kernels(path, result, params, config=None):
    payload = {
        'horizon': result.kernels.horizon,
        'kernels': result.kernels.to_dict(),
        'params': params.echo(),
        'solver': config.echo() if config is not None else None,
        'trace': list(result.trace),
        'noise_floor': list(result.noise_floor),
        'converged': bool(result.converged),
    }
    try:
        with open(path, 'w') as fh:
            json.dump(payload, fh, indent=2)
            fh.write('\n')
    except OSError as e:
        raise ArtifactError('cannot write kernel file {0}: {1}'.format(path, e))
    return path


def load_kernels(path):
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except (OSError, ValueError) as e:
        raise ArtifactError('cannot read kernel file {0}: {1}'.format(path, e))
    result = SolveResult(
        kernels=KernelSet.from_dict(payload['kernels']),
        trace=list(payload.get('trace', [])),
        converged=bool(payload.get('converged', False)),
        noise_floor=list(payload.get('noise_floor', [])),
    )
    return result, payload
