"""
The one-dimensional effective pre-activation process

    eta^{t+1} = (1 - gamma*lambda + Gamma^t) eta^t - gamma_g s^t l'(eta^t + eta* m^t, y)
                + sum_{k<t} R_g(t, k) eta^k + u^t

simulated for an ensemble of paths, together with the Jacobians
d eta^t / d u^s. A field h^s on the loss argument at time s moves eta^{s+1}
by -gamma_g s^s l''^s h^s, so the Jacobians also carry the memory kernel.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import settings
from .constants import (
    GRAD_NORM_MODES, GRAD_NORM_PER_BATCH, PURPOSE_INIT, PURPOSE_MASK, PURPOSE_NOISE,
    PURPOSE_TEACHER,
)
from .exceptions import DivergenceError, EmptyEnsembleError, ShapeMismatchError, ValidationError
from .losses import get_loss
from .numerics import cholesky_factor, color_noise, psd_project
from .utils import sign

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    gamma: float = 0.1
    lam: float = 0.0
    b: float = 1.0
    temperature: float = 0.0
    horizon: int = 30
    loss: str = settings.LOSS
    m0: float = settings.M0
    c0: float = settings.C0
    grad_norm_mode: str = settings.GRAD_NORM_MODE

    def __post_init__(self):
        problems = []
        if not self.alpha > 0:
            problems.append('alpha must be > 0')
        if self.gamma < 0:
            problems.append('gamma must be >= 0')
        if self.lam < 0:
            problems.append('lambda must be >= 0')
        if not 0 < self.b <= 1:
            problems.append('b must be in (0, 1]')
        if self.temperature < 0:
            problems.append('temperature must be >= 0')
        if self.horizon < 1:
            problems.append('horizon must be >= 1')
        if not self.c0 > 0:
            problems.append('c0 must be > 0')
        elif abs(self.m0) > np.sqrt(self.c0):
            problems.append('|m0| must not exceed sqrt(c0)')
        if self.grad_norm_mode not in GRAD_NORM_MODES:
            problems.append('grad_norm_mode must be one of {0}'.format(GRAD_NORM_MODES))
        if problems:
            raise ValidationError('; '.join(problems))
        get_loss(self.loss)

    @property
    def loss_spec(self):
        return get_loss(self.loss)

    @property
    def gamma_g(self):
        """Prefactor of the per-sample gradient term."""
        if self.grad_norm_mode == GRAD_NORM_PER_BATCH:
            return self.gamma / self.b
        return self.gamma

    @property
    def decay(self):
        return 1.0 - self.gamma * self.lam

    def echo(self):
        return {
            'alpha': self.alpha, 'gamma': self.gamma, 'lambda': self.lam, 'b': self.b,
            'temperature': self.temperature, 'horizon': self.horizon, 'loss': self.loss,
            'm0': self.m0, 'c0': self.c0, 'grad_norm_mode': self.grad_norm_mode,
        }


def loss_derivatives(loss, r, y):
    """(l, l', l'') of ``loss`` at pre-activation ``r`` and label ``y``."""
    return get_loss(loss).derivatives(r, y)


@dataclass(frozen=True)
class PathDraws:
    """Raw randomness of an ensemble; ``z`` is white and gets coloured by the kernels."""
    eta0: np.ndarray
    eta_star: np.ndarray
    masks: np.ndarray
    z: np.ndarray

    @property
    def n_paths(self):
        return self.eta0.shape[0]


def draw_paths(params, n_paths, rng):
    if n_paths <= 0:
        raise EmptyEnsembleError('n_paths must be positive')
    T = params.horizon
    spread = np.sqrt(params.c0 - params.m0 ** 2)
    return PathDraws(
        eta0=spread * rng.normal(PURPOSE_INIT, n_paths, 1)[:, 0],
        eta_star=rng.normal(PURPOSE_TEACHER, n_paths, 1)[:, 0],
        masks=(rng.uniform(PURPOSE_MASK, n_paths, T) < params.b).astype(float),
        z=rng.normal(PURPOSE_NOISE, n_paths, T),
    )


@dataclass(frozen=True)
class EffectivePath:
    eta: np.ndarray
    eta_star: float
    y: float
    s: np.ndarray
    u: np.ndarray
    jac: np.ndarray


@dataclass
class PathEnsemble:
    """Vectorized ensemble; row ``i`` of every array belongs to path ``i``."""
    eta: np.ndarray
    eta_star: np.ndarray
    y: np.ndarray
    masks: np.ndarray
    u: np.ndarray
    m: np.ndarray
    jac: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = field(default=None)

    @property
    def n_paths(self):
        return self.eta.shape[0]

    @property
    def horizon(self):
        return self.masks.shape[1]

    def preactivations(self):
        """r^t = eta^t + eta* m^t for t < T."""
        return self.eta[:, :-1] + self.eta_star[:, None] * self.m[None, :-1]

    def path(self, i):
        return EffectivePath(
            eta=self.eta[i], eta_star=float(self.eta_star[i]), y=float(self.y[i]),
            s=self.masks[i], u=self.u[i],
            jac=None if self.jac is None else self.jac[i])

    def __len__(self):
        return self.n_paths

    def __iter__(self):
        return (self.path(i) for i in range(self.n_paths))


def _check_horizon(params, kernels):
    if kernels.horizon != params.horizon:
        raise ShapeMismatchError(
            'kernels have horizon {0}, params {1}'.format(kernels.horizon, params.horizon))


def noise_factor(params, kernels, floor=settings.PSD_FLOOR):
    return cholesky_factor(psd_project(kernels.noise_covariance(params), floor))


def _forward(params, kernels, eta0, eta_star, y, masks, u, shift=None):
    T = params.horizon
    loss = params.loss_spec
    gamma_g = params.gamma_g
    drift = params.decay + kernels.Gamma
    eta = np.empty((eta0.shape[0], T + 1))
    eta[:, 0] = eta0
    for t in range(T):
        r = eta[:, t] + eta_star * kernels.m[t]
        if shift is not None:
            r = r + shift[t]
        memory = eta[:, :t] @ kernels.R_g[t, :t]
        eta[:, t + 1] = (drift[t] * eta[:, t] - gamma_g * masks[:, t] * loss.first(r, y)
                         + memory + u[:, t])
        step = eta[:, t + 1]
        if not np.all(np.isfinite(step)) or np.max(np.abs(step)) > settings.DIVERGENCE_BOUND:
            raise DivergenceError(t + 1)
    return eta


def integrate_paths(params, kernels, draws, weights=None, floor=settings.PSD_FLOOR):
    """Deterministic forward pass of the effective process from explicit draws."""
    _check_horizon(params, kernels)
    if draws.n_paths == 0:
        raise EmptyEnsembleError('no paths to integrate')
    u = color_noise(noise_factor(params, kernels, floor), draws.z)
    y = sign(draws.eta_star)
    eta = _forward(params, kernels, draws.eta0, draws.eta_star, y, draws.masks, u)
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
    ensemble = PathEnsemble(
        eta=eta, eta_star=draws.eta_star, y=y, masks=draws.masks, u=u,
        m=kernels.m.copy(), weights=weights)
    ensemble.jac = propagate_jacobian(ensemble, params, kernels)
    return ensemble


def simulate_paths(params, kernels, n_paths, rng, draws=None):
    if draws is None:
        draws = draw_paths(params, n_paths, rng)
    return integrate_paths(params, kernels, draws)


def propagate_jacobian(ensemble, params, kernels):
    """
    jac[:, t, s] = d eta^t / d u^s, zero for t <= s:

        jac[t+1][s] = (1 - gamma*lambda + Gamma^t - gamma_g s^t l''^t) jac[t][s]
                      + sum_{k<t} R_g(t, k) jac[k][s] + delta_{t,s}
    """
    T = params.horizon
    second = params.loss_spec.second
    r = ensemble.preactivations()
    jac = np.zeros((ensemble.n_paths, T + 1, T))
    for t in range(T):
        coef = (params.decay + kernels.Gamma[t]
                - params.gamma_g * ensemble.masks[:, t] * second(r[:, t], ensemble.y))
        jac[:, t + 1, :] = coef[:, None] * jac[:, t, :]
        if t:
            jac[:, t + 1, :] += np.einsum('k,nks->ns', kernels.R_g[t, :t], jac[:, :t, :])
        jac[:, t + 1, t] += 1.0
    if not np.all(np.isfinite(jac)):
        raise DivergenceError(T, 'Jacobian propagation produced non-finite values')
    return jac


def weighted_mean(values, weights=None):
    if weights is None:
        return values.mean(axis=0)
    return np.tensordot(weights, values, axes=(0, 0))


def finite_difference_response(params, kernels, draws, eps=1e-4, weights=None):
    """
    R_g estimated by shifting the loss argument at time s by ``eps`` and
    re-running the forward pass on identical draws. Only t > s is kept; the
    same-time response is Gamma.
    """
    ensemble = integrate_paths(params, kernels, draws, weights=weights)
    first = params.loss_spec.first
    T = params.horizon
    base = first(ensemble.preactivations(), ensemble.y[:, None])
    R = np.zeros((T, T))
    for s in range(T - 1):
        shift = np.zeros(T)
        shift[s] = eps
        eta = _forward(params, kernels, draws.eta0, draws.eta_star, ensemble.y, draws.masks,
                       ensemble.u, shift=shift)
        kicked = replace(ensemble, eta=eta)
        delta = (first(kicked.preactivations(), ensemble.y[:, None]) - base) / eps
        response = weighted_mean(ensemble.masks * delta, ensemble.weights)
        R[s + 1:, s] = -params.alpha * params.gamma_g * response[s + 1:]
    return R
