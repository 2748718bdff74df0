"""
Finite-dimensional ground truth: Gaussian teacher-student data and direct
implementations of SGD, Langevin, Polyak, Nesterov and sample-splitting GD,
plus the generic runner

    v^{t+1} = h^t({v^k}) + X^T g^t(r^t),    r^t = X sum_{k<=t} v^k

that all of them are rewritten into.

Scale: X and w* have N(0, 1/d) entries, iterates are kept in coordinate scale
and observables are per coordinate, m = w.w*/sqrt(d) and C = |w|^2/d.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import settings
from .constants import (
    GRAD_NORM_MODES, GRAD_NORM_PER_BATCH, PURPOSE_DATA, PURPOSE_INIT, PURPOSE_MASK,
    PURPOSE_NOISE, PURPOSE_TEACHER, VARIANTS,
)
from .exceptions import ConfigError, DivergenceError, ShapeMismatchError, ValidationError
from .losses import get_loss, get_nonlinearity
from .numerics import RngStream
from .utils import sign, step_schedule

logger = logging.getLogger(__name__)

Schedule = Union[float, Sequence[float]]


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    w_star: np.ndarray
    y: np.ndarray
    sigma_root: Optional[np.ndarray] = None

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    @property
    def alpha(self):
        return self.n / self.d


def generate_dataset(n, d, rng, sigma_root=None):
    """``X`` is the effective design, already multiplied by ``sigma_root``."""
    if n < 1 or d < 1:
        raise ValidationError('n and d must be >= 1, got n={0}, d={1}'.format(n, d))
    scale = 1.0 / np.sqrt(d)
    X = scale * rng.generator(PURPOSE_DATA).standard_normal((n, d))
    w_star = scale * rng.generator(PURPOSE_TEACHER).standard_normal(d)
    if sigma_root is not None:
        sigma_root = np.asarray(sigma_root, dtype=float)
        if sigma_root.shape != (d, d):
            raise ShapeMismatchError(
                'sigma_root has shape {0}, expected {1}'.format(sigma_root.shape, (d, d)))
        if not np.array_equal(sigma_root, np.eye(d)):
            X = X @ sigma_root
    return Dataset(X=X, w_star=w_star, y=sign(X @ w_star), sigma_root=sigma_root)


@dataclass(frozen=True)
class AlgorithmSpec:
    variant: str = 'sgd'
    gamma: float = 0.1
    b: float = 1.0
    lam: float = 0.0
    temperature: float = 0.0
    beta: float = 0.0
    steps: int = 30
    loss: str = settings.LOSS
    c0: float = settings.C0
    m0: Optional[float] = None
    grad_norm_mode: str = settings.GRAD_NORM_MODE
    # Nesterov schedules; nesterov_gamma falls back to gamma
    tau: Schedule = 0.0
    mu: Schedule = 0.0
    nesterov_alpha: Schedule = 0.0
    nesterov_gamma: Optional[Schedule] = None

    def __post_init__(self):
        problems = []
        if self.variant not in VARIANTS:
            problems.append('variant must be one of {0}'.format(VARIANTS))
        if self.steps < 1:
            problems.append('steps must be >= 1')
        if self.gamma < 0:
            problems.append('gamma must be >= 0')
        if not 0 < self.b <= 1:
            problems.append('b must be in (0, 1]')
        if self.lam < 0:
            problems.append('lambda must be >= 0')
        if self.temperature < 0:
            problems.append('temperature must be >= 0')
        if not 0 <= self.beta < 1:
            problems.append('beta must be in [0, 1)')
        if not self.c0 > 0:
            problems.append('c0 must be > 0')
        elif self.m0 is not None and self.m0 ** 2 > self.c0:
            problems.append('|m0| must not exceed sqrt(c0)')
        if self.grad_norm_mode not in GRAD_NORM_MODES:
            problems.append('grad_norm_mode must be one of {0}'.format(GRAD_NORM_MODES))
        if problems:
            raise ValidationError('; '.join(problems))
        get_loss(self.loss)
        for name in ('tau', 'mu', 'nesterov_alpha'):
            self.schedule(name)

    @classmethod
    def from_model(cls, params, **kwargs):
        """Simulation settings matching a ``ModelParams`` instance."""
        kwargs.setdefault('steps', params.horizon)
        return cls(
            gamma=params.gamma, b=params.b, lam=params.lam, temperature=params.temperature,
            loss=params.loss, c0=params.c0, m0=params.m0,
            grad_norm_mode=params.grad_norm_mode, **kwargs)

    @property
    def loss_spec(self):
        return get_loss(self.loss)

    @property
    def batch_scale(self):
        if self.grad_norm_mode == GRAD_NORM_PER_BATCH:
            return 1.0 / self.b
        return 1.0

    def schedule(self, name):
        value = getattr(self, name)
        if name == 'nesterov_gamma' and value is None:
            value = self.gamma
        return step_schedule(value, self.steps)

    def echo(self):
        def plain(value):
            return value if np.ndim(value) == 0 else [float(x) for x in value]

        return {
            'variant': self.variant, 'gamma': self.gamma, 'b': self.b, 'lambda': self.lam,
            'temperature': self.temperature, 'beta': self.beta, 'steps': self.steps,
            'loss': self.loss, 'c0': self.c0, 'm0': self.m0,
            'grad_norm_mode': self.grad_norm_mode, 'tau': plain(self.tau),
            'mu': plain(self.mu), 'nesterov_alpha': plain(self.nesterov_alpha),
            'nesterov_gamma': None if self.nesterov_gamma is None else plain(self.nesterov_gamma),
        }


@dataclass
class SimObservables:
    m: np.ndarray
    C: np.ndarray
    cosine: np.ndarray
    loss: np.ndarray
    trajectory: Optional[np.ndarray] = None
    extra: dict = field(default_factory=dict)

    @property
    def t(self):
        return np.arange(len(self.m))

    def rows(self):
        for t, row in enumerate(zip(self.m, self.C, self.cosine, self.loss)):
            yield (t,) + tuple(float(x) for x in row)


def observe(data, trajectory, loss):
    """Per-step observables of a ``(steps + 1, d)`` trajectory."""
    trajectory = np.atleast_2d(trajectory)
    d = data.d
    m = trajectory @ data.w_star / np.sqrt(d)
    C = np.einsum('ti,ti->t', trajectory, trajectory) / d
    with np.errstate(divide='ignore', invalid='ignore'):
        cosine = np.where(C > 0, m / np.sqrt(C * (data.w_star @ data.w_star)), 0.0)
    r = data.X @ trajectory.T
    train_loss = get_loss(loss).value(r, data.y[:, None]).mean(axis=0)
    return SimObservables(
        m=m, C=C, cosine=np.clip(cosine, -1.0, 1.0), loss=train_loss, trajectory=trajectory)


def init_weights(data, spec, rng):
    """
    w^0 with N(0, c0) entries; with ``spec.m0`` set, the teacher overlap is
    pinned to m0 and the orthogonal part carries variance c0 - m0^2.
    """
    xi = rng.generator(PURPOSE_INIT).standard_normal(data.d)
    if spec.m0 is None:
        return np.sqrt(spec.c0) * xi
    w_star = data.w_star
    norm2 = w_star @ w_star
    xi_perp = xi - (xi @ w_star / norm2) * w_star
    return (spec.m0 * np.sqrt(data.d) / norm2) * w_star + np.sqrt(spec.c0 - spec.m0 ** 2) * xi_perp


def draw_masks(data, spec, rng):
    return (rng.generator(PURPOSE_MASK).random((spec.steps, data.n)) < spec.b).astype(float)


def langevin_noise(data, spec, rng):
    return rng.generator(PURPOSE_NOISE).standard_normal((spec.steps, data.d))


def _descent(data, w, loss, gamma, lam, mask=None, scale=1.0):
    """gamma * (scale * X^T (mask * l'(Xw, y)) + lam * w)"""
    g = loss.first(data.X @ w, data.y)
    if mask is not None:
        g = mask * g
    return gamma * (scale * (data.X.T @ g) + lam * w)


def _guard(w, step):
    norm = np.linalg.norm(w)
    if not np.isfinite(norm) or norm > settings.SIM_DIVERGENCE_BOUND:
        raise DivergenceError(step, 'Iterate norm {0:.3e} at step {1}'.format(norm, step))


def _start(data, spec, rng, w0):
    if w0 is None:
        return init_weights(data, spec, rng)
    w0 = np.asarray(w0, dtype=float)
    if w0.shape != (data.d,):
        raise ShapeMismatchError('w0 has shape {0}, expected {1}'.format(w0.shape, (data.d,)))
    return w0.copy()


def run_sgd(data, spec, rng, masks=None, w0=None):
    """
    w^{t+1} = w^t - gamma ((1/b) X^T (s^t * l'(X w^t, y)) + lambda w^t)

    ``masks`` (steps x n, 0/1) replaces the Bernoulli(b) draws.
    """
    loss = spec.loss_spec
    if masks is None:
        masks = draw_masks(data, spec, rng)
    masks = np.asarray(masks, dtype=float)
    if masks.shape != (spec.steps, data.n):
        raise ShapeMismatchError(
            'masks have shape {0}, expected {1}'.format(masks.shape, (spec.steps, data.n)))
    trajectory = np.empty((spec.steps + 1, data.d))
    w = trajectory[0] = _start(data, spec, rng, w0)
    for t in range(spec.steps):
        w = w - _descent(data, w, loss, spec.gamma, spec.lam, masks[t], spec.batch_scale)
        _guard(w, t + 1)
        trajectory[t + 1] = w
    return observe(data, trajectory, loss)


def run_langevin(data, spec, rng, noise=None, w0=None):
    """Full-batch gradient step plus gamma sqrt(T) z^t."""
    loss = spec.loss_spec
    if noise is None:
        noise = langevin_noise(data, spec, rng)
    spread = spec.gamma * np.sqrt(spec.temperature)
    trajectory = np.empty((spec.steps + 1, data.d))
    w = trajectory[0] = _start(data, spec, rng, w0)
    for t in range(spec.steps):
        w = w - _descent(data, w, loss, spec.gamma, spec.lam) + spread * noise[t]
        _guard(w, t + 1)
        trajectory[t + 1] = w
    return observe(data, trajectory, loss)


def run_polyak(data, spec, rng, w0=None, w_prev=None):
    """Heavy ball; ``w_prev`` is w^{-1} and defaults to w^0 (zero initial velocity)."""
    loss = spec.loss_spec
    trajectory = np.empty((spec.steps + 1, data.d))
    w = trajectory[0] = _start(data, spec, rng, w0)
    prev = w if w_prev is None else np.asarray(w_prev, dtype=float)
    for t in range(spec.steps):
        step = w - _descent(data, w, loss, spec.gamma, spec.lam)
        if spec.beta:
            step = step + spec.beta * (w - prev)
        prev, w = w, step
        _guard(w, t + 1)
        trajectory[t + 1] = w
    return observe(data, trajectory, loss)


def run_nesterov(data, spec, rng, w0=None, z0=None):
    """
    Three sequences, for t = 0 .. steps - 1:

        y^t     = w^t + tau^t (z^t - w^t)
        w^{t+1} = y^t - gamma^t grad(y^t)
        z^{t+1} = z^t + mu^t (y^t - z^t) - alpha^t grad(y^t)

    with grad the full-batch ridge-regularized loss gradient. Observables
    follow w; the z trajectory is kept in ``extra['z']``.
    """
    loss = spec.loss_spec
    tau, mu = spec.schedule('tau'), spec.schedule('mu')
    gammas, alphas = spec.schedule('nesterov_gamma'), spec.schedule('nesterov_alpha')
    trajectory = np.empty((spec.steps + 1, data.d))
    companion = np.empty_like(trajectory)
    w = trajectory[0] = _start(data, spec, rng, w0)
    z = companion[0] = w.copy() if z0 is None else np.asarray(z0, dtype=float)
    for t in range(spec.steps):
        y = w + tau[t] * (z - w)
        grad = _descent(data, y, loss, 1.0, spec.lam)
        w = y - gammas[t] * grad
        z = z + mu[t] * (y - z) - alphas[t] * grad
        _guard(w, t + 1)
        trajectory[t + 1] = w
        companion[t + 1] = z
    result = observe(data, trajectory, loss)
    result.extra['z'] = companion
    return result


@dataclass
class GenericHistory:
    """Increments v^0..v^T and iterates sum_{k<=t} v^k, each (T+1, d, q)."""
    increments: np.ndarray
    iterates: np.ndarray

    @property
    def steps(self):
        return self.increments.shape[0] - 1

    def column(self, j=0):
        return self.iterates[:, :, j]


def run_generic_dynamics(h_fn, g_fn, data, v0, steps):
    """
    ``h_fn(t, increments)`` gets the list [v^0, .., v^t] of (d, q) arrays and
    returns a (d, q) array; ``g_fn(t, r)`` gets r^t (n, q) and returns (n, q).
    A 1-D ``v0`` is treated as q = 1.
    """
    v = np.asarray(v0, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if v.ndim != 2 or v.shape[0] != data.d or v.shape[1] not in (1, 2):
        raise ShapeMismatchError(
            'v0 must be (d,) or (d, q) with d={0}, q in (1, 2); got {1}'.format(
                data.d, np.shape(v0)))
    q = v.shape[1]
    increments = [v.copy()]
    iterates = [v.copy()]
    x = v.copy()
    for t in range(steps):
        r = data.X @ x
        g = np.asarray(g_fn(t, r), dtype=float)
        if g.shape != (data.n, q):
            raise ShapeMismatchError(
                'g_fn returned shape {0}, expected {1}'.format(g.shape, (data.n, q)))
        h = np.asarray(h_fn(t, increments), dtype=float)
        if h.shape != (data.d, q):
            raise ShapeMismatchError(
                'h_fn returned shape {0}, expected {1}'.format(h.shape, (data.d, q)))
        v = h + data.X.T @ g
        x = x + v
        _guard(x, t + 1)
        increments.append(v)
        iterates.append(x)
    return GenericHistory(increments=np.stack(increments), iterates=np.stack(iterates))


def _current(increments):
    return np.sum(increments, axis=0)


def sgd_mapping(data, spec, masks):
    """g^t = -gamma/b s^t * l'(r^t, y), h^t = -gamma lambda w^t"""
    loss = spec.loss_spec
    rate = spec.gamma * spec.batch_scale

    def g_fn(t, r):
        return -rate * (masks[t] * loss.first(r[:, 0], data.y))[:, None]

    def h_fn(t, increments):
        return -spec.gamma * spec.lam * _current(increments)

    return h_fn, g_fn


def langevin_mapping(data, spec, noise):
    loss = spec.loss_spec
    spread = spec.gamma * np.sqrt(spec.temperature)

    def g_fn(t, r):
        return -spec.gamma * loss.first(r, data.y[:, None])

    def h_fn(t, increments):
        return -spec.gamma * spec.lam * _current(increments) + spread * noise[t][:, None]

    return h_fn, g_fn


def polyak_mapping(data, spec, velocity0=None):
    """
    g^t = -gamma l'(r^t, y), h^t = -gamma lambda w^t + beta v^t; v^0 is the
    starting point, so the first momentum term uses ``velocity0`` (w^0 - w^{-1},
    zero by default).
    """
    loss = spec.loss_spec

    def g_fn(t, r):
        return -spec.gamma * loss.first(r, data.y[:, None])

    def h_fn(t, increments):
        h = -spec.gamma * spec.lam * _current(increments)
        if t:
            h = h + spec.beta * increments[t]
        elif velocity0 is not None:
            h = h + spec.beta * np.asarray(velocity0, dtype=float)[:, None]
        return h

    return h_fn, g_fn


def nesterov_mapping(data, spec):
    """
    Columns (w, z) stacked into q = 2; with y^t = (1 - tau^t) w^t + tau^t z^t the
    increments are

        u^{t+1} = tau^t (z^t - w^t) - gamma^t (X^T l'(X y^t) + lambda y^t)
        v^{t+1} = mu^t (y^t - z^t) - alpha^t (X^T l'(X y^t) + lambda y^t)
    """
    loss = spec.loss_spec
    tau, mu = spec.schedule('tau'), spec.schedule('mu')
    gammas, alphas = spec.schedule('nesterov_gamma'), spec.schedule('nesterov_alpha')

    def mix(t):
        return np.array([1.0 - tau[t], tau[t]])

    def g_fn(t, r):
        lp = loss.first(r @ mix(t), data.y)
        return np.stack([-gammas[t] * lp, -alphas[t] * lp], axis=1)

    def h_fn(t, increments):
        x = _current(increments)
        y = x @ mix(t)
        w, z = x[:, 0], x[:, 1]
        return np.stack([
            tau[t] * (z - w) - gammas[t] * spec.lam * y,
            mu[t] * (y - z) - alphas[t] * spec.lam * y,
        ], axis=1)

    return h_fn, g_fn


def _generic_as_sgd(data, spec, rng):
    """The ``generic`` variant: SGD routed through ``run_generic_dynamics``."""
    masks = draw_masks(data, spec, rng)
    w0 = init_weights(data, spec, rng)
    h_fn, g_fn = sgd_mapping(data, spec, masks)
    history = run_generic_dynamics(h_fn, g_fn, data, w0, spec.steps)
    return observe(data, history.column(0), spec.loss)


RUNNERS = {
    'sgd': run_sgd,
    'langevin': run_langevin,
    'polyak': run_polyak,
    'nesterov': run_nesterov,
    'generic': _generic_as_sgd,
}


def run_variant(data, spec, rng):
    try:
        runner = RUNNERS[spec.variant]
    except KeyError:
        raise ConfigError(
            'variant {0!r} has no dataset-based runner; use the split command'.format(
                spec.variant), keys=('sim.variant',))
    return runner(data, spec, rng)


def simulate_seeds(spec, n, d, seeds, sigma_root=None):
    """One fresh dataset and run per seed."""
    runs = []
    for seed in seeds:
        rng = RngStream(seed)
        data = generate_dataset(n, d, rng, sigma_root)
        runs.append(run_variant(data, spec, rng))
        logger.debug('seed %d: cosine[T] %.6f', seed, runs[-1].cosine[-1])
    return runs


def aggregate(runs):
    """Mean and standard deviation over runs (ddof=1 when there are at least two)."""
    if not runs:
        raise ValidationError('no runs to aggregate')
    ddof = 1 if len(runs) > 1 else 0
    table = {'t': runs[0].t}
    for name in ('m', 'C', 'cosine'):
        values = np.stack([getattr(run, name) for run in runs])
        table[name + '_mean'] = values.mean(axis=0)
        table[name + '_sd'] = values.std(axis=0, ddof=ddof)
    table['loss_mean'] = np.stack([run.loss for run in runs]).mean(axis=0)
    return table


@dataclass
class SplitObservables:
    """rho_hat = |w|^2 / d and abs_moment_hat = mean |w_i| per step."""
    rho_hat: np.ndarray
    abs_moment_hat: np.ndarray

    @property
    def t(self):
        return np.arange(len(self.rho_hat))


def run_sample_split_gd(f_prime, gamma, n, d, steps, rng, rho0=1.0):
    """w^{t+1} = w^t - gamma^t A^T f'(A w^t), a fresh A (n x d, N(0, 1/d)) every step."""
    if n < 1 or d < 1:
        raise ValidationError('n and d must be >= 1, got n={0}, d={1}'.format(n, d))
    if not rho0 > 0:
        raise ValidationError('rho0 must be > 0')
    if not callable(f_prime):
        f_prime = get_nonlinearity(f_prime).first
    gammas = step_schedule(gamma, steps)
    w = np.sqrt(rho0) * rng.generator(PURPOSE_INIT).standard_normal(d)
    source = rng.generator(PURPOSE_DATA)
    scale = 1.0 / np.sqrt(d)
    rho_hat = np.empty(steps + 1)
    abs_hat = np.empty(steps + 1)
    rho_hat[0], abs_hat[0] = w @ w / d, np.mean(np.abs(w))
    for t in range(steps):
        A = scale * source.standard_normal((n, d))
        w = w - gammas[t] * (A.T @ f_prime(A @ w))
        _guard(w, t + 1)
        rho_hat[t + 1], abs_hat[t + 1] = w @ w / d, np.mean(np.abs(w))
    return SplitObservables(rho_hat=rho_hat, abs_moment_hat=abs_hat)


def average_sample_split_runs(f_prime, gamma, n, d, steps, rng, rho0=1.0, runs=1):
    """Average of ``runs`` independent runs, run ``k`` on epoch ``k`` of ``rng``."""
    if runs < 1:
        raise ValidationError('runs must be >= 1')
    results = [run_sample_split_gd(f_prime, gamma, n, d, steps, rng.with_epoch(k), rho0)
               for k in range(runs)]
    return SplitObservables(
        rho_hat=np.mean([r.rho_hat for r in results], axis=0),
        abs_moment_hat=np.mean([r.abs_moment_hat for r in results], axis=0))
