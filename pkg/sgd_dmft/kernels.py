import logging
from dataclasses import dataclass

import numpy as np

from . import settings
from .exceptions import ShapeMismatchError, ValidationError
from .numerics import psd_project

logger = logging.getLogger(__name__)

KERNEL_BLOCKS = ('C_g', 'R_g', 'Gamma', 'upsilon')


@dataclass(frozen=True)
class KernelSet:
    """
    Self-consistent objects over a horizon ``T``.

    ``C_g`` is the gradient covariance (T x T, symmetric PSD), ``R_g`` the
    strictly causal memory kernel, ``Gamma`` and ``upsilon`` length-T series
    and ``m`` the magnetization over T+1 times. ``m`` is always derived from
    ``m[0]``, ``decay = 1 - gamma*lambda`` and ``upsilon``.
    """
    C_g: np.ndarray
    R_g: np.ndarray
    Gamma: np.ndarray
    upsilon: np.ndarray
    m: np.ndarray
    decay: float = 1.0

    @property
    def horizon(self):
        return self.Gamma.shape[0]

    @classmethod
    def zeros(cls, params):
        T = params.horizon
        upsilon = np.zeros(T)
        return cls(
            C_g=np.zeros((T, T)),
            R_g=np.zeros((T, T)),
            Gamma=np.zeros(T),
            upsilon=upsilon,
            m=magnetization_series(params.m0, params.decay, upsilon),
            decay=params.decay,
        )

    def check(self):
        T = self.horizon
        shapes = {
            'C_g': (self.C_g.shape, (T, T)),
            'R_g': (self.R_g.shape, (T, T)),
            'upsilon': (self.upsilon.shape, (T,)),
            'm': (self.m.shape, (T + 1,)),
        }
        for name, (actual, expected) in shapes.items():
            if actual != expected:
                raise ShapeMismatchError(
                    '{0} has shape {1}, expected {2}'.format(name, actual, expected))
        if np.any(np.triu(self.R_g)):
            raise ValidationError('R_g must be strictly lower-triangular')
        return self

    def noise_covariance(self, params):
        """Covariance of the additive noise u: C_g plus the Langevin diagonal."""
        if params.temperature > 0:
            return self.C_g + params.gamma ** 2 * params.temperature * np.eye(self.horizon)
        return self.C_g

    def to_dict(self):
        return {
            'horizon': self.horizon,
            'decay': float(self.decay),
            'C_g': self.C_g.ravel().tolist(),
            'R_g': self.R_g.ravel().tolist(),
            'Gamma': self.Gamma.tolist(),
            'upsilon': self.upsilon.tolist(),
            'm': self.m.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        T = int(data['horizon'])
        return cls(
            C_g=np.asarray(data['C_g'], dtype=float).reshape(T, T),
            R_g=np.asarray(data['R_g'], dtype=float).reshape(T, T),
            Gamma=np.asarray(data['Gamma'], dtype=float),
            upsilon=np.asarray(data['upsilon'], dtype=float),
            m=np.asarray(data['m'], dtype=float),
            decay=float(data['decay']),
        ).check()


def magnetization_series(m0, decay, upsilon):
    m = np.empty(len(upsilon) + 1)
    m[0] = m0
    for t, value in enumerate(upsilon):
        m[t + 1] = decay * m[t] - value
    return m


def blend(old, proposal, damping, floor=settings.PSD_FLOOR):
    if old.horizon != proposal.horizon:
        raise ShapeMismatchError(
            'cannot blend horizons {0} and {1}'.format(old.horizon, proposal.horizon))
    if not 0 < damping <= 1:
        raise ValidationError('damping must be in (0, 1], got {0}'.format(damping))

    def mix(new, prev):
        if damping == 1:
            return new.copy()
        return damping * new + (1.0 - damping) * prev

    upsilon = mix(proposal.upsilon, old.upsilon)
    R_g = np.tril(mix(proposal.R_g, old.R_g), k=-1)
    return KernelSet(
        C_g=psd_project(mix(proposal.C_g, old.C_g), floor),
        R_g=R_g,
        Gamma=mix(proposal.Gamma, old.Gamma),
        upsilon=upsilon,
        m=magnetization_series(old.m[0], old.decay, upsilon),
        decay=old.decay,
    )


def block_changes(old, new, eps=settings.RELATIVE_EPS, atol=settings.ABSOLUTE_TOL):
    """Sup-norm relative change per block; blocks moving less than ``atol`` count as 0."""
    changes = {}
    for name in KERNEL_BLOCKS:
        before = getattr(old, name)
        delta = np.max(np.abs(getattr(new, name) - before), initial=0.0)
        if delta < atol:
            changes[name] = 0.0
        else:
            changes[name] = float(delta / (eps + np.max(np.abs(before), initial=0.0)))
    return changes


def kernel_change(old, new, eps=settings.RELATIVE_EPS, atol=settings.ABSOLUTE_TOL):
    """Largest sup-norm relative change over the blocks C_g, R_g, Gamma, upsilon."""
    return max(block_changes(old, new, eps, atol).values())


def noise_floors(old, errors, damping, multiplier, eps=settings.RELATIVE_EPS):
    """
    Relative change per block that sampling noise alone produces in a damped
    update: ``multiplier * damping * max(stderr) / (eps + max|old|)``.
    """
    return {
        name: float(multiplier * damping * np.max(errors[name], initial=0.0)
                    / (eps + np.max(np.abs(getattr(old, name)), initial=0.0)))
        for name in KERNEL_BLOCKS
    }
