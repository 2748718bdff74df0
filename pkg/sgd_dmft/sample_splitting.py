"""
Gradient descent with sample splitting: a fresh data matrix at every step makes
the iterate independent of the data it meets, and the dynamics collapse to the
scalar recursion

    omega^{t+1} = (1 - gamma^t alpha E[f''(z^t)]) omega^t + gamma^t u^t,
    z^t ~ N(0, rho^t), u^t ~ N(0, tau^t), tau^t = alpha E[f'(z^t)^2].
"""
import logging
from dataclasses import dataclass

import numpy as np

from . import settings
from .exceptions import ValidationError
from .numerics import gauss_hermite_expectation
from .utils import step_schedule

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScalarDmftState:
    rho: np.ndarray
    tau: np.ndarray
    a: np.ndarray

    @property
    def abs_moment(self):
        """E|omega^t|; omega^t is centred Gaussian when omega^0 is."""
        return np.sqrt(2.0 * self.rho / np.pi)

    @property
    def horizon(self):
        return len(self.tau)


def scalar_dmft(f_prime, f_second, alpha, gamma, rho0=1.0, steps=50,
                order=settings.QUADRATURE_ORDER):
    if not rho0 > 0:
        raise ValidationError('rho0 must be > 0')
    gammas = step_schedule(gamma, steps)
    rho = np.empty(steps + 1)
    tau = np.empty(steps)
    a = np.empty(steps)
    rho[0] = rho0
    for t in range(steps):
        curvature = gauss_hermite_expectation(f_second, 0.0, rho[t], order)
        tau[t] = alpha * gauss_hermite_expectation(
            lambda z: np.asarray(f_prime(z)) ** 2, 0.0, rho[t], order)
        a[t] = 1.0 - gammas[t] * alpha * curvature
        # u^t is independent of omega^t, so the cross term vanishes
        rho[t + 1] = a[t] ** 2 * rho[t] + gammas[t] ** 2 * tau[t]
    logger.debug('scalar recursion: rho[0]=%g rho[T]=%g', rho[0], rho[-1])
    return ScalarDmftState(rho=rho, tau=tau, a=a)
