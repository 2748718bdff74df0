"""
Scalar losses ``l(r, y)`` with their first two derivatives in ``r``, and the
scalar nonlinearities used by gradient descent with sample splitting.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit, log_expit

from .exceptions import ValidationError


@dataclass(frozen=True)
class LossSpec:
    name: str
    value: Callable
    first: Callable
    second: Callable

    def derivatives(self, r, y):
        return self.value(r, y), self.first(r, y), self.second(r, y)


def _logistic_value(r, y):
    return -log_expit(y * r)


def _logistic_first(r, y):
    return -y * expit(-y * r)


def _logistic_second(r, y):
    # sigma(yr) * sigma(-yr), both factors bounded so no overflow for large |r|
    z = y * r
    return expit(z) * expit(-z)


LOGISTIC = LossSpec('logistic', _logistic_value, _logistic_first, _logistic_second)

SQUARE = LossSpec(
    'square',
    lambda r, y: 0.5 * (r - y) ** 2,
    lambda r, y: r - y,
    lambda r, y: np.ones_like(np.asarray(r * y, dtype=float)),
)

LOSSES = {loss.name: loss for loss in (LOGISTIC, SQUARE)}


def get_loss(loss):
    if isinstance(loss, LossSpec):
        return loss
    try:
        return LOSSES[loss]
    except KeyError:
        raise ValidationError(
            'Unknown loss {0!r}, expected one of {1}'.format(loss, sorted(LOSSES)))


@dataclass(frozen=True)
class Nonlinearity:
    name: str
    first: Callable
    second: Callable


def _tanh_second(z):
    return 1.0 - np.tanh(z) ** 2


NONLINEARITIES = {
    'tanh': Nonlinearity('tanh', np.tanh, _tanh_second),
    'linear': Nonlinearity('linear', lambda z: z, lambda z: np.ones_like(np.asarray(z, float))),
    'logistic': Nonlinearity(
        'logistic', expit, lambda z: expit(z) * expit(-z)),
}


def get_nonlinearity(name):
    if isinstance(name, Nonlinearity):
        return name
    try:
        return NONLINEARITIES[name]
    except KeyError:
        raise ValidationError(
            'Unknown nonlinearity {0!r}, expected one of {1}'.format(
                name, sorted(NONLINEARITIES)))
