import datetime

import numpy as np

from . import settings
from .exceptions import ValidationError

DATETIME_FORMAT = "%Y-%m-%dT%H:%M:%S"


def format_dt(dt):
    return dt.strftime(DATETIME_FORMAT)


def parse_datetime(dt_string):
    from dateutil.parser import parse
    return parse(dt_string)


def utcnow():
    return datetime.datetime.now(datetime.timezone.utc).replace(tzinfo=None)


def format_float(value):
    return format(float(value), settings.FLOAT_FORMAT)


def sign(x):
    """sign with sign(0) := +1"""
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


def step_schedule(value, steps):
    """Broadcast a scalar step size to ``steps`` entries, or check a given schedule."""
    if np.ndim(value) == 0:
        return np.full(steps, float(value))
    schedule = np.asarray(value, dtype=float)
    if schedule.shape != (steps,):
        raise ValidationError(
            'schedule has length {0}, expected {1}'.format(len(schedule), steps))
    return schedule
