import pytest

from sgd_dmft.effective_process import ModelParams
from sgd_dmft.numerics import RngStream


@pytest.fixture
def rng():
    return RngStream(seed=1234)


@pytest.fixture
def small_params():
    return ModelParams(alpha=0.9, gamma=0.04, lam=1.0, b=0.2, horizon=6)


@pytest.fixture
def minibatch_params():
    return ModelParams(alpha=0.9, gamma=0.04, lam=1.0, b=0.2, horizon=30)


@pytest.fixture
def fullbatch_params():
    return ModelParams(alpha=3.0, gamma=0.1, lam=0.5, b=1.0, m0=0.2, horizon=30)


def pytest_addoption(parser):
    parser.addoption(
        '--run-slow',
        action='store_true',
        dest="run_slow",
        default=False,
        help="run tests marked slow (full-size reproduction runs)")


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full-size reproduction runs')
    mark_expr = []

    if config.option.markexpr:
        mark_expr.append(config.option.markexpr)

    if not config.option.run_slow:
        mark_expr.append('not slow')
    if mark_expr:
        setattr(config.option, 'markexpr', ' and '.join(mark_expr))
