"""
Shared numerics: reproducible random streams, PSD repair of Monte Carlo
covariances, jittered Cholesky, correlated Gaussian paths and Gauss-Hermite
expectations over scalar Gaussians.
"""
import functools
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.polynomial.hermite import hermgauss

from . import settings
from .constants import PURPOSE_NOISE, PURPOSES
from .exceptions import EmptyEnsembleError, FactorizationError, NonFiniteError, ValidationError

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_MASK32 = (1 << 32) - 1


@dataclass(frozen=True)
class RngStream:
    """
    Counter-based random streams keyed by ``(seed, purpose, epoch)``.

    Paths are drawn in blocks of ``block`` rows; the block index lives in the
    top word of the Philox counter, so row ``i`` of any draw depends only on
    the key, ``i`` and the row width, never on how many rows are requested or
    in which order blocks are produced.
    """
    seed: int
    epoch: int = 0
    block: int = settings.PATH_BLOCK

    def with_epoch(self, epoch):
        return RngStream(seed=self.seed, epoch=epoch, block=self.block)

    def generator(self, purpose, index=0):
        purpose = PURPOSES.get(purpose, purpose)
        key = np.array(
            [self.seed & _MASK64, ((int(purpose) & _MASK32) << 32) | (self.epoch & _MASK32)],
            dtype=np.uint64)
        counter = np.array([0, 0, 0, index & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=counter))

    def _rows(self, purpose, n_rows, width, draw):
        if n_rows <= 0:
            raise EmptyEnsembleError('n_paths must be positive')
        n_blocks = -(-n_rows // self.block)
        blocks = [draw(self.generator(purpose, index=i), (self.block, width))
                  for i in range(n_blocks)]
        return np.concatenate(blocks, axis=0)[:n_rows]

    def normal(self, purpose, n_rows, width):
        return self._rows(purpose, n_rows, width, lambda g, shape: g.standard_normal(shape))

    def uniform(self, purpose, n_rows, width):
        return self._rows(purpose, n_rows, width, lambda g, shape: g.random(shape))


def _check_finite(K, what):
    if not np.all(np.isfinite(K)):
        bad = np.argwhere(~np.isfinite(K))
        raise NonFiniteError(
            '{0} has {1} non-finite entries, first at {2}'.format(what, len(bad), tuple(bad[0])))


def psd_project(K, floor=settings.PSD_FLOOR):
    """Clip the spectrum of a symmetric matrix from below at ``floor``."""
    K = np.asarray(K, dtype=float)
    _check_finite(K, 'kernel')
    if floor < 0:
        raise ValidationError('psd floor must be >= 0, got {0}'.format(floor))
    if K.size == 0:
        return K.copy()
    scale = max(np.max(np.abs(K)), 1.0)
    if not np.allclose(K, K.T, rtol=0.0, atol=1e-10 * scale):
        raise ValidationError('kernel is not symmetric')
    K = 0.5 * (K + K.T)
    eigenvalues, eigenvectors = np.linalg.eigh(K)
    if eigenvalues[0] >= floor:
        return K
    clipped = np.maximum(eigenvalues, floor)
    projected = (eigenvectors * clipped) @ eigenvectors.T
    return 0.5 * (projected + projected.T)


def jitter_ladder(K):
    T = K.shape[0]
    scale = np.trace(K) / T
    ladder = [0.0]
    if not scale > 0:
        return ladder
    jitter = settings.JITTER_START * scale
    while jitter <= settings.JITTER_STOP * scale * (1 + 1e-12):
        ladder.append(jitter)
        jitter *= 2.0
    return ladder


def cholesky_factor(K):
    """
    Lower Cholesky factor of a PSD matrix.

    Rank-deficient input is handled by the jitter ladder: 0, then
    ``1e-12 * trace/T`` doubling up to ``1e-6 * trace/T``. The zero matrix
    factors to zero.
    """
    K = np.asarray(K, dtype=float)
    _check_finite(K, 'kernel')
    if K.size == 0:
        return K.copy()
    if not np.any(K):
        return np.zeros_like(K)
    ladder = jitter_ladder(K)
    eye = np.eye(K.shape[0])
    for jitter in ladder:
        try:
            L = scipy.linalg.cholesky(K + jitter * eye, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            logger.debug('cholesky failed with jitter %g', jitter)
            continue
        if jitter:
            logger.debug('cholesky succeeded with jitter %g', jitter)
        return L
    raise FactorizationError(ladder)


def sample_correlated_paths(L, n_paths, rng, purpose=PURPOSE_NOISE):
    """Rows ``L @ z`` with ``z`` standard normal drawn from ``rng``."""
    if n_paths == 0:
        raise EmptyEnsembleError('n_paths must be positive')
    L = np.asarray(L, dtype=float)
    z = rng.normal(purpose, n_paths, L.shape[0])
    return color_noise(L, z)


def color_noise(L, z):
    return z @ L.T


@functools.lru_cache(maxsize=32)
def _hermite_rule(order):
    x, w = hermgauss(order)
    return np.sqrt(2.0) * x, w / np.sqrt(np.pi)


def gauss_hermite_expectation(f, mean, variance, order=settings.QUADRATURE_ORDER):
    """E[f(z)] for z ~ N(mean, variance)."""
    if variance < 0:
        raise ValidationError('variance must be >= 0, got {0}'.format(variance))
    if order < 1:
        raise ValidationError('quadrature order must be >= 1')
    nodes, weights = _hermite_rule(int(order))
    values = np.asarray(f(mean + np.sqrt(variance) * nodes), dtype=float)
    return float(np.dot(weights, values))
