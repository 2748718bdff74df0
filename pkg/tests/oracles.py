"""
Sampling-free reference solver: the effective process is integrated on a
tensor grid of quadrature nodes and every mask pattern is enumerated with
its Bernoulli weight.

eta* is integrated over the half-line with y = +1. Flipping (eta0, eta*, z)
together maps every path onto its mirror image with y = -1, and all kernel
estimators are even under that flip, so the half-line is enough and the
kink of sign(eta*) never falls inside a quadrature panel.
"""
import itertools

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss
from scipy.stats import norm

from sgd_dmft.effective_process import PathDraws, integrate_paths
from sgd_dmft.kernels import KernelSet, kernel_change
from sgd_dmft.solver import damped_update, estimate_kernels

# the Gaussian tail beyond this is below 1e-15
HALF_LINE_CUTOFF = 8.0


def _normal_rule(order):
    x, w = hermgauss(order)
    return np.sqrt(2.0) * x, w / np.sqrt(np.pi)


def half_line_rule(order):
    """Nodes and weights with sum w g(x) = E[g(|eta*|)] for eta* ~ N(0, 1)."""
    x, w = leggauss(order)
    half = 0.5 * HALF_LINE_CUTOFF
    nodes = half * (x + 1.0)
    return nodes, half * w * 2.0 * norm.pdf(nodes)


def _mask_patterns(T, b):
    for pattern in itertools.product((0.0, 1.0), repeat=T):
        k = sum(pattern)
        weight = b ** k * (1.0 - b) ** (T - k)
        if weight > 0:
            yield np.array(pattern), weight


def quadrature_draws(params, order=8, star_order=24):
    """Grid draws and their weights (summing to one)."""
    T = params.horizon
    normal_x, normal_w = _normal_rule(order)
    star_x, star_w = half_line_rule(star_order)
    spread = np.sqrt(params.c0 - params.m0 ** 2)

    grids = np.meshgrid(*([normal_x] * (T + 1) + [star_x]), indexing='ij')
    weight_grids = np.meshgrid(*([normal_w] * (T + 1) + [star_w]), indexing='ij')
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    node_weights = np.prod(np.stack([g.ravel() for g in weight_grids], axis=1), axis=1)

    eta0, z, eta_star = spread * nodes[:, 0], nodes[:, 1:T + 1], nodes[:, T + 1]
    parts = []
    for pattern, weight in _mask_patterns(T, params.b):
        parts.append((np.tile(pattern, (len(nodes), 1)), weight * node_weights))
    n_patterns = len(parts)
    draws = PathDraws(
        eta0=np.tile(eta0, n_patterns),
        eta_star=np.tile(eta_star, n_patterns),
        masks=np.concatenate([p[0] for p in parts]),
        z=np.tile(z, (n_patterns, 1)),
    )
    weights = np.concatenate([p[1] for p in parts])
    return draws, weights / weights.sum()


def quadrature_kernels(params, kernels, order=8, star_order=24):
    """Kernel proposal under ``kernels`` computed on the quadrature grid."""
    draws, weights = quadrature_draws(params, order, star_order)
    ensemble = integrate_paths(params, kernels, draws, weights=weights)
    return estimate_kernels(ensemble, params)


def quadrature_solve(params, damping=0.7, max_sweeps=300, tol=1e-9, order=8, star_order=24):
    draws, weights = quadrature_draws(params, order, star_order)
    kernels = KernelSet.zeros(params)
    for _ in range(max_sweeps):
        ensemble = integrate_paths(params, kernels, draws, weights=weights)
        updated = damped_update(kernels, estimate_kernels(ensemble, params), damping)
        change = kernel_change(kernels, updated)
        kernels = updated
        if change < tol:
            break
    return kernels
