import numpy as np
import pytest

from sgd_dmft.exceptions import ConfigError, DivergenceError, ShapeMismatchError, ValidationError
from sgd_dmft.finite_sim import (
    AlgorithmSpec, Dataset, aggregate, draw_masks, generate_dataset, init_weights,
    langevin_mapping, langevin_noise, nesterov_mapping, polyak_mapping, run_generic_dynamics,
    run_langevin, run_nesterov, run_polyak, run_sample_split_gd, run_sgd, run_variant,
    sgd_mapping, simulate_seeds,
)
from sgd_dmft.numerics import RngStream


@pytest.fixture
def data(rng):
    return generate_dataset(45, 50, rng)


def test_dataset_is_reproducible():
    first = generate_dataset(3, 4, RngStream(seed=9))
    second = generate_dataset(3, 4, RngStream(seed=9))
    assert np.array_equal(first.X, second.X)
    assert np.array_equal(first.w_star, second.w_star)
    assert np.array_equal(first.y, second.y)
    assert set(np.unique(first.y)) <= {-1.0, 1.0}


def test_dataset_moments():
    n, d = 10000, 1000
    data = generate_dataset(n, d, RngStream(seed=0))
    assert abs(data.X.mean()) <= 4.0 / np.sqrt(n * d * d)
    assert data.X.var() == pytest.approx(1.0 / d, rel=0.05)
    assert abs(data.w_star @ data.w_star - 1.0) <= 5.0 / np.sqrt(d)
    assert data.alpha == 10.0


def test_identity_covariance_root_changes_nothing():
    plain = generate_dataset(20, 8, RngStream(seed=4))
    rooted = generate_dataset(20, 8, RngStream(seed=4), sigma_root=np.eye(8))
    assert np.array_equal(plain.X, rooted.X)
    assert np.array_equal(plain.y, rooted.y)


def test_covariance_root_transforms_design():
    sigma_root = np.diag(np.linspace(0.5, 2.0, 8))
    plain = generate_dataset(20, 8, RngStream(seed=4))
    rooted = generate_dataset(20, 8, RngStream(seed=4), sigma_root=sigma_root)
    assert np.allclose(rooted.X, plain.X @ sigma_root)
    assert np.array_equal(rooted.y, np.where(rooted.X @ rooted.w_star >= 0, 1.0, -1.0))
    with pytest.raises(ShapeMismatchError):
        generate_dataset(20, 8, RngStream(seed=4), sigma_root=np.eye(3))


def test_dataset_requires_dimensions():
    with pytest.raises(ValidationError):
        generate_dataset(0, 5, RngStream(seed=0))


def test_algorithm_spec_validation():
    with pytest.raises(ValidationError):
        AlgorithmSpec(variant='adam')
    with pytest.raises(ValidationError):
        AlgorithmSpec(beta=1.0)
    with pytest.raises(ValidationError):
        AlgorithmSpec(steps=3, tau=[0.1, 0.2])


def test_initial_overlap_is_pinned(data, rng):
    w0 = init_weights(data, AlgorithmSpec(m0=0.2, c0=1.0), rng)
    assert w0 @ data.w_star / np.sqrt(data.d) == pytest.approx(0.2, abs=1e-12)


def test_zero_step_size_freezes_sgd(data, rng):
    result = run_sgd(data, AlgorithmSpec(gamma=0.0, b=0.5, steps=10), rng)
    assert np.array_equal(result.trajectory, np.tile(result.trajectory[0], (11, 1)))
    assert np.all(result.cosine == result.cosine[0])


def test_silent_gradient_gives_exact_ridge_decay(data, rng):
    spec = AlgorithmSpec(gamma=0.1, lam=0.5, b=0.5, m0=0.2, steps=15)
    result = run_sgd(data, spec, rng, masks=np.zeros((15, data.n)))
    m = result.m[0]
    for t in range(1, 16):
        m = 0.95 * m
        assert result.m[t] == pytest.approx(m, rel=1e-13)
    w = result.trajectory[0]
    for t in range(1, 16):
        w = w - 0.1 * (2.0 * (data.X.T @ np.zeros(data.n)) + 0.5 * w)
        assert np.array_equal(result.trajectory[t], w)


def test_cosine_is_bounded(data, rng):
    result = run_sgd(data, AlgorithmSpec(gamma=0.5, b=0.3, steps=20), rng)
    assert np.all(np.abs(result.cosine) <= 1.0)
    assert len(list(result.rows())) == 21


def test_langevin_without_temperature_is_full_batch_sgd(data):
    spec = AlgorithmSpec(variant='langevin', gamma=0.2, lam=0.1, steps=20)
    langevin = run_langevin(data, spec, RngStream(seed=3))
    sgd = run_sgd(data, AlgorithmSpec(gamma=0.2, lam=0.1, b=1.0, steps=20), RngStream(seed=3))
    assert np.array_equal(langevin.trajectory, sgd.trajectory)


def _without_data(data):
    """Same teacher, all-zero design: every loss gradient vanishes."""
    return Dataset(X=np.zeros_like(data.X), w_star=data.w_star, y=data.y)


def test_langevin_random_walk_variance(rng):
    data = _without_data(generate_dataset(10, 20000, rng))
    spec = AlgorithmSpec(variant='langevin', gamma=0.5, temperature=1.0, c0=0.01, steps=8)
    result = run_langevin(data, spec, rng)
    growth = result.C - result.C[0]
    assert np.allclose(growth[1:], 0.25 * np.arange(1, 9), rtol=0.1)


def test_langevin_smoke(data, rng):
    result = run_langevin(data, AlgorithmSpec(variant='langevin', temperature=0.1, steps=5), rng)
    assert np.all(np.isfinite(result.trajectory))
    assert result.loss.shape == (6,)


def test_polyak_without_momentum_is_full_batch_sgd(data):
    polyak = run_polyak(data, AlgorithmSpec(variant='polyak', gamma=0.2, steps=20),
                        RngStream(seed=3))
    sgd = run_sgd(data, AlgorithmSpec(gamma=0.2, b=1.0, steps=20), RngStream(seed=3))
    assert np.array_equal(polyak.trajectory, sgd.trajectory)


def test_polyak_momentum_decays_geometrically(data, rng):
    spec = AlgorithmSpec(variant='polyak', gamma=0.0, beta=0.5, steps=10)
    w0 = np.ones(data.d)
    result = run_polyak(data, spec, rng, w0=w0, w_prev=np.zeros(data.d))
    increments = np.diff(result.trajectory, axis=0)
    for t in range(10):
        assert np.allclose(increments[t], 0.5 ** (t + 1) * w0, rtol=1e-14)


def test_nesterov_with_zero_schedules_is_gradient_descent(data):
    nesterov = run_nesterov(
        data, AlgorithmSpec(variant='nesterov', gamma=0.2, lam=0.1, steps=15), RngStream(seed=3))
    gd = run_sgd(data, AlgorithmSpec(gamma=0.2, lam=0.1, steps=15), RngStream(seed=3))
    assert np.allclose(nesterov.trajectory, gd.trajectory, rtol=0.0, atol=1e-12)


def test_nesterov_decreases_ridge_objective(rng):
    data = _without_data(generate_dataset(40, 50, rng))
    spec = AlgorithmSpec(variant='nesterov', lam=1.0, tau=0.3, mu=0.3,
                         nesterov_gamma=0.05, nesterov_alpha=0.05, steps=40)
    result = run_nesterov(data, spec, rng)
    assert np.all(np.diff(result.C[5:]) < 0)


def test_generic_runner_with_null_maps(data, rng):
    v0 = rng.generator('init').standard_normal(data.d)
    history = run_generic_dynamics(
        lambda t, vs: np.zeros((data.d, 1)), lambda t, r: np.zeros((data.n, 1)),
        data, v0, steps=5)
    assert not np.any(history.increments[1:])
    assert np.all(history.column(0) == v0)
    assert history.steps == 5


def test_generic_runner_checks_shapes(data):
    with pytest.raises(ShapeMismatchError):
        run_generic_dynamics(lambda t, vs: 0, lambda t, r: 0, data, np.zeros((data.d, 3)), 2)
    with pytest.raises(ShapeMismatchError):
        run_generic_dynamics(
            lambda t, vs: np.zeros((data.d, 1)), lambda t, r: np.zeros(data.n + 1),
            data, np.zeros(data.d), 2)


def test_sgd_matches_generic_mapping(data, rng):
    spec = AlgorithmSpec(gamma=0.3, lam=0.2, b=0.4, steps=20)
    masks = draw_masks(data, spec, rng)
    w0 = init_weights(data, spec, rng)
    direct = run_sgd(data, spec, rng, masks=masks, w0=w0)
    history = run_generic_dynamics(*sgd_mapping(data, spec, masks), data, w0, spec.steps)
    assert np.max(np.abs(history.column(0) - direct.trajectory)) <= 1e-10


def test_langevin_matches_generic_mapping(data, rng):
    spec = AlgorithmSpec(variant='langevin', gamma=0.2, lam=0.1, temperature=0.3, steps=20)
    noise = langevin_noise(data, spec, rng)
    w0 = init_weights(data, spec, rng)
    direct = run_langevin(data, spec, rng, noise=noise, w0=w0)
    history = run_generic_dynamics(*langevin_mapping(data, spec, noise), data, w0, spec.steps)
    assert np.max(np.abs(history.column(0) - direct.trajectory)) <= 1e-10


@pytest.mark.parametrize('w_prev_shift', [None, 0.1])
def test_polyak_matches_generic_mapping(data, rng, w_prev_shift):
    spec = AlgorithmSpec(variant='polyak', gamma=0.2, lam=0.1, beta=0.6, steps=20)
    w0 = init_weights(data, spec, rng)
    w_prev = None if w_prev_shift is None else w0 - w_prev_shift
    direct = run_polyak(data, spec, rng, w0=w0, w_prev=w_prev)
    velocity0 = None if w_prev is None else w0 - w_prev
    history = run_generic_dynamics(*polyak_mapping(data, spec, velocity0), data, w0, spec.steps)
    assert np.max(np.abs(history.column(0) - direct.trajectory)) <= 1e-10


def test_nesterov_matches_generic_mapping(data, rng):
    steps = 20
    t = np.arange(steps)
    spec = AlgorithmSpec(
        variant='nesterov', lam=0.1, steps=steps, tau=list(2.0 / (t + 2.0)),
        mu=0.2, nesterov_gamma=0.15, nesterov_alpha=list(0.1 * (t + 1.0) / steps))
    w0 = init_weights(data, spec, rng)
    z0 = w0 + 0.05
    direct = run_nesterov(data, spec, rng, w0=w0, z0=z0)
    history = run_generic_dynamics(
        *nesterov_mapping(data, spec), data, np.stack([w0, z0], axis=1), steps)
    assert np.max(np.abs(history.column(0) - direct.trajectory)) <= 1e-10
    assert np.max(np.abs(history.column(1) - direct.extra['z'])) <= 1e-10


def test_generic_variant_is_sgd(data):
    spec = AlgorithmSpec(gamma=0.3, b=0.5, steps=10)
    direct = run_variant(data, spec, RngStream(seed=8))
    generic = run_variant(data, AlgorithmSpec(variant='generic', gamma=0.3, b=0.5, steps=10),
                          RngStream(seed=8))
    assert np.max(np.abs(direct.trajectory - generic.trajectory)) <= 1e-10


def test_split_variant_has_no_dataset_runner(data, rng):
    with pytest.raises(ConfigError):
        run_variant(data, AlgorithmSpec(variant='sample_split_gd'), rng)


def test_divergence_guard(data, rng):
    spec = AlgorithmSpec(gamma=1e4, loss='square', steps=30)
    with pytest.raises(DivergenceError):
        run_sgd(data, spec, rng)


def test_simulation_is_reproducible():
    spec = AlgorithmSpec(gamma=0.1, b=0.5, steps=5)
    first = simulate_seeds(spec, 20, 25, [0, 1])
    second = simulate_seeds(spec, 20, 25, [0, 1])
    for a, b in zip(first, second):
        assert np.array_equal(a.m, b.m)
        assert np.array_equal(a.loss, b.loss)
    table = aggregate(first)
    assert table['cosine_mean'].shape == (6,)
    assert np.all(table['cosine_sd'] >= 0)


def test_concentration_improves_with_dimension():
    spec = AlgorithmSpec(gamma=0.2, lam=0.5, b=1.0, steps=5)

    def spread(d):
        runs = simulate_seeds(spec, d // 2, d, range(20))
        return np.std([run.cosine[-1] for run in runs])

    assert spread(400) < spread(100)


def test_sample_split_without_step_size(rng):
    result = run_sample_split_gd('tanh', 0.0, 20, 30, 5, rng)
    assert np.all(result.rho_hat == result.rho_hat[0])
    assert list(result.t) == list(range(6))


def test_sample_split_linear_case_matches_closed_form():
    n, d, gamma, steps = 400, 800, 0.2, 5
    alpha = n / d
    runs = [run_sample_split_gd('linear', gamma, n, d, steps, RngStream(seed=s))
            for s in range(30)]
    rho_hat = np.mean([r.rho_hat for r in runs], axis=0)
    rho = [rho_hat[0]]
    for _ in range(steps):
        rho.append((1 - gamma * alpha) ** 2 * rho[-1] + gamma ** 2 * alpha * rho[-1])
    assert np.allclose(rho_hat, rho, rtol=0.03)
