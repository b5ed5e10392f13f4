"""GP posterior against an explicit-inverse oracle and interpolation checks."""

import numpy as np
import pytest

from ksosbo import Dataset, GPHyperparams, InputError, fit_gp, posterior, posterior_batch
from ksosbo.gp import build_model, log_marginal_likelihood
from ksosbo.kernels import KernelSpec, cross_kernel, kernel_matrix


def _oracle_posterior(dataset, params, X_query):
    spec = KernelSpec(
        "matern25",
        lengthscale_or_sigma=params.lengthscale,
        output_variance=params.constant_value,
    )
    K = kernel_matrix(spec, dataset.X) + params.noise_variance * np.eye(dataset.n)
    K_inv = np.linalg.inv(K)
    K_star = cross_kernel(spec, X_query, dataset.X)
    mean = K_star @ K_inv @ dataset.y
    var = np.array(
        [
            params.constant_value - K_star[i] @ K_inv @ K_star[i]
            for i in range(X_query.shape[0])
        ]
    )
    return mean, np.sqrt(np.maximum(var, 0.0))


def test_posterior_matches_explicit_inverse_on_50_datasets():
    rng = np.random.default_rng(42)
    for _ in range(50):
        n = int(rng.integers(3, 13))
        d = int(rng.integers(1, 4))
        X = rng.uniform(-3, 3, size=(n, d))
        y = rng.normal(size=n)
        params = GPHyperparams(
            constant_value=float(rng.uniform(0.3, 3.0)),
            lengthscale=float(rng.uniform(0.5, 2.0)),
            noise_variance=float(rng.uniform(1e-6, 1e-2)),
        )
        model = build_model(Dataset(X, y), params)
        Xq = rng.uniform(-3, 3, size=(7, d))
        mean, std = posterior_batch(model, Xq)
        mean_o, std_o = _oracle_posterior(Dataset(X, y), params, Xq)
        assert np.max(np.abs(mean - mean_o)) < 1e-8
        assert np.max(np.abs(std - std_o)) < 1e-8


def test_noiseless_interpolation():
    rng = np.random.default_rng(0)
    X = rng.uniform(-2, 2, size=(9, 2))
    y = np.sin(X[:, 0]) + X[:, 1] ** 2
    params = GPHyperparams(constant_value=1.5, lengthscale=1.0, noise_variance=0.0)
    model = build_model(Dataset(X, y), params)
    for i in range(9):
        mean, std = posterior(model, X[i])
        assert mean == pytest.approx(float(y[i]), abs=1e-6)
        assert std == pytest.approx(0.0, abs=1e-4)


def test_fit_never_worse_than_start():
    rng = np.random.default_rng(5)
    X = rng.uniform(-2, 2, size=(10, 2))
    y = np.cos(X[:, 0] * 2) * 2.0
    dataset = Dataset(X, y)
    model = fit_gp(dataset, noise_factor=0.05, rng=np.random.default_rng(1))
    center = GPHyperparams(
        constant_value=1.0,
        lengthscale=1.0,
        noise_variance=model.params.noise_variance,
    )
    assert log_marginal_likelihood(dataset, model.params) >= log_marginal_likelihood(
        dataset, center
    ) - 1e-9


def test_fit_deterministic():
    rng = np.random.default_rng(2)
    X = rng.uniform(-1, 1, size=(8, 1))
    y = X[:, 0] ** 3
    a = fit_gp(Dataset(X, y), rng=np.random.default_rng(7))
    b = fit_gp(Dataset(X, y), rng=np.random.default_rng(7))
    assert a.params == b.params


def test_noise_pin_follows_y_scale():
    rng = np.random.default_rng(3)
    X = rng.uniform(-1, 1, size=(12, 1))
    y = rng.normal(size=12)
    model = fit_gp(Dataset(X, y), noise_factor=0.1)
    expected = max((0.1 * float(np.std(y))) ** 2, 1e-10)
    assert model.params.noise_variance == pytest.approx(expected, rel=1e-12)


def test_dataset_validation():
    with pytest.raises(InputError):
        Dataset(np.zeros((3, 2)), np.zeros(4))
    with pytest.raises(InputError):
        Dataset(np.zeros((0, 2)), np.zeros(0))


def test_hyperparams_validation():
    with pytest.raises(InputError):
        GPHyperparams(constant_value=-1.0, lengthscale=1.0, noise_variance=0.0)
    with pytest.raises(InputError):
        GPHyperparams(constant_value=1.0, lengthscale=1e9, noise_variance=0.0)
    with pytest.raises(InputError):
        GPHyperparams(constant_value=1.0, lengthscale=1.0, noise_variance=-1e-3)
