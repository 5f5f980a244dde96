import json

import numpy as np
import pytest

from vest.learners import (MAX_SWEEPS, fit_lasso, lambda_grid, lambda_max, lasso_path,
                           lasso_path_and_select, naive_forecast, predict)

import oracles


def orthonormal_problem(seed, n=80, p=6):
    """Columns are centred, orthogonal and have population sd 1."""
    rng = np.random.default_rng(seed)
    A = np.c_[np.ones(n), rng.normal(size=(n, p))]
    Q, _ = np.linalg.qr(A)
    X = Q[:, 1:] * np.sqrt(n)
    y = X @ rng.normal(0, 2, size=p) + rng.normal(size=n) + 3.0
    return X, y


def soft(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def original_scale(model):
    b = model.original_coef
    return model.intercept - model.means @ b, b


@pytest.mark.parametrize("seed", range(10))
def test_orthonormal_design_is_soft_thresholding(seed):
    X, y = orthonormal_problem(seed)
    lam = 0.3 + 0.2 * seed
    m = fit_lasso(X, y, lam)
    ols = X.T @ (y - y.mean()) / len(y)
    np.testing.assert_allclose(m.coef, soft(ols, lam), atol=1e-6)
    assert m.intercept == pytest.approx(y.mean())


@pytest.mark.parametrize("seed", range(5))
def test_zero_lambda_is_least_squares(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 4)) * [1, 10, 0.1, 3] + [0, 5, -2, 100]
    y = X @ [1.0, -0.2, 4.0, 0.05] + rng.normal(size=40)
    b0, b = original_scale(fit_lasso(X, y, 0.0))
    ref = oracles.ols(X.tolist(), y.tolist())
    np.testing.assert_allclose(np.r_[b0, b], ref, atol=1e-6, rtol=1e-6)


def test_large_lambda_kills_everything():
    X, y = orthonormal_problem(0)
    m = fit_lasso(X, y, lambda_max(X, y) * 1.0001)
    assert not m.coef.any()
    np.testing.assert_allclose(predict(m, X), y.mean())


def test_objective_history_never_increases():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(100, 8))
    X[:, 1] = X[:, 0] + 0.01 * rng.normal(size=100)
    y = X[:, 0] + rng.normal(size=100)
    for lam in (0.0, 0.01, 0.1, 0.5):
        h = np.array(fit_lasso(X, y, lam).objective_history)
        assert h.size >= 1
        assert np.all(np.diff(h) <= 1e-12 * abs(h[0]))


def test_history_matches_recomputed_objective():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(60, 3))
    y = X @ [2.0, 0.0, -1.0] + rng.normal(size=60)
    m = fit_lasso(X, y, 0.2)
    Xs = (X - m.means) / m.scales
    r = y - y.mean() - Xs @ m.coef
    obj = 0.5 * np.mean(r ** 2) + 0.2 * np.abs(m.coef).sum()
    assert m.objective_history[-1] == pytest.approx(obj, rel=1e-10)


def test_zero_sd_column_gets_zero_coefficient():
    rng = np.random.default_rng(3)
    X = np.c_[rng.normal(size=50), np.full(50, 7.0)]
    m = fit_lasso(X, X[:, 0] * 2, 0.0)
    assert m.coef[1] == 0.0 and m.coef[0] != 0.0


def test_affine_rescaling_does_not_change_predictions():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(70, 3))
    y = X @ [1.0, 2.0, -1.0] + rng.normal(size=70)
    a = predict(fit_lasso(X, y, 0.05), X)
    Z = X * [3.0, 0.5, 100.0] + [1.0, -4.0, 9.0]
    b = predict(fit_lasso(Z, y, 0.05), Z)
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_errors():
    with pytest.raises(ValueError):
        fit_lasso(np.ones((1, 1)), [1.0], 0.1)
    with pytest.raises(ValueError):
        fit_lasso([[1.0], [np.nan]], [1.0, 2.0], 0.1)
    with pytest.raises(ValueError):
        fit_lasso([[1.0], [2.0]], [1.0, 2.0], -1)
    with pytest.raises(ValueError):
        lasso_path([[1.0], [2.0]], [1.0, 2.0], np.empty((0, 1)), [])


def test_grid():
    g = lambda_grid(2.0)
    assert g.size == 50 and g[0] == 2.0 and g[-1] == pytest.approx(2e-4)
    assert np.allclose(np.diff(np.log(g)), np.log(1e-4) / 49)


def test_path_picks_lowest_validation_mae():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(120, 6))
    y = X[:, 0] - X[:, 3] + rng.normal(size=120)
    res = lasso_path(X[:90], y[:90], X[90:], y[90:])
    assert res.lambdas.size == 50
    assert res.val_mae[res.best] == res.val_mae.min()
    assert res.best == int(np.flatnonzero(res.val_mae == res.val_mae.min())[0])
    assert res.model.lam == res.lambdas[res.best]


def test_noiseless_linear_target_small_lambda():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(100, 4))
    # the smallest grid lambda still shrinks by about lambda_max * 1e-4 per
    # standardised coefficient, so keep the coefficients below one
    y = X @ [0.3, -0.2, 0.1, 0.25] + 4
    res = lasso_path(X[:80], y[:80], X[80:], y[80:])
    assert res.best >= 40
    assert res.val_mae[res.best] < 1e-4


def test_pure_noise_all_zero_model_competitive():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(200, 5))
        y = rng.normal(size=200)
        res = lasso_path(X[:150], y[:150], X[150:], y[150:])
        # grid point 0 is lambda_max, i.e. the all-zero model
        hits += res.val_mae[0] <= 1.05 * res.val_mae[res.best]
    assert hits >= 90


def test_naive_and_zero_model():
    assert naive_forecast([[4.0, 3.0]]).tolist() == [4.0]
    X, y = orthonormal_problem(1)
    m = fit_lasso(X, y, 1e6)
    np.testing.assert_allclose(m.predict(X[:3]), m.intercept)


def test_sweep_cap_respected():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(50, 3))
    X = np.c_[X, X[:, 0]]
    m = fit_lasso(X, X[:, 0] + rng.normal(size=50), 1e-6, max_sweeps=25)
    assert len(m.objective_history) <= 25 <= MAX_SWEEPS


def test_json_export():
    X, y = orthonormal_problem(2, p=2)
    doc = json.loads(fit_lasso(X, y, 0.1, columns=["a", "b"]).to_json(series="s"))
    assert set(doc["coefficients"]) == {"a", "b"} and doc["series"] == "s"
    assert lasso_path_and_select(X[:60], y[:60], X[60:], y[60:]).coef.size == 2
