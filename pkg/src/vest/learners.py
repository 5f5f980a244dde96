"""Lasso regression by coordinate descent, validation-driven lambda choice,
and the naive one-step forecaster."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numba import njit

MAX_SWEEPS = 10_000
TOL = 1e-7
N_LAMBDAS = 50
LAMBDA_RATIO = 1e-4


@dataclass(frozen=True)
class LinearModel:
    """Linear model on standardised inputs.

    Columns with zero training sd are never used (coefficient 0).
    """

    coef: np.ndarray
    intercept: float
    means: np.ndarray
    scales: np.ndarray
    lam: float
    objective_history: tuple = field(default=(), repr=False, compare=False)
    columns: Optional[tuple] = None

    def predict(self, X) -> np.ndarray:
        return predict(self, X)

    @property
    def original_coef(self) -> np.ndarray:
        """Coefficients on the unstandardised columns."""
        return self.coef / self.scales

    def to_json(self, **extra) -> str:
        names = self.columns or tuple(f"x{j}" for j in range(self.coef.size))
        doc = dict(extra)
        doc.update({
            "lambda": float(self.lam),
            "intercept": float(self.intercept),
            "coefficients": {n: float(b) for n, b in zip(names, self.coef)},
            "means": {n: float(m) for n, m in zip(names, self.means)},
            "scales": {n: float(s) for n, s in zip(names, self.scales)},
        })
        return json.dumps(doc, indent=2)


@njit(cache=True)
def _soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(cache=True)
def _objective(beta, grad, c, yy, lam):
    # (1/2n)||y - Xb||^2 + lam*|b|_1 with G = X'X/n, c = X'y/n, yy = y'y/n and
    # grad = c - Gb, so that b'Gb - 2b'c = -b'(c + grad)
    quad = 0.0
    l1 = 0.0
    for j in range(beta.size):
        quad -= beta[j] * (c[j] + grad[j])
        l1 += abs(beta[j])
    return 0.5 * (yy + quad) + lam * l1


@njit(cache=True)
def _cd(G, c, yy, lam, beta, usable, tol, max_sweeps, history):
    """Covariance-update coordinate descent; returns the number of sweeps.

    ``grad[j] = c[j] - (G @ beta)[j]`` is kept current after every update.
    """
    p = beta.size
    grad = c.copy()
    for j in range(p):
        if beta[j] != 0.0:
            for k in range(p):
                grad[k] -= G[j, k] * beta[j]
    sweeps = 0
    while sweeps < max_sweeps:
        delta = 0.0
        for j in range(p):
            if not usable[j]:
                continue
            old = beta[j]
            new = _soft(grad[j] + G[j, j] * old, lam) / G[j, j]
            if new != old:
                step = new - old
                beta[j] = new
                row = G[j]  # G is symmetric; rows are contiguous
                for k in range(p):
                    grad[k] -= row[k] * step
                if abs(step) > delta:
                    delta = abs(step)
        history[sweeps] = _objective(beta, grad, c, yy, lam)
        sweeps += 1
        if delta < tol:
            break
    return sweeps


@dataclass(frozen=True)
class _Standardised:
    means: np.ndarray
    scales: np.ndarray
    usable: np.ndarray
    G: np.ndarray
    c: np.ndarray
    yy: float
    y_mean: float
    n: int


def _standardise(X, y) -> _Standardised:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.size or y.size < 2:
        raise ValueError("need a 2-d X with as many rows as y (at least 2)")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite input to lasso")
    n = y.size
    means = X.mean(axis=0)
    sds = X.std(axis=0)
    usable = sds > 1e-12 * np.maximum(1.0, np.abs(means))
    scales = np.where(usable, sds, 1.0)
    Xs = (X - means) / scales
    Xs[:, ~usable] = 0.0
    yc = y - y.mean()
    G = Xs.T @ Xs / n
    dead = np.flatnonzero(~usable)
    G[dead, dead] = 1.0  # keeps the update well defined; the usable mask skips them
    return _Standardised(means, scales, usable, np.ascontiguousarray(G), Xs.T @ yc / n,
                         float(yc @ yc / n), float(y.mean()), n)


def lambda_max(X, y) -> float:
    """Smallest lambda at which every standardised coefficient is zero."""
    s = _standardise(X, y)
    return float(np.max(np.abs(s.c), initial=0.0))


def _fit_std(s: _Standardised, lam: float, beta0=None, tol=TOL, max_sweeps=MAX_SWEEPS):
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    p = s.c.size
    beta = np.zeros(p) if beta0 is None else np.array(beta0, dtype=float)
    history = np.empty(max_sweeps)
    k = _cd(s.G, s.c, s.yy, float(lam), beta, s.usable, tol, max_sweeps, history) if p else 0
    hist = history[:k]
    if k > 1 and np.any(np.diff(hist) > 1e-10 * max(1.0, abs(hist[0]))):
        raise RuntimeError("coordinate descent objective increased")
    return beta, tuple(hist.tolist())


def _model(s: _Standardised, beta, lam, hist, columns=None) -> LinearModel:
    beta = np.where(s.usable, beta, 0.0)
    # intercept on the standardised scale is mean(y) because columns are centred
    return LinearModel(beta, s.y_mean, s.means, s.scales, float(lam), hist,
                       tuple(columns) if columns is not None else None)


def fit_lasso(X, y, lam: float, columns: Optional[Sequence[str]] = None,
              tol: float = TOL, max_sweeps: int = MAX_SWEEPS) -> LinearModel:
    """Minimise (1/2n)||y - b0 - Xs b||^2 + lam*|b|_1 on standardised columns ``Xs``."""
    s = _standardise(X, y)
    beta, hist = _fit_std(s, lam, tol=tol, max_sweeps=max_sweeps)
    return _model(s, beta, lam, hist, columns)


def predict(model: LinearModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return (X - model.means) / model.scales @ model.coef + model.intercept


def naive_forecast(X) -> np.ndarray:
    """Most recent lag of each embedding row."""
    X = np.asarray(X, dtype=float)
    return X[..., 0].copy()


def lambda_grid(lmax: float, n: int = N_LAMBDAS, ratio: float = LAMBDA_RATIO) -> np.ndarray:
    if lmax <= 0:
        return np.zeros(n)
    return np.geomspace(lmax, lmax * ratio, n)


@dataclass(frozen=True)
class PathResult:
    model: LinearModel
    lambdas: np.ndarray
    val_mae: np.ndarray
    best: int


def lasso_path(X_train, y_train, X_val, y_val, columns=None,
               n_lambdas: int = N_LAMBDAS) -> PathResult:
    """Warm-started fits down a log-spaced grid; the lowest validation MAE
    wins and ties go to the larger lambda."""
    y_val = np.asarray(y_val, dtype=float)
    if y_val.size == 0:
        raise ValueError("validation set is empty")
    s = _standardise(X_train, y_train)
    lams = lambda_grid(float(np.max(np.abs(s.c), initial=0.0)), n_lambdas)
    beta = np.zeros(s.c.size)
    maes = np.empty(lams.size)
    best, best_model = -1, None
    for i, lam in enumerate(lams):
        beta, hist = _fit_std(s, lam, beta)
        m = _model(s, beta.copy(), lam, hist, columns)
        maes[i] = np.mean(np.abs(predict(m, X_val) - y_val))
        if best < 0 or maes[i] < maes[best]:
            best, best_model = i, m
    return PathResult(best_model, lams, maes, best)


def lasso_path_and_select(X_train, y_train, X_val, y_val, columns=None) -> LinearModel:
    return lasso_path(X_train, y_train, X_val, y_val, columns).model
