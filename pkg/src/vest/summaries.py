"""Summary operations compressing a representation into scalar features.

Every summary is computed on a matrix with one chronological vector per row
and returns one value per row. Undefined results come back as NaN in the
batch API; :func:`apply_summary` turns them into ``None`` (missing) for
single vectors. No summary returns an infinite value.
"""
from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

SUMMARIES = (
    "MEAN", "MDN", "SD", "VAR", "IQR", "RD", "MIN", "MAX", "LP", "SK", "KRT",
    "P05", "P95", "ACC_1", "ACC_2", "BP", "PACF", "ACF", "ACF1", "LRD1", "LRD2",
    "SLP", "NORM", "NO", "AMP", "STEP", "PEAK_I", "PEAK_D", "OD", "PV_ST",
    "PV_LT", "MLE",
)

ACF_MAX_LAG = 10
MLE_STEPS = 5
ZERO_RTOL = 1e-12


def _nan(rows):
    return np.full(rows, np.nan)


def _tiny(V):
    # threshold below which a dispersion counts as exactly zero
    return ZERO_RTOL * np.max(np.abs(V), axis=1)


def _sd(V, ddof=1):
    return V.std(axis=1, ddof=ddof)


def _require(q, minimum, *cols):
    if q < minimum:
        return tuple(np.full_like(c, np.nan) for c in cols)
    return cols


def _centre(V):
    return V - V.mean(axis=1, keepdims=True)


# ------------------------------------------------------------------ location

def _quantiles(V):
    qs = np.quantile(V, [0.05, 0.25, 0.5, 0.75, 0.95], axis=1)
    return qs


def s_location(V):
    qs = _quantiles(V)
    iqr = qs[3] - qs[1]
    lo, hi = qs[1] - 1.5 * iqr, qs[3] + 1.5 * iqr
    n_out = ((V < lo[:, None]) | (V > hi[:, None])).sum(axis=1).astype(float)
    n_out[np.isnan(iqr)] = np.nan
    return {
        "MEAN": V.mean(axis=1), "MDN": qs[2], "IQR": iqr,
        "MIN": V.min(axis=1), "MAX": V.max(axis=1), "LP": V[:, -1].copy(),
        "P05": qs[0], "P95": qs[4], "NO": n_out,
        "NORM": np.sqrt((V * V).sum(axis=1)),
    }


# ---------------------------------------------------------------- dispersion

def s_dispersion(V):
    q = V.shape[1]
    sd = _sd(V) if q >= 2 else _nan(len(V))
    out = {"SD": sd, "VAR": sd * sd}
    rd = _nan(len(V))
    if q >= 3:
        sdd = _sd(np.diff(V, axis=1))
        ok = sdd > _tiny(V)
        rd[ok] = sd[ok] / sdd[ok]
    out["RD"] = rd
    return out


def s_shape(V):
    """Moment skewness and excess kurtosis."""
    rows, q = V.shape
    sk, krt = _nan(rows), _nan(rows)
    if q >= 3:
        C = _centre(V)
        m2 = (C ** 2).mean(axis=1)
        ok = np.sqrt(m2) > _tiny(V)
        m3 = (C ** 3).mean(axis=1)
        m4 = (C ** 4).mean(axis=1)
        sk[ok] = m3[ok] / m2[ok] ** 1.5
        krt[ok] = m4[ok] / m2[ok] ** 2 - 3.0
    return {"SK": sk, "KRT": krt}


def s_slope(V):
    rows, q = V.shape
    if q < 2:
        return {"SLP": _nan(rows)}
    t = np.arange(1, q + 1, dtype=float)
    t -= t.mean()
    return {"SLP": _centre(V) @ t / (t @ t)}


# ------------------------------------------------------------------ dynamics

def s_acc(V):
    """Mean and sd of SMA/EMA ratio, period round(sqrt(q))."""
    rows, q = V.shape
    acc1, acc2 = _nan(rows), _nan(rows)
    if q < 4:
        return {"ACC_1": acc1, "ACC_2": acc2}
    k = int(math.floor(math.sqrt(q) + 0.5))
    c = np.cumsum(np.pad(V, ((0, 0), (1, 0))), axis=1)
    sma = (c[:, k:] - c[:, :-k]) / k
    alpha = 2.0 / (k + 1)
    ema = np.empty_like(sma)
    ema[:, 0] = sma[:, 0]
    for j in range(1, sma.shape[1]):
        ema[:, j] = alpha * V[:, k - 1 + j] + (1 - alpha) * ema[:, j - 1]
    ok = np.all(np.abs(ema) > _tiny(V)[:, None], axis=1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r = sma / ema
    acc1[ok] = r[ok].mean(axis=1)
    acc2[ok] = r[ok].std(axis=1, ddof=1)
    return {"ACC_1": acc1, "ACC_2": acc2}


def autocorrelations(V, max_lag=ACF_MAX_LAG):
    """Biased, mean-centred sample autocorrelations for lags 1..h, h = min(max_lag, q - 2)."""
    q = V.shape[1]
    h = min(max_lag, q - 2)
    C = _centre(V)
    denom = (C * C).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.stack([(C[:, :-k] * C[:, k:]).sum(axis=1) / denom for k in range(1, h + 1)], axis=1)
    return rho


def durbin_levinson(rho):
    """Partial autocorrelations from autocorrelations ``rho[:, 0] = lag 1``.

    Rows whose recursion hits a non-positive prediction-error variance get NaN.
    """
    rows, h = rho.shape
    pacf = np.full((rows, h), np.nan)
    phi = np.zeros((rows, h))
    pacf[:, 0] = phi[:, 0] = rho[:, 0]
    bad = np.zeros(rows, dtype=bool)
    for k in range(1, h):
        prev = phi[:, :k]
        num = rho[:, k] - (prev * rho[:, k - 1::-1]).sum(axis=1)
        den = 1.0 - (prev * rho[:, :k]).sum(axis=1)
        bad |= den <= 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            a = num / den
        new = prev - a[:, None] * prev[:, ::-1]
        phi[:, :k] = new
        phi[:, k] = a
        pacf[:, k] = a
    pacf[bad] = np.nan
    return pacf


def s_autocorr(V):
    rows, q = V.shape
    keys = ("BP", "ACF", "PACF", "ACF1")
    if q < 4:
        return {k: _nan(rows) for k in keys}
    ok = _sd(V, ddof=0) > _tiny(V)
    out = {k: _nan(rows) for k in keys}
    if not ok.any():
        return out
    rho = autocorrelations(V[ok])
    out["BP"][ok] = q * (rho ** 2).sum(axis=1)
    out["ACF"][ok] = rho.mean(axis=1)
    out["ACF1"][ok] = rho[:, 0]
    out["PACF"][ok] = durbin_levinson(rho).mean(axis=1)
    return out


def haar_details(V):
    """Haar detail coefficients per level, J = floor(log2 q) - 1 levels."""
    q = V.shape[1]
    levels = int(math.floor(math.log2(q))) - 1
    approx, details = V, []
    s2 = math.sqrt(2.0)
    for _ in range(levels):
        m = approx.shape[1] // 2 * 2
        even, odd = approx[:, 0:m:2], approx[:, 1:m:2]
        details.append((even - odd) / s2)
        approx = (even + odd) / s2
    return details


def s_lrd(V):
    """Hurst exponent from the slope of log2 mean |d_j|^r across Haar levels."""
    rows, q = V.shape
    out = {"LRD1": _nan(rows), "LRD2": _nan(rows)}
    if q < 8:
        return out
    details = haar_details(V)
    j = np.arange(1, len(details) + 1, dtype=float)
    jc = j - j.mean()
    for r, key in ((1, "LRD1"), (2, "LRD2")):
        m = np.stack([(np.abs(d) ** r).mean(axis=1) for d in details], axis=1)
        ok = np.all(m > 0, axis=1)
        logm = np.log2(np.where(ok[:, None], m, 1.0))
        beta = (logm - logm.mean(axis=1, keepdims=True)) @ jc / (jc @ jc)
        out[key][ok] = (beta[ok] / r + 1.0) / 2.0
    return out


def s_amp(V):
    rows, q = V.shape
    if q < 2:
        return {"AMP": _nan(rows)}
    F = np.abs(np.fft.rfft(V, axis=1))
    return {"AMP": F[:, 1:q // 2 + 1].mean(axis=1)}


def s_step(V):
    """1 when the second-half mean departs from the first-half mean by more than 2 sd of the first half."""
    rows, q = V.shape
    if q < 4:
        return {"STEP": _nan(rows)}
    h = q // 2
    first, second = V[:, :h], V[:, h:]
    gap = np.abs(second.mean(axis=1) - first.mean(axis=1))
    sd = _sd(first)
    tiny = _tiny(V)
    flat = sd <= tiny
    step = np.where(flat, gap > tiny, gap > 2 * sd).astype(float)
    step[np.isnan(gap)] = np.nan
    return {"STEP": step}


def s_turns(V):
    rows, q = V.shape
    out = {"PEAK_I": _nan(rows), "PEAK_D": _nan(rows), "OD": _nan(rows)}
    nan_rows = np.isnan(V).any(axis=1)
    if q >= 2:
        d = np.diff(V, axis=1)
        out["OD"] = (d > 0).sum(axis=1) - (d < 0).sum(axis=1).astype(float)
    if q >= 3:
        left, mid, right = V[:, :-2], V[:, 1:-1], V[:, 2:]
        out["PEAK_I"] = ((mid > left) & (mid > right)).sum(axis=1).astype(float)
        out["PEAK_D"] = ((mid < left) & (mid < right)).sum(axis=1).astype(float)
    for v in out.values():
        v[nan_rows] = np.nan
    return out


def s_poincare(V):
    """SD1 and SD2 of the lag-1 Poincare plot."""
    rows, q = V.shape
    out = {"PV_ST": _nan(rows), "PV_LT": _nan(rows)}
    if q < 3:
        return out
    var = V.var(axis=1, ddof=1)
    dvar = np.diff(V, axis=1).var(axis=1, ddof=1)
    inner = 2 * var - dvar / 2
    scale = np.maximum(2 * var, dvar / 2)
    ok = inner >= -1e-12 * scale
    out["PV_ST"] = np.sqrt(dvar / 2)
    out["PV_LT"][ok] = np.sqrt(np.maximum(inner[ok], 0.0))
    return out


def s_mle(V):
    """Largest Lyapunov exponent, Rosenstein-style, on a 2-d delay embedding.

    Each point's nearest neighbour (positive distance, at least 2 samples
    apart in time) is followed for up to ``MLE_STEPS`` steps; the result is
    the least-squares slope of the mean log distance against the step.
    Missing when fewer than 3 steps have a valid pair.
    """
    rows, q = V.shape
    out = _nan(rows)
    if q < 10:
        return {"MLE": out}
    a, b = V[:, :-1], V[:, 1:]
    M = q - 1
    D = np.sqrt((a[:, :, None] - a[:, None, :]) ** 2 + (b[:, :, None] - b[:, None, :]) ** 2)
    tol = _tiny(V)[:, None, None]
    idx = np.arange(M)
    near_in_time = np.abs(idx[:, None] - idx[None, :]) <= 1
    masked = np.where(near_in_time[None] | ~(D > tol), np.inf, D)
    nn = masked.argmin(axis=2)
    has_nn = np.isfinite(masked.min(axis=2))
    r_idx = np.arange(rows)[:, None]
    sums = np.zeros((rows, MLE_STEPS + 1))
    counts = np.zeros((rows, MLE_STEPS + 1))
    for k in range(MLE_STEPS + 1):
        ii = idx[None, :] + k
        jj = nn + k
        valid = has_nn & (ii < M) & (jj < M)
        d = D[r_idx, np.minimum(ii, M - 1), np.minimum(jj, M - 1)]
        valid &= d > tol[:, :, 0]
        sums[:, k] = np.where(valid, np.log(np.where(valid, d, 1.0)), 0.0).sum(axis=1)
        counts[:, k] = valid.sum(axis=1)
    steps = np.arange(MLE_STEPS + 1, dtype=float)[None, :]
    use = counts > 0
    n_use = use.sum(axis=1)
    y = np.where(use, sums / np.where(use, counts, 1.0), 0.0)
    xm = (use * steps).sum(axis=1, keepdims=True) / np.maximum(n_use, 1)[:, None]
    ym = y.sum(axis=1, keepdims=True) / np.maximum(n_use, 1)[:, None]
    xc = np.where(use, steps - xm, 0.0)
    ok = n_use >= 3
    num = (xc * (y - ym)).sum(axis=1)
    den = (xc * xc).sum(axis=1)
    out[ok] = num[ok] / den[ok]
    return {"MLE": out}


_GROUPS: tuple[Callable, ...] = (
    s_location, s_dispersion, s_shape, s_slope, s_acc, s_autocorr, s_lrd,
    s_amp, s_step, s_turns, s_poincare, s_mle,
)
_OWNER: dict[str, Callable] = {}


def _owner(summary_id):
    if not _OWNER:
        probe = np.arange(12, dtype=float)[None, :]
        for fn in _GROUPS:
            for k in fn(probe):
                _OWNER[k] = fn
    try:
        return _OWNER[summary_id]
    except KeyError:
        raise KeyError(f"unknown summary {summary_id!r}; valid: {', '.join(SUMMARIES)}") from None


def _clean(a):
    a = np.asarray(a, dtype=float)
    return np.where(np.isfinite(a), a, np.nan)


def summarise_rows(V: np.ndarray, summaries=SUMMARIES) -> np.ndarray:
    """All requested summaries for every row of ``V``; shape ``(rows, len(summaries))``.

    Rows containing NaN (unavailable representation) come out all-NaN.
    """
    V = np.asarray(V, dtype=float)
    rows = V.shape[0]
    nan_rows = np.isnan(V).any(axis=1)
    Vs = np.where(nan_rows[:, None], 0.0, V)
    needed = []
    for s in summaries:
        fn = _owner(s)
        if fn not in needed:
            needed.append(fn)
    results = {}
    with np.errstate(all="ignore"):
        for fn in needed:
            results.update(fn(Vs))
    out = np.empty((rows, len(summaries)))
    for c, s in enumerate(summaries):
        out[:, c] = _clean(results[s])
    out[nan_rows] = np.nan
    return out


def apply_summary(summary_id: str, v) -> Optional[float]:
    """One summary of one chronological vector; ``None`` when undefined."""
    fn = _owner(summary_id)
    x = np.asarray(v, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("expected a non-empty 1-d vector")
    with np.errstate(all="ignore"):
        value = float(_clean(fn(x[None, :])[summary_id])[0])
    return None if math.isnan(value) else value
