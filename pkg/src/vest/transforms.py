"""Transform operations mapping an embedding vector to another representation.

All functions take vectors in chronological order (oldest first). The
batch entry point :func:`transform_rows` works on a matrix with one
embedding vector per row, which is what the feature generator uses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

TRANSFORMS = ("I", "SMA", "DIFF", "DIFF2", "BC", "SIN", "COS", "DWT")
SEASONAL = ("SIN", "COS")

_S3 = math.sqrt(3.0)
DB2_LOW = np.array([1 + _S3, 3 + _S3, 3 - _S3, 1 - _S3]) / (4 * math.sqrt(2.0))
# quadrature mirror of the low-pass filter
DB2_HIGH = np.array([DB2_LOW[3], -DB2_LOW[2], DB2_LOW[1], -DB2_LOW[0]])

LAMBDA_GRID = np.round(np.arange(-100, 201) / 100.0, 2)


@dataclass(frozen=True)
class Representation:
    values: np.ndarray
    transform_id: str
    time_indices: Optional[np.ndarray] = None
    available: bool = True


@dataclass(frozen=True)
class TransformContext:
    """Per-window transform parameters, fitted on training observations only."""

    frequency: Optional[int] = None
    boxcox_lambda: float = 1.0
    boxcox_shift: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.boxcox_lambda):
            raise ValueError("boxcox_lambda must be finite")

    @classmethod
    def fit(cls, train_values, frequency: Optional[int] = None) -> "TransformContext":
        x = np.asarray(train_values, dtype=float)
        shift = boxcox_shift(x)
        lam = guerrero_lambda(x + shift, frequency)
        return cls(frequency=frequency, boxcox_lambda=lam, boxcox_shift=shift)

    def enabled(self) -> tuple[str, ...]:
        if self.frequency is None:
            return tuple(t for t in TRANSFORMS if t not in SEASONAL)
        return TRANSFORMS


def boxcox_shift(x) -> float:
    """Offset that makes the smallest training value equal to 1 when it is not positive."""
    m = float(np.min(x))
    return 0.0 if m > 0 else 1.0 - m


def sma_period(p: int) -> int:
    return max(1, int(math.floor(math.sqrt(p) + 0.5)))


def _vec(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a non-empty 1-d vector")
    return v


# ---------------------------------------------------------------- row batches

def _sma_rows(V):
    k = sma_period(V.shape[1])
    c = np.cumsum(np.pad(V, ((0, 0), (1, 0))), axis=1)
    return (c[:, k:] - c[:, :-k]) / k


def _dwt_rows(V):
    n = V.shape[1]
    if n % 2:
        V = np.concatenate([V, V[:, -1:]], axis=1)
        n += 1
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(4)[None, :]) % n
    return V[:, idx] @ DB2_HIGH


def _boxcox_rows(V, lam, shift):
    Z = V + shift
    ok = np.all(Z > 0, axis=1)
    Z = np.where(ok[:, None], Z, 1.0)
    out = np.log(Z) if lam == 0 else (Z ** lam - 1.0) / lam
    out[~ok] = np.nan
    return out, ok


def transform_rows(transform_id: str, V: np.ndarray, ctx: TransformContext,
                   first_index: Optional[np.ndarray] = None):
    """Apply one transform to every row of ``V`` (chronological vectors).

    ``first_index[i]`` is the absolute series position of ``V[i, 0]`` and is
    needed by SIN/COS. Returns ``(R, available)`` where unavailable rows of
    ``R`` are NaN. ``R`` is ``None`` when the transform cannot be applied at
    all for this vector length or context.
    """
    V = np.asarray(V, dtype=float)
    rows, p = V.shape
    ok = np.ones(rows, dtype=bool)
    if transform_id == "I":
        return V.copy(), ok
    if transform_id == "SMA":
        return _sma_rows(V), ok
    if transform_id == "DIFF":
        return (np.diff(V, axis=1), ok) if p >= 2 else (None, ~ok)
    if transform_id == "DIFF2":
        return (np.diff(V, n=2, axis=1), ok) if p >= 3 else (None, ~ok)
    if transform_id == "BC":
        return _boxcox_rows(V, ctx.boxcox_lambda, ctx.boxcox_shift)
    if transform_id in SEASONAL:
        if ctx.frequency is None:
            return None, ~ok
        if first_index is None:
            raise ValueError("SIN/COS need absolute time indices")
        tau = np.asarray(first_index)[:, None] + np.arange(p)[None, :]
        angle = 2 * np.pi * tau / ctx.frequency
        return (np.sin(angle) if transform_id == "SIN" else np.cos(angle)), ok
    if transform_id == "DWT":
        return (_dwt_rows(V), ok) if p >= 4 else (None, ~ok)
    raise KeyError(f"unknown transform {transform_id!r}; valid: {', '.join(TRANSFORMS)}")


# ------------------------------------------------------------ single vectors

def t_identity(x) -> Representation:
    v = _vec(x)
    return Representation(v.copy(), "I")


def t_sma(x) -> Representation:
    """Full-window moving average with period round(sqrt(p))."""
    v = _vec(x)
    if v.size < 2:
        raise ValueError("SMA needs at least 2 values")
    return Representation(_sma_rows(v[None, :])[0], "SMA")


def t_diff(x) -> Representation:
    v = _vec(x)
    if v.size < 2:
        return Representation(np.empty(0), "DIFF", available=False)
    return Representation(np.diff(v), "DIFF")


def t_diff2(x) -> Representation:
    v = _vec(x)
    if v.size < 3:
        return Representation(np.empty(0), "DIFF2", available=False)
    return Representation(np.diff(v, n=2), "DIFF2")


def t_boxcox(x, lam: float, shift: float = 0.0) -> Representation:
    v = _vec(x)
    if not math.isfinite(lam):
        raise ValueError("lambda must be finite")
    out, ok = _boxcox_rows(v[None, :], lam, shift)
    if not ok[0]:
        return Representation(np.empty(0), "BC", available=False)
    return Representation(out[0], "BC")


def t_sin(x, time_indices, frequency: Optional[int]) -> Representation:
    return _fourier(x, time_indices, frequency, np.sin, "SIN")


def t_cos(x, time_indices, frequency: Optional[int]) -> Representation:
    return _fourier(x, time_indices, frequency, np.cos, "COS")


def _fourier(x, time_indices, frequency, fn, tid):
    v = _vec(x)
    tau = np.asarray(time_indices, dtype=float)
    if tau.shape != v.shape:
        raise ValueError("time_indices must align with the vector")
    if frequency is None:
        return Representation(np.empty(0), tid, tau, available=False)
    if frequency < 2:
        raise ValueError("frequency must be >= 2")
    return Representation(fn(2 * np.pi * tau / frequency), tid, tau)


def t_dwt(x) -> Representation:
    """Level-1 db2 detail coefficients with periodic extension."""
    v = _vec(x)
    if v.size < 4:
        return Representation(np.empty(0), "DWT", available=False)
    return Representation(_dwt_rows(v[None, :])[0], "DWT")


# -------------------------------------------------------------- Box-Cox fit

def guerrero_lambda(train_values, frequency: Optional[int] = None) -> float:
    """Box-Cox parameter minimising the coefficient of variation of
    ``sd(g) / mean(g) ** (1 - lambda)`` over consecutive groups ``g``.

    Groups have length ``frequency`` (2 when unknown); the most recent
    complete groups are used. Searches lambda in [-1, 2] with step 0.01 and
    breaks ties toward 1.
    """
    x = np.asarray(train_values, dtype=float)
    if np.any(x <= 0):
        raise ValueError("Box-Cox fitting needs strictly positive values; shift first")
    width = frequency or 2
    n_groups = x.size // width
    if n_groups < 2:
        raise ValueError("need at least two complete groups to fit lambda")
    groups = x[x.size - n_groups * width:].reshape(n_groups, width)
    sds = groups.std(axis=1, ddof=1)
    means = groups.mean(axis=1)
    if np.all(sds == 0):
        return 1.0
    ratio = sds[None, :] / means[None, :] ** (1 - LAMBDA_GRID[:, None])
    cv = ratio.std(axis=1, ddof=1) / ratio.mean(axis=1)
    cv = np.where(np.isfinite(cv), cv, np.inf)
    best = cv.min()
    ties = np.flatnonzero(cv <= best + 1e-12 * abs(best))
    return float(LAMBDA_GRID[ties[np.argmin(np.abs(LAMBDA_GRID[ties] - 1.0))]])
