"""Univariate series containers, time-delay embedding and holdout windows."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class LoadError(ValueError):
    """Raised when a series file cannot be turned into a TimeSeries."""


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    frequency: Optional[int] = None
    name: str = "series"

    def __post_init__(self):
        values = _readonly(np.ravel(self.values))
        if values.size == 0:
            raise ValueError("no observations")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValueError(f"non-finite value at position {bad}")
        if self.frequency is not None:
            if int(self.frequency) != self.frequency or self.frequency < 2:
                raise ValueError("frequency must be an integer >= 2")
            object.__setattr__(self, "frequency", int(self.frequency))
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def head(self, n: int) -> "TimeSeries":
        return TimeSeries(self.values[:n], self.frequency, self.name)


@dataclass(frozen=True)
class EmbeddingDataset:
    """Lagged design matrix built from a series.

    ``X[i, 0]`` is the observation right before target ``y[i]`` and ``X[i, j]``
    is lag ``j + 1``. ``t[i]`` is the absolute position of ``y[i]`` in the
    source series.
    """

    X: np.ndarray
    y: np.ndarray
    t: np.ndarray
    p: int
    source: Optional[TimeSeries] = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return self.y.size

    @property
    def chronological(self) -> np.ndarray:
        """Embedding vectors ordered oldest to newest."""
        return self.X[:, ::-1]

    @property
    def lag_names(self) -> list[str]:
        return [f"LAG.{j + 1}" for j in range(self.p)]

    def rows(self, mask) -> "EmbeddingDataset":
        return EmbeddingDataset(self.X[mask], self.y[mask], self.t[mask], self.p, self.source)


@dataclass(frozen=True)
class HoldoutWindow:
    """Half-open index ranges ``(start, stop)`` into a series."""

    train: tuple[int, int]
    validation: tuple[int, int]
    test: tuple[int, int]

    def __post_init__(self):
        (a, b), (c, d), (e, f) = self.train, self.validation, self.test
        if not (a < b and c < d and e < f):
            raise ValueError("empty holdout range")
        if not (a <= c and d == b and b == e):
            raise ValueError("validation must close the training block and test must follow it")

    @property
    def fit(self) -> tuple[int, int]:
        """Training block minus its validation tail."""
        return (self.train[0], self.validation[0])


def _parse_float(cell: str) -> Optional[float]:
    try:
        return float(cell)
    except ValueError:
        return None


def load_series(path, frequency: Optional[int] = None, delimiter: str = ",",
                name: Optional[str] = None) -> TimeSeries:
    """Read a one-column (or timestamp + value) delimited text file.

    A non-numeric first row is taken as a header. When a row has several
    cells the last one holds the value; earlier cells (timestamps) are
    ignored. Row numbers in error messages are 1-based file lines.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh, delimiter=delimiter))]
    rows = [(i, r) for i, r in rows if any(c.strip() for c in r)]
    if rows and _parse_float(rows[0][1][-1].strip()) is None:
        rows = rows[1:]
    if not rows:
        raise LoadError(f"{path}: no observations")
    values = []
    for lineno, row in rows:
        cell = row[-1].strip()
        v = _parse_float(cell)
        if v is None:
            raise LoadError(f"{path}: non-numeric value {cell!r} at row {lineno}")
        if not math.isfinite(v):
            raise LoadError(f"{path}: missing or non-finite value at row {lineno}")
        values.append(v)
    return TimeSeries(np.asarray(values), frequency, name or path.stem)


def embed(series, p: int) -> EmbeddingDataset:
    """Time-delay embedding with horizon 1 and most-recent-first lags."""
    ts = series if isinstance(series, TimeSeries) else TimeSeries(series)
    if p < 1:
        raise ValueError("embedding dimension must be >= 1")
    y_all = ts.values
    n = y_all.size
    if p >= n:
        raise ValueError(f"series too short for embedding dimension {p} (n={n})")
    windows = np.lib.stride_tricks.sliding_window_view(y_all[:-1], p)
    X = np.ascontiguousarray(windows[:, ::-1])
    t = np.arange(p, n)
    return EmbeddingDataset(_readonly(X), _readonly(y_all[p:]), t, p, ts)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def repeated_holdout(n: int, repetitions: int = 10, train_frac: float = 0.6,
                     test_frac: float = 0.1, validation_frac: float = 0.1,
                     random_origins: bool = False, seed: Optional[int] = None
                     ) -> list[HoldoutWindow]:
    """Windows of ``floor(train_frac*n)`` training and ``floor(test_frac*n)``
    test points.

    Origins are evenly spaced over ``[0, n - W]`` (``W`` = window size) unless
    ``random_origins`` is set, in which case they are drawn with ``seed``.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if not (0 < train_frac and 0 < test_frac and train_frac + test_frac <= 1):
        raise ValueError("need 0 < train_frac, 0 < test_frac, train_frac + test_frac <= 1")
    n_train = int(math.floor(train_frac * n))
    n_test = int(math.floor(test_frac * n))
    n_val = int(math.floor(validation_frac * n_train))
    width = n_train + n_test
    if n_train < 2 or n_test < 1 or n_val < 1 or width > n:
        raise ValueError(f"series of length {n} too short for one holdout window")
    slack = n - width
    if random_origins:
        rng = np.random.default_rng(seed)
        origins = sorted(int(o) for o in rng.integers(0, slack + 1, size=repetitions))
    elif repetitions == 1:
        origins = [0]
    else:
        origins = [_round_half_up(r * slack / (repetitions - 1)) for r in range(repetitions)]
    out = []
    for o in origins:
        stop = o + n_train
        out.append(HoldoutWindow((o, stop), (stop - n_val, stop), (stop, stop + n_test)))
    return out


def single_holdout(n: int, train_frac: float = 0.8, validation_frac: float = 0.1) -> HoldoutWindow:
    """One split: the first ``train_frac`` for training, the rest for testing."""
    n_train = int(math.floor(train_frac * n))
    n_val = max(1, int(math.floor(validation_frac * n_train)))
    if n_train < 2 or n_train >= n:
        raise ValueError(f"series of length {n} too short for a holdout split")
    return HoldoutWindow((0, n_train), (n_train - n_val, n_train), (n_train, n))


def as_series(values: Sequence[float] | np.ndarray | TimeSeries, frequency=None, name="series") -> TimeSeries:
    if isinstance(values, TimeSeries):
        return values
    return TimeSeries(np.asarray(values, dtype=float), frequency, name)
