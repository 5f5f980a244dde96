"""Seeded synthetic series: AR dynamics + seasonality + trend + noise."""
from __future__ import annotations

import numpy as np

from .series import TimeSeries

FREQUENCY = 12


def synthetic_series(n: int = 2000, seed: int = 0, frequency: int = FREQUENCY,
                     name: str | None = None) -> TimeSeries:
    rng = np.random.default_rng(seed)
    phi1 = rng.uniform(0.3, 0.8)
    phi2 = rng.uniform(-0.3, 0.15)
    amp = rng.uniform(1.0, 4.0)
    phase = rng.uniform(0, 2 * np.pi)
    slope = rng.uniform(-2.0, 4.0) / n
    level = rng.uniform(20.0, 50.0)
    burn = 200
    e = rng.normal(size=n + burn)
    ar = np.zeros(n + burn)
    for i in range(2, n + burn):
        ar[i] = phi1 * ar[i - 1] + phi2 * ar[i - 2] + e[i]
    t = np.arange(n)
    season = amp * np.sin(2 * np.pi * t / frequency + phase)
    values = level + slope * t * 10 + season + ar[burn:] + 0.3 * rng.normal(size=n)
    return TimeSeries(values, frequency, name or f"synthetic-{seed:02d}")


def synthetic_corpus(k: int = 10, n: int = 2000, seed: int = 0,
                     frequency: int = FREQUENCY) -> list[TimeSeries]:
    """``k`` series with seeds ``seed .. seed + k - 1``."""
    return [synthetic_series(n, seed + i, frequency, f"synthetic-{seed + i:02d}") for i in range(k)]
