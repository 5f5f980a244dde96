import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from vest.summaries import (SUMMARIES, apply_summary, autocorrelations, durbin_levinson,
                            summarise_rows)

import oracles

# subnormals underflow when scaled, which reorders values
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_subnormal=False)
vectors = arrays(np.float64, st.integers(3, 30), elements=finite)
# two-decimal values: shifting by another two-decimal constant keeps every order
grid = arrays(np.float64, st.integers(3, 30), elements=st.integers(-10**5, 10**5).map(lambda i: i / 100))

def agree(got, ref, rtol):
    if ref is None or got is None:
        return ref is None and got is None
    return abs(got - ref) <= rtol * max(1.0, abs(ref))


def test_catalog_has_32_unique_ids():
    assert len(SUMMARIES) == 32 == len(set(SUMMARIES))
    assert SUMMARIES[0] == "MEAN" and SUMMARIES[-1] == "MLE"


def test_unknown_summary():
    with pytest.raises(KeyError, match="unknown summary"):
        apply_summary("ENTROPY", [1.0, 2.0, 3.0])


@pytest.mark.parametrize("seed", range(40))
def test_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    q = int(rng.integers(3, 31))
    v = rng.normal(size=q) * rng.uniform(0.1, 10) + rng.normal(0, 5)
    row = summarise_rows(v[None, :])[0]
    ref = oracles.summaries(v)
    for s, g in zip(SUMMARIES, row):
        g = None if math.isnan(g) else float(g)
        tol = 1e-6 if s in ("LRD1", "LRD2", "MLE") else 1e-9
        assert agree(g, ref[s], tol), (s, g, ref[s])


def test_scalar_and_batch_agree():
    v = np.random.default_rng(3).normal(size=(5, 20))
    batch = summarise_rows(v)
    for i in range(5):
        for c, s in enumerate(SUMMARIES):
            a = apply_summary(s, v[i])
            assert (a is None and np.isnan(batch[i, c])) or a == pytest.approx(batch[i, c], rel=1e-12)


def test_nan_rows_are_all_missing():
    V = np.array([[1.0, 2.0, 3.0, 4.0], [1.0, np.nan, 3.0, 4.0]])
    out = summarise_rows(V)
    assert np.isnan(out[1]).all() and not np.isnan(out[0, 0])


# ---------------------------------------------------------------- examples

def test_location_and_dispersion_examples():
    v = [1, 2, 3, 4]
    assert apply_summary("MEAN", v) == 2.5
    assert apply_summary("MDN", v) == 2.5
    assert apply_summary("SD", v) == pytest.approx(math.sqrt(5 / 3))
    assert apply_summary("VAR", v) == pytest.approx(5 / 3)
    assert apply_summary("IQR", v) == pytest.approx(1.5)
    assert apply_summary("MIN", v) == 1 and apply_summary("MAX", v) == 4
    assert apply_summary("LP", v) == 4
    assert apply_summary("NORM", [3, 4]) == 5.0
    assert apply_summary("P05", list(range(1, 101))) == pytest.approx(5.95)


def test_slope_and_amplitude_examples():
    assert apply_summary("SLP", [1, 3, 5, 7]) == pytest.approx(2.0)
    assert apply_summary("AMP", [0, 10, 0, 10]) == pytest.approx(10.0)


def test_relative_dispersion():
    assert apply_summary("RD", [1, 2, 4]) == pytest.approx(math.sqrt(14 / 3))
    assert apply_summary("RD", [1, 3, 5, 7]) is None
    assert apply_summary("RD", [1, 2]) is None


def test_single_value_vector():
    assert apply_summary("MEAN", [7.0]) == 7.0
    assert apply_summary("SD", [7.0]) is None
    assert apply_summary("SK", [1.0, 2.0]) is None


@pytest.mark.parametrize("s", ["SK", "KRT", "ACF", "PACF", "ACF1", "RD", "BP", "LRD1"])
def test_constant_vector_undefined(s):
    assert apply_summary(s, [5.0] * 16) is None


def test_constant_vector_defined_values():
    v = [5.0] * 16
    assert apply_summary("SD", v) == 0.0
    assert apply_summary("SLP", v) == 0.0
    assert apply_summary("NO", v) == 0.0
    assert apply_summary("PEAK_I", v) == 0.0
    assert apply_summary("OD", v) == 0.0
    assert apply_summary("ACC_1", v) == pytest.approx(1.0)
    assert apply_summary("ACC_2", v) == pytest.approx(0.0, abs=1e-12)


def test_turns_and_outliers():
    v = [1, 2, 1, 0]
    assert apply_summary("OD", v) == -1.0
    assert apply_summary("PEAK_I", v) == 1.0
    assert apply_summary("PEAK_D", v) == 0.0
    assert apply_summary("PEAK_I", [0, 1, 0, 1, 0]) == 2.0
    assert apply_summary("PEAK_D", [0, 1, 0, 1, 0]) == 1.0
    assert apply_summary("NO", [1, 2, 3, 4, 100]) == 1.0


def test_acc_missing_when_ema_hits_zero():
    assert apply_summary("ACC_1", [1.0, -1.0, 1.0, -1.0]) is None


def test_poincare_short_versus_long_term():
    ramp = [float(i) for i in range(20)]
    assert apply_summary("PV_ST", ramp) == pytest.approx(0.0, abs=1e-12)
    assert apply_summary("PV_LT", ramp) > 1
    zigzag = [1.0, -1.0] * 10
    assert apply_summary("PV_ST", zigzag) > apply_summary("PV_LT", zigzag)


def test_durbin_levinson_ar1():
    rho = np.array([[0.5 ** h for h in range(1, 11)]])
    pacf = durbin_levinson(rho)[0]
    assert pacf[0] == pytest.approx(0.5)
    np.testing.assert_allclose(pacf[1:], 0.0, atol=1e-12)


def test_autocorrelations_oracle():
    v = np.random.default_rng(0).normal(size=25)
    got = autocorrelations(v[None, :])[0]
    ref = oracles.acf(list(v), 10)
    np.testing.assert_allclose(got, ref, rtol=1e-12)


# ----------------------------------------------------------- statistical bands

def test_lrd_white_noise_near_half():
    rng = np.random.default_rng(0)
    V = rng.normal(size=(200, 512))
    h = summarise_rows(V, ("LRD1",))[:, 0]
    assert abs(np.mean(h) - 0.5) < 0.05
    assert np.mean(np.abs(h - 0.5) <= 0.15) >= 0.95


def test_lrd_random_walk_near_one():
    rng = np.random.default_rng(1)
    V = np.cumsum(rng.normal(size=(200, 512)), axis=1)
    h = summarise_rows(V, ("LRD1",))[:, 0]
    assert abs(np.mean(h) - 1.0) < 0.1


def test_mle_periodic_near_zero():
    v = np.sin(2 * np.pi * np.arange(30) / 7.3)
    assert abs(apply_summary("MLE", v)) < 0.1


def test_mle_chaotic_positive():
    x = [0.2]
    for _ in range(29):
        x.append(4 * x[-1] * (1 - x[-1]))
    assert apply_summary("MLE", x) > 0


def test_mle_short_vector_missing():
    assert apply_summary("MLE", list(range(9))) is None


def test_step_rarely_fires_on_noise():
    V = np.random.default_rng(2).normal(size=(2000, 30))
    assert np.nanmean(summarise_rows(V, ("STEP",))[:, 0]) < 0.05


def test_step_detects_level_shift():
    v = [0.0, 0.1, -0.1, 0.05] * 3 + [10.0, 10.1, 9.9, 10.05] * 3
    assert apply_summary("STEP", v) == 1.0


# -------------------------------------------------------------- invariances

@settings(max_examples=60, deadline=None)
@given(grid, st.integers(-10**4, 10**4).map(lambda i: i / 100))
def test_shift_invariance(v, c):
    assume(np.ptp(v) > 1e-3)
    base = summarise_rows(v[None, :])[0]
    moved = summarise_rows((v + c)[None, :])[0]
    for s in ("SD", "VAR", "IQR", "SLP", "AMP", "PV_ST", "PV_LT"):
        k = SUMMARIES.index(s)
        if np.isnan(base[k]):
            assert np.isnan(moved[k])
            continue
        assert moved[k] == pytest.approx(base[k], rel=1e-6, abs=1e-6 * (1 + abs(c)) * np.ptp(v))
    for s in ("RD", "NO", "OD", "PEAK_I", "PEAK_D", "STEP"):
        k = SUMMARIES.index(s)
        if np.isnan(base[k]) or np.isnan(moved[k]):
            continue
        assert moved[k] == pytest.approx(base[k], rel=1e-6, abs=1e-6)
    for s in ("MEAN", "MDN", "MIN", "MAX", "LP", "P05", "P95"):
        k = SUMMARIES.index(s)
        assert moved[k] == pytest.approx(base[k] + c, rel=1e-9, abs=1e-9 * (abs(c) + np.abs(v).max()))


@settings(max_examples=60, deadline=None)
@given(vectors, st.floats(0.01, 100))
def test_scale_invariance(v, a):
    assume(np.ptp(v) > 1e-2 * max(1.0, np.abs(v).max()))
    base = summarise_rows(v[None, :])[0]
    scaled = summarise_rows((a * v)[None, :])[0]
    for s in ("SK", "KRT", "ACF", "ACF1", "PACF", "BP", "NO", "OD", "PEAK_I", "PEAK_D"):
        k = SUMMARIES.index(s)
        if np.isnan(base[k]):
            continue
        assert scaled[k] == pytest.approx(base[k], rel=1e-6, abs=1e-6)
    for s in ("SD", "IQR", "MAX"):
        k = SUMMARIES.index(s)
        assert scaled[k] == pytest.approx(a * base[k], rel=1e-9, abs=1e-9 * a * np.abs(v).max())


@settings(max_examples=60, deadline=None)
@given(vectors)
def test_basic_orderings(v):
    row = dict(zip(SUMMARIES, summarise_rows(v[None, :])[0]))
    assert row["MIN"] <= row["P05"] <= row["MDN"] <= row["P95"] <= row["MAX"]
    assert row["IQR"] >= 0 and row["VAR"] >= 0
    assert row["VAR"] == pytest.approx(row["SD"] ** 2, rel=1e-9, abs=1e-12)
    q = v.size
    assert abs(row["OD"]) <= q - 1
    assert 0 <= row["NO"] <= q
    assert row["PEAK_I"] + row["PEAK_D"] <= max(q - 2, 0)
    assert np.isnan(row["STEP"]) or row["STEP"] in (0.0, 1.0)
