import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stableburgers.fractal import (
    BoxCountCurve,
    box_count,
    box_dimension,
    default_fit_range,
    fit_dimension,
    hitting_exponent,
)
from stableburgers.stable import StableParams


def cantor_endpoints(level):
    segs = [(0.0, 1.0)]
    for _ in range(level):
        segs = [s for a, b in segs for s in ((a, a + (b - a) / 3), (b - (b - a) / 3, b))]
    return np.unique(np.array(segs).ravel())


# ---------------------------------------------------------------- box counting

def test_full_grid_counts():
    m = 10
    pts = np.arange(2**m) / 2**m
    curve = box_count(pts, (0.0, 1.0), m + 1)
    assert curve.counts.tolist() == [2**k for k in range(m + 1)]
    assert np.allclose(curve.scales, 2.0 ** -np.arange(m + 1))


def test_single_point():
    curve = box_count([0.3], (0.0, 1.0), 12)
    assert np.all(curve.counts == 1)


def test_errors():
    with pytest.raises(ValueError, match="empty"):
        box_count([], (0.0, 1.0), 5)
    with pytest.raises(ValueError):
        box_count([0.5], (0.0, 1.0), 2)
    with pytest.raises(ValueError):
        box_count([1.5], (0.0, 1.0), 5)


def test_cantor_calibration():
    pts = cantor_endpoints(10)
    fit = fit_dimension(box_count(pts, (0.0, 1.0), 16))
    assert fit.slope == pytest.approx(math.log(2) / math.log(3), abs=0.05)


point_sets = st.lists(st.integers(0, 2**12 - 1), min_size=1, max_size=200)


@given(point_sets)
def test_count_invariants(ints):
    pts = np.array(ints) / 2**12
    curve = box_count(pts, (0.0, 1.0), 14)
    assert np.all(np.diff(curve.counts) >= 0)
    assert np.all(curve.counts <= np.ceil(1.0 / curve.scales))
    assert curve.counts[-1] == len(set(ints))


@given(point_sets, st.integers(-1000, 1000))
def test_translation_invariance(ints, shift):
    pts = np.array(ints) / 2**12
    base = box_count(pts, (0.0, 1.0), 12)
    moved = box_count(pts + shift, (float(shift), shift + 1.0), 12)
    assert np.array_equal(base.counts, moved.counts)


@given(point_sets, st.integers(-6, 6))
def test_dilation_equivariance(ints, j):
    lam = 2.0**j
    pts = np.array(ints) / 2**12
    base = box_count(pts, (0.0, 1.0), 12)
    scaled = box_count(lam * pts, (0.0, lam), 12)
    assert np.array_equal(base.counts, scaled.counts)
    assert np.allclose(scaled.scales, lam * base.scales)


# ---------------------------------------------------------------- fitting

@given(st.floats(0.05, 1.0))
def test_exact_power_law(d):
    k = np.arange(12)
    curve = BoxCountCurve(2.0 ** -k, 2.0 ** (d * k), (0.0, 1.0))
    fit = fit_dimension(curve, 2, 11)
    assert fit.slope == pytest.approx(d, abs=1e-12)
    assert not fit.degenerate


def test_half_power_law_integer_counts():
    k = np.arange(10)
    curve = BoxCountCurve(4.0 ** -k, 2**k, (0.0, 1.0))
    assert fit_dimension(curve, 0, 9).slope == pytest.approx(0.5, abs=1e-12)


def test_degenerate_and_range():
    curve = box_count([0.25], (0.0, 1.0), 10)
    fit = fit_dimension(curve, 2, 9)
    assert fit.slope == 0.0 and fit.degenerate
    fit = fit_dimension(curve)  # default range is empty: counts never reach 10
    assert fit.degenerate
    pts = np.arange(2**8) / 2**8
    with pytest.raises(ValueError, match="three scales"):
        fit_dimension(box_count(pts, (0.0, 1.0), 9), 3, 4)


def test_default_fit_range():
    pts = np.arange(2**8) / 2**8
    curve = box_count(pts, (0.0, 1.0), 9)
    assert default_fit_range(curve) == (4, 8)  # k >= 2 and counts >= 10


def test_interval_debug_dimension():
    fit, _ = box_dimension(StableParams(2.0), 8.0, 2**14, 0, debug_zero=True)
    assert fit.slope == pytest.approx(1.0, abs=0.02)


def test_box_dimension_point_sets():
    p = StableParams(2.0)
    dims = {use: box_dimension(p, 8.0, 2**14, 3, use=use)[0].slope for use in ("contact", "unflagged", "tangent")}
    assert all(0.2 < d < 0.9 for d in dims.values())
    # only flagged jumps differ, and Brownian data has none
    assert dims["contact"] == dims["unflagged"]


# ---------------------------------------------------------------- hitting probabilities

def test_hitting_zero_data_is_certain():
    curve, kappa, _ = hitting_exponent(StableParams(2.0), [1.0, 0.1, 0.01], 5, 4.0, 0,
                                       n_cells=1024, debug_zero=True)
    assert np.all(curve.probabilities == 1.0)
    assert math.isnan(kappa)  # no usable level: every replica hits


def test_hitting_curve_monotone_and_flags():
    deltas = [0.5, 0.25, 0.1, 0.05, 0.02, 0.005]
    curve, kappa, se = hitting_exponent(StableParams(2.0), deltas, 120, 4.0, 1, n_cells=2048)
    assert np.all(np.diff(curve.deltas) < 0)
    assert np.all(np.diff(curve.hits) <= 0)
    assert np.all((curve.probabilities >= 0) & (curve.probabilities <= 1))
    assert np.array_equal(curve.used, (curve.hits >= 30) & (curve.hits < 120))
    if curve.used.sum() >= 3:
        assert 0 < kappa < 1.5 and se > 0


def test_hitting_delta_precondition():
    with pytest.raises(ValueError):
        hitting_exponent(StableParams(2.0), [2.0], 2, 4.0, 0)


def test_empty_window_is_degenerate():
    # seed 3: one funnel swallows the whole small window
    fit, curve = box_dimension(StableParams(1.5, -1.0), 4.0, 2**10, 3)
    assert fit.degenerate and math.isnan(fit.slope)
    assert np.all(curve.counts == 0)


def test_narrow_auto_range_is_degenerate():
    curve = BoxCountCurve(2.0 ** -np.arange(6), np.array([1, 2, 4, 8, 12, 14]), (0.0, 1.0))
    fit = fit_dimension(curve)
    assert fit.degenerate and math.isnan(fit.slope)
