import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stableburgers.correlation import (
    CovarianceReport,
    LatticeConfig,
    b_event,
    c_event,
    fkg_empirical,
    holley_check,
    lattice_covariance,
    lattice_covariance_mc,
)
from stableburgers.rng import SplitStream
from stableburgers.stable import StableParams

G4 = np.array([0.1, 0.2, 0.3, 0.4])


def whole(v):
    return np.ones(v.shape[0], bool)


def test_lattice_validation():
    with pytest.raises(ValueError):
        LatticeConfig(2, 3, [0.5, 0.5])
    with pytest.raises(ValueError):
        LatticeConfig(2, 2, [0.0, 1.0])
    with pytest.raises(ValueError):
        LatticeConfig(2, 2, [0.5, 0.5], levels=[1.0, 0.0])
    cfg = LatticeConfig(3, 4, G4)
    assert cfg.size == 64 and cfg.probabilities().sum() == pytest.approx(1.0)
    assert np.array_equal(cfg.index(cfg.configurations()), np.arange(64))


def test_holley_whole_space_is_equality():
    assert holley_check(LatticeConfig(3, 4, G4), whole)


def test_holley_sum_event():
    cfg = LatticeConfig(3, 4, G4, levels=[-1.5, -0.2, 0.4, 2.0])
    assert holley_check(cfg, lambda v: v.sum(axis=1) <= 0.3)


def test_holley_negative_control_with_witness():
    cfg = LatticeConfig(3, 4, G4)
    ok, (x, y) = holley_check(cfg, lambda v: v[:, 0] == v[:, 1], return_witness=True)
    assert not ok
    hx = x[0] == x[1]
    hy = y[0] == y[1]
    mx, mn = np.maximum(x, y), np.minimum(x, y)
    # the witness pair really violates h(x)h(y) >= h(x v y) h(x ^ y)
    assert (hx and hy) < ((mx[0] == mx[1]) and (mn[0] == mn[1]))


def test_single_coordinate_band_is_a_sublattice():
    # a band on one coordinate is closed under min and max, so Holley holds
    cfg = LatticeConfig(3, 4, G4)
    assert holley_check(cfg, lambda v: (v[:, 0] >= 1) & (v[:, 0] <= 2))


def test_holley_preconditions():
    with pytest.raises(ValueError, match="zero probability"):
        holley_check(LatticeConfig(2, 3, [0.2, 0.3, 0.5]), lambda v: v[:, 0] > 5)
    with pytest.raises(ValueError, match="limited"):
        holley_check(LatticeConfig(7, 4, G4), whole)


def down_closure(points, n_levels, n_coords):
    pts = np.array(points).reshape(-1, n_coords)

    def event(v):
        return np.any(np.all(v[:, None, :] <= pts[None, :, :], axis=2), axis=1)

    return event


corner = st.lists(st.integers(0, 3), min_size=3, max_size=3)


@settings(max_examples=40, deadline=None)
@given(st.lists(corner, min_size=1, max_size=4), st.lists(corner, min_size=1, max_size=4))
def test_decreasing_events_pass_and_intersections_stay_true(a, b):
    cfg = LatticeConfig(3, 4, G4)
    ea, eb = down_closure(a, 4, 3), down_closure(b, 4, 3)
    assert holley_check(cfg, ea)
    both = lambda v: ea(v) & eb(v)  # noqa: E731
    if both(cfg.values(cfg.configurations())).any():
        assert holley_check(cfg, both)


def test_exhaustive_and_mc_agree():
    cfg = LatticeConfig(3, 4, [[0.1, 0.2, 0.3, 0.4], [0.25, 0.25, 0.25, 0.25], [0.4, 0.3, 0.2, 0.1]])
    cond = lambda v: v.sum(axis=1) <= 5  # noqa: E731
    c = lambda v: v[:, 0] >= 2  # noqa: E731
    d = lambda v: v[:, 1] + v[:, 2] >= 3  # noqa: E731
    exact = lattice_covariance(cfg, cond, c, d)
    rep = lattice_covariance_mc(cfg, cond, c, d, 100_000, 3, expected_sign=-1)
    assert abs(rep.covariance - exact) <= 3 * rep.half_width / 1.96
    assert exact < 0  # increasing events under a decreasing conditioning


# ---------------------------------------------------------------- path FKG

@pytest.fixture(scope="module")
def params():
    return StableParams(1.5)


def test_same_event_covariance(params):
    ev = lambda v: v.z(1.0) > 0  # noqa: E731
    r = fkg_empirical(params, 64, 2.0, [1.0, 2.0], ev, ev, 5000, 1)
    assert r.covariance == pytest.approx(r.p_c * (1 - r.p_c))
    assert r.covariance >= 0


def test_unconditioned_increasing_pair(params):
    r = fkg_empirical(params, 128, 2.0, [1.0, 2.0], lambda v: v.z(1.0) > 0, lambda v: v.z(2.0) > 0, 20_000, 2)
    assert r.consistent and r.covariance > 0


def test_relabeling_invariance(params):
    c = lambda v: v.z(1.0) > 0  # noqa: E731
    d = lambda v: v.amax(2.0) < 1.0  # noqa: E731
    r1 = fkg_empirical(params, 64, 2.0, [1.0, 2.0], c, d, 5000, 5, expected_sign=-1)
    r2 = fkg_empirical(params, 64, 2.0, [1.0, 2.0], d, c, 5000, 5, expected_sign=-1)
    assert r1.covariance == pytest.approx(r2.covariance, abs=1e-15)
    assert r1.half_width == pytest.approx(r2.half_width, abs=1e-15)
    assert r1.consistent == r2.consistent


def test_conditioned_pair_is_nonpositive(params):
    a = params.alpha
    r = fkg_empirical(params, 256, 4.0, [1.0, 2.0, 4.0], c_event(a, 2), lambda v: v.zmax(4.0) < 4 ** (1 / a),
                      20_000, SplitStream(6), condition=b_event(a, 2), expected_sign=-1)
    assert r.consistent and r.condition_rate > 0.01


def test_rare_condition_rejected(params):
    with pytest.raises(ValueError, match="too rare"):
        fkg_empirical(params, 16, 1.0, [1.0], lambda v: v.z(1.0) > 0, lambda v: v.z(1.0) > 0, 500, 0,
                      condition=lambda v: v.a(1.0) > 50.0)


def test_checkpoint_grid_check(params):
    with pytest.raises(ValueError, match="multiples"):
        fkg_empirical(params, 3, 1.0, [0.5], lambda v: v.z(0.5) > 0, lambda v: v.z(0.5) > 0, 10, 0)


def test_report_consistency_rules():
    base = dict(p_c=0.5, p_d=0.5, p_cd=0.25, n_conditioned=10, condition_rate=1.0)
    assert CovarianceReport(-0.01, 0.02, expected_sign=1, **base).consistent
    assert not CovarianceReport(-0.05, 0.02, expected_sign=1, **base).consistent
    assert not CovarianceReport(0.05, 0.02, expected_sign=-1, **base).consistent
    d = CovarianceReport(0.0, 0.1, expected_sign=0, **base).to_dict()
    assert d["consistent"] and set(d) >= {"covariance", "half_width", "expected_sign"}
