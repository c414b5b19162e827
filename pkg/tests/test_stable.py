import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import kstest, ks_2samp, levy_stable

from stableburgers.rng import SplitStream, as_generator, as_stream
from stableburgers.stable import (
    GridPath,
    StableParams,
    TwoSidedPath,
    add_drift,
    characteristic_exponent,
    integral_exponent,
    integrate_path,
    integrate_values,
    positivity_parameter,
    sample_path,
    sample_paths,
    sample_stable,
    two_sided_data,
)


# ---------------------------------------------------------------- parameters

def test_alpha_out_of_range_names_precondition():
    with pytest.raises(ValueError, match=r"alpha ∈ \(0,2\]"):
        StableParams(2.5)
    with pytest.raises(ValueError, match=r"alpha ∈ \(0,2\]"):
        StableParams(0.0)


def test_beta_and_scale_checked():
    with pytest.raises(ValueError, match=r"beta ∈ \[-1,1\]"):
        StableParams(1.5, 1.2)
    with pytest.raises(ValueError, match="scale"):
        StableParams(1.5, 0.0, -1.0)


def test_asymmetric_cauchy_rejected():
    with pytest.raises(ValueError, match="alpha = 1 with beta != 0"):
        StableParams(1.0, 0.5)
    StableParams(1.0, 0.0)  # symmetric Cauchy is fine


@pytest.mark.parametrize("alpha,beta,rho", [(2.0, 0.0, 0.5), (1.5, -1.0, 2 / 3), (1.5, 1.0, 1 / 3), (2.0, 0.7, 0.5)])
def test_positivity_parameter_examples(alpha, beta, rho):
    assert positivity_parameter(StableParams(alpha, beta)) == pytest.approx(rho, abs=1e-15)


@pytest.mark.parametrize("alpha,beta", [(1.5, 0.5), (1.1, -0.3), (0.7, 0.3), (0.5, -0.9)])
def test_positivity_parameter_against_scipy(alpha, beta):
    # scipy's S1 parametrisation has the same exponent for alpha != 1
    oracle = 1.0 - levy_stable.cdf(0.0, alpha, beta)
    assert positivity_parameter(StableParams(alpha, beta)) == pytest.approx(oracle, abs=1e-6)


@given(st.floats(0.05, 2.0), st.floats(-1.0, 1.0))
def test_rho_range_and_reflection(alpha, beta):
    if alpha == 1.0 and beta != 0.0:
        return
    rho = StableParams(alpha, beta).rho
    assert 0.0 <= rho <= 1.0
    if alpha > 1:
        assert 1 - 1 / alpha - 1e-12 <= rho <= 1 / alpha + 1e-12
    assert StableParams(alpha, -beta).rho == pytest.approx(1.0 - rho, abs=1e-12)


def test_exponents():
    p = StableParams(2.0, 0.3, 1.7)
    assert characteristic_exponent(p, 2.0) == pytest.approx(1.7 * 4.0)
    q = StableParams(1.5, -0.4)
    lam = np.array([-2.0, 0.5, 3.0])
    assert np.allclose(integral_exponent(q, lam), characteristic_exponent(q, lam) / 2.5)
    assert np.allclose(characteristic_exponent(q, -lam), np.conj(characteristic_exponent(q, lam)))


# ---------------------------------------------------------------- sampler

def test_gaussian_case_variance_and_law():
    p = StableParams(2.0, 0.0, 1.3)
    x = sample_stable(p, 7, size=100_000)
    assert np.var(x) == pytest.approx(2 * 1.3, rel=0.05)
    ref = np.random.default_rng(123).normal(0.0, math.sqrt(2 * 1.3), size=20_000)
    assert ks_2samp(x[:20_000], ref).pvalue > 0.01


@pytest.mark.parametrize("alpha,beta", [(1.5, 0.0), (1.5, -1.0), (1.1, 0.6), (0.8, 0.4)])
def test_sampler_matches_scipy_law(alpha, beta):
    x = sample_stable(StableParams(alpha, beta), 11, size=2000)
    assert kstest(x, lambda q: levy_stable.cdf(q, alpha, beta)).pvalue > 0.01


def test_cf_at_one_symmetric():
    n = 100_000
    x = sample_stable(StableParams(1.5), 3, size=n)
    assert abs(np.mean(np.exp(1j * x)) - math.exp(-1.0)) <= 4 / math.sqrt(n)


def test_symmetric_median_zero():
    n = 100_000
    x = sample_stable(StableParams(1.2), 5, size=n)
    frac = np.mean(x > 0)
    assert abs(frac - 0.5) < 3 * math.sqrt(0.25 / n)


def test_scalar_draw_and_reproducibility():
    p = StableParams(1.5, 0.2)
    assert isinstance(sample_stable(p, 1), float)
    assert np.array_equal(sample_stable(p, 9, size=50), sample_stable(p, 9, size=50))


# ---------------------------------------------------------------- rng

def test_split_streams_are_stable_and_distinct():
    s = SplitStream(42)
    a = s.replica(3).random(4)
    assert np.array_equal(a, SplitStream(42).split(3).generator().random(4))
    assert not np.array_equal(a, s.replica(4).random(4))
    assert not np.array_equal(a, SplitStream(43).replica(3).random(4))


def test_rng_coercion():
    g = np.random.default_rng(0)
    assert as_generator(g) is g
    assert isinstance(as_generator(SplitStream(1)), np.random.Generator)
    assert as_stream(5) == SplitStream(5)
    with pytest.raises(TypeError):
        as_stream(np.random.default_rng(0))
    with pytest.raises(TypeError):
        as_generator("seed")


# ---------------------------------------------------------------- paths

def test_gridpath_validation():
    with pytest.raises(ValueError):
        GridPath(0.0, 0.1, [0.0])
    with pytest.raises(ValueError):
        GridPath(0.0, 0.0, [0.0, 1.0])
    with pytest.raises(ValueError):
        GridPath(0.0, 0.1, [0.0, np.nan])
    g = GridPath(1.0, 0.5, [0.0, 1.0, 2.0])
    assert g.n == 3 and g.t_end == pytest.approx(2.0)
    assert np.allclose(g.times, [1.0, 1.5, 2.0])


def test_path_starts_at_zero_and_shapes():
    p = StableParams(1.5)
    path = sample_path(p, 2.0, 100, 0)
    assert path.values[0] == 0.0 and path.n == 101 and path.dt == pytest.approx(0.02)
    with pytest.raises(ValueError):
        sample_path(p, 1.0, 1, 0)


def test_endpoint_self_similarity():
    # Z_T ~ T^(1/alpha) Z_1
    p = StableParams(1.5, 0.5)
    n = 10_000
    zT = sample_paths(p, 8.0, 16, n, 1)[:, -1]
    z1 = sample_stable(p, 2, size=n)
    assert ks_2samp(zT, 8.0 ** (1 / 1.5) * z1).pvalue > 0.01


def test_rescaled_horizon_scaling():
    p = StableParams(1.3, -0.5)
    n = 10_000
    a = sample_paths(p, 1.0, 8, n, 3)
    b = sample_paths(p, 5.0, 8, n, 4)
    for k in (1, 4, 8):
        assert ks_2samp(b[:, k], 5.0 ** (1 / 1.3) * a[:, k]).pvalue > 0.01


def test_increment_stationarity():
    p = StableParams(1.5, 1.0)
    z = sample_paths(p, 10.0, 100, 10_000, 5)
    early = z[:, 12] - z[:, 2]
    late = z[:, 90] - z[:, 80]
    assert ks_2samp(early, late).pvalue > 0.01


def test_gaussian_increments_kurtosis():
    z = sample_paths(StableParams(2.0), 1.0, 100, 1000, 6)
    inc = np.diff(z, axis=1).ravel()
    k = np.mean((inc - inc.mean()) ** 4) / np.var(inc) ** 2
    assert k == pytest.approx(3.0, abs=0.1)


# ---------------------------------------------------------------- integration

def test_integrate_constant_path():
    g = GridPath(0.0, 0.25, np.full(9, 3.0))
    a = integrate_path(g)
    assert np.allclose(a.values, 3.0 * 0.25 * np.arange(9))


@given(
    st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=40),
    st.floats(-10, 10), st.floats(-10, 10), st.floats(1e-3, 10),
)
def test_integration_is_linear(f, a, b, dt):
    f = np.array(f)
    g = np.cos(np.arange(f.size)) * 7.0
    lhs = integrate_values(a * f + b * g, dt)
    rhs = a * integrate_values(f, dt) + b * integrate_values(g, dt)
    scale = np.abs(a * integrate_values(np.abs(f), dt)).max() + np.abs(b * integrate_values(np.abs(g), dt)).max()
    assert np.all(np.abs(lhs - rhs) <= 1e-12 * max(scale, 1e-300) + 1e-300)


def test_integral_self_similarity():
    # A_2t ~ 2^(1 + 1/alpha) A_t on grids with equal relative resolution
    p = StableParams(1.5)
    n = 10_000
    a1 = integrate_values(sample_paths(p, 1.0, 64, n, 7), 1 / 64)[:, -1]
    a2 = integrate_values(sample_paths(p, 2.0, 64, n, 8), 2 / 64)[:, -1]
    assert ks_2samp(a2, 2 ** (1 + 1 / 1.5) * a1).pvalue > 0.01


def test_drift():
    g = sample_path(StableParams(1.5), 1.0, 10, 0)
    assert add_drift(g, 0.0) is g
    zero = GridPath(0.0, 0.1, np.zeros(11))
    assert np.allclose(add_drift(zero, 1.0).values, 0.1 * np.arange(11))
    a = integrate_path(add_drift(zero, 1.0))
    t = a.times
    assert np.all(np.abs(a.values - t**2 / 2) <= 0.1 * t + 1e-12)


# ---------------------------------------------------------------- two-sided data

def test_two_sided_structure():
    d = two_sided_data(StableParams(1.5), 4.0, 64, 0)
    assert d.values[d.origin] == 0.0 and d.x[d.origin] == pytest.approx(0.0)
    assert np.allclose(np.diff(d.x), d.dt)
    with pytest.raises(ValueError):
        TwoSidedPath(GridPath(-1.0, 0.5, [0.0, 0.0, 1.0]), GridPath(0.0, 0.5, [0.0, 1.0, 2.0]))


def test_two_sided_law_and_independence():
    p = StableParams(1.5, 0.5)
    n = 10_000
    left, right = [], []
    s = SplitStream(3)
    for r in range(n):
        d = two_sided_data(p, 1.0, 2, s.replica(r))
        left.append(d.values[0])
        right.append(d.values[-1])
    left, right = np.array(left), np.array(right)
    assert ks_2samp(left, -right).pvalue > 0.01
    # heavy tails: test independence on signs, where moments exist
    sl, sr = np.sign(left), np.sign(right)
    assert abs(np.corrcoef(sl, sr)[0, 1]) < 3 / math.sqrt(n)
