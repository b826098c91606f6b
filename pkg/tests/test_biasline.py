import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import dense_envelope
from waveris.biasline import (BiasLineGeometry, EnvelopeDetector, ModeWeights, SampleAndHold, check_sample_time,
                              envelope_lower_bound, envelope_minimum, fundamental_frequency, in_range,
                              mode_index_pd, mode_index_sh, sample_envelope, sample_hold, standing_wave_value,
                              time_factors, validate_range)
from waveris.errors import SampleTimeError

G = BiasLineGeometry(100, 50)


def single(g, n, amp, w0=0.0):
    w = ModeWeights.zeros(g.N, w0)
    w.w[n - 1] = amp
    return w


def test_geometry_defaults():
    assert G.M_l == G.M_r == 2 and G.d_x == 0.019 and G.f_b == 12.9e6
    assert G.span == 103
    assert G.max_modes == 100
    assert G.mode_shapes().shape == (100, 50)
    assert G.default_sample_time() * G.omega_b == pytest.approx(8.0)


@pytest.mark.parametrize("kw", [dict(M=1, N=1), dict(M=5, N=0), dict(M=5, N=1, M_l=-1),
                                dict(M=5, N=1, d_x=0), dict(M=5, N=1, f_b=-1)])
def test_geometry_invalid(kw):
    with pytest.raises(ValueError):
        BiasLineGeometry(**kw)


def test_fundamental_frequency():
    assert fundamental_frequency(1.0, 1.0) == pytest.approx(299792458.0 / 2)
    with pytest.raises(ValueError):
        fundamental_frequency(0.0, 1.0)


def test_zero_weights_constant():
    w = ModeWeights.zeros(50, -7.0)
    assert np.all(standing_wave_value(G, w, np.arange(100), 1.234e-8) == -7.0)


def test_common_zero_time():
    rng = np.random.default_rng(0)
    w = ModeWeights(-9.0, rng.normal(size=50))
    v = standing_wave_value(G, w, np.arange(100), math.pi / G.omega_b)
    np.testing.assert_allclose(v, -9.0, atol=1e-12)


def test_single_term_hand_value():
    w = single(G, 10, 9.0)
    t = math.pi / (2 * 10 * G.omega_b)
    assert standing_wave_value(G, w, 49, t) == pytest.approx(9 * math.sin(10 * math.pi * 51 / 103), rel=1e-12)


def test_element_index_checked():
    with pytest.raises(IndexError):
        standing_wave_value(G, ModeWeights.zeros(50), 100, 0.0)


def test_weights_length_checked():
    with pytest.raises(ValueError):
        sample_hold(G, ModeWeights.zeros(3), G.default_sample_time())


def test_weights_dict_round_trip():
    w = ModeWeights(-4.0, [1.5, -0.25])
    again = ModeWeights.from_dict(w.to_dict())
    assert again.w0 == -4.0 and list(again.w) == [1.5, -0.25]


def test_single_mode_envelope_closed_form():
    w = single(G, 10, -2.5, -4.0)
    expect = -4.0 - np.abs(2.5 * G.mode_shapes()[:, 9])
    np.testing.assert_allclose(sample_envelope(G, w), expect, atol=1e-12)


def test_envelope_worst_case_minus_13():
    g = BiasLineGeometry(3, 1, M_l=0.5, M_r=0.5)  # element 1 sits at the crest of mode 1
    v = sample_envelope(g, ModeWeights(-4.0, [9.0]))
    assert v[1] == pytest.approx(-13.0, abs=1e-12)


def test_envelope_matches_dense_oracle():
    rng = np.random.default_rng(7)
    g = BiasLineGeometry(30, 12)
    for _ in range(5):
        W = rng.normal(scale=1.0, size=12)
        ours = sample_envelope(g, ModeWeights(-4.0, W))
        ref = dense_envelope(g, -4.0, W)
        assert np.max(np.abs(ours - ref)) < 1e-6


def test_envelope_minimum_rows():
    coef = np.array([[1.0, 0.0], [0.0, -2.0], [1.0, 1.0]])
    out = envelope_minimum(coef)
    x = np.linspace(0, 2 * np.pi, 200001)
    ref = [np.min(c[0] * np.sin(x) + c[1] * np.sin(2 * x)) for c in coef]
    np.testing.assert_allclose(out, ref, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(1, 15), st.integers(0, 3), st.integers(0, 2**31))
def test_envelope_symmetry_and_bounds(M, N, ext, seed):
    g = BiasLineGeometry(M, N, ext, ext)
    W = np.random.default_rng(seed).normal(size=N)
    v = sample_envelope(g, ModeWeights(-4.0, W))
    np.testing.assert_allclose(v, v[::-1], atol=1e-9)
    assert np.all(v >= envelope_lower_bound(g, ModeWeights(-4.0, W)) - 1e-9)
    assert np.all(v >= -4.0 - np.abs(W).sum() - 1e-9)
    assert np.all(v <= -4.0 + 1e-12)


def test_envelope_triangle_bound_in_range():
    rng = np.random.default_rng(3)
    W = rng.uniform(-1, 1, 50)
    W *= 11 / np.abs(W).sum()
    assert validate_range(sample_envelope(G, ModeWeights(-4.0, W))) == []


def test_sample_hold_zero_and_affine():
    t0 = G.default_sample_time()
    assert np.all(sample_hold(G, ModeWeights.zeros(50, -9.5), t0) == -9.5)
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=50), rng.normal(size=50)
    va = sample_hold(G, ModeWeights(-9.5, a), t0)
    vb = sample_hold(G, ModeWeights(-9.5, b), t0)
    vab = sample_hold(G, ModeWeights(-9.5, a + b), t0)
    np.testing.assert_allclose(vab, va + vb + 9.5, atol=1e-12)


def test_sample_hold_equals_wave_value():
    rng = np.random.default_rng(2)
    w = ModeWeights(-9.0, rng.normal(size=50))
    t0 = G.default_sample_time()
    np.testing.assert_allclose(sample_hold(G, w, t0), standing_wave_value(G, w, np.arange(100), t0), atol=1e-12)


def test_default_sample_time_nonvanishing():
    tf = check_sample_time(G, 8 / G.omega_b)
    assert np.all(tf != 0)
    assert np.min(np.abs(np.sin(8 * np.arange(1, 51)))) > 0.01


def test_vanishing_time_factor_names_mode():
    t0 = math.pi / (3 * G.omega_b)  # sin(3 n pi / 3) = 0 for n = 3
    with pytest.raises(SampleTimeError) as exc:
        sample_hold(G, ModeWeights.zeros(50), t0)
    assert exc.value.mode == 3
    with pytest.raises(SampleTimeError):
        SampleAndHold(t0).check(G)


def test_time_factors():
    np.testing.assert_allclose(time_factors(G, 8 / G.omega_b), np.sin(8 * np.arange(1, 51)))


def test_validate_range():
    assert validate_range(np.full(5, -9.5)) == []
    v = np.full(5, -9.5)
    v[2] = -15.2
    v[4] = -3.5
    out = validate_range(v)
    assert [i for i, _ in out] == [2, 4]
    assert out[0][1] == pytest.approx(-0.2) and out[1][1] == pytest.approx(0.5)
    assert not in_range(v) and in_range(np.array([-15.0, -4.0]))


def test_mode_index_sh():
    assert mode_index_sh(100, 0.2, 0.0) == 0
    assert mode_index_sh(100, 0.2, math.radians(-30)) == 20
    assert mode_index_sh(256, 0.2, math.radians(-30)) == 51
    assert mode_index_sh(100, 0.2, math.radians(-30), "appendix") == 20
    with pytest.raises(ValueError):
        mode_index_sh(100, 0.2, math.pi / 2)


def test_mode_index_pd():
    assert mode_index_pd(100, 0.2, math.radians(-30)) == 10
    assert mode_index_pd(100, 0.2, 0.0) == 0
    # 20.2 sin50 / sin30 = 30.95 -> 31, halved and rounded half-up -> 16
    assert mode_index_sh(100, 0.2, math.radians(-50)) == 31
    assert mode_index_pd(100, 0.2, math.radians(-50)) == 16
    theta = math.asin(1 / 40.4)
    assert mode_index_sh(100, 0.2, theta) == 1
    assert mode_index_pd(100, 0.2, theta) == 1


def test_half_up_rounding():
    # 2 (M+1) delta sin(theta) = 2 * 4 * 0.5 * 0.625 = 2.5 exactly -> 3, not the banker's 2
    assert mode_index_sh(3, 0.5, math.asin(0.625)) == 3


def test_samplers():
    env, sh = EnvelopeDetector(), SampleAndHold(G.default_sample_time())
    assert env.default_w0 == -4.0 and sh.default_w0 == -9.5
    w = single(G, 5, 1.0, -6.0)
    np.testing.assert_array_equal(env.sample(G, w), sample_envelope(G, w))
    np.testing.assert_array_equal(sh.sample(G, w), sample_hold(G, w, sh.t0))
    assert env.mode_index(100, 0.2, math.radians(-30)) == 10
    assert sh.mode_index(100, 0.2, math.radians(-30)) == 20
