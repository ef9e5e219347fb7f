import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose, assert_array_equal

from minphase.signal_core import (
    FirFilter,
    FrequencyGrid,
    LinearPhasePrototype,
    amplitude_extremum,
    amplitude_response,
    autocorrelation,
    convolve,
    energy_concentration,
    frequency_response_magnitude,
    poly_from_zeros,
    reflect_zeros,
    zeros,
)

from conftest import minphase_from_zeros

taps = arrays(np.float64, st.integers(1, 64),
              elements=st.floats(-10, 10, allow_nan=False, width=64))


# -- types

def test_fir_rejects_empty_and_nonfinite():
    with pytest.raises(ValueError):
        FirFilter([])
    with pytest.raises(ValueError):
        FirFilter([1.0, np.inf])


def test_fir_taps_are_read_only():
    f = FirFilter([1.0, 2.0])
    with pytest.raises(ValueError):
        f.taps[0] = 3.0
    assert_array_equal(f.reversed().taps, [2.0, 1.0])


def test_prototype_symmetry_checked_then_averaged():
    with pytest.raises(ValueError):
        LinearPhasePrototype([1.0, 2.0, 1.1])
    with pytest.raises(ValueError):
        LinearPhasePrototype([1.0, 1.0])
    g = LinearPhasePrototype([1.0, 2.0, 1.0 + 1e-16])
    assert g.taps[0] == g.taps[-1]
    assert g.center == 1
    assert_array_equal(g.half, [2.0, g.taps[2]])


def test_prototype_lift_and_from_half():
    g = LinearPhasePrototype.from_half([1.25, 0.5])
    assert_array_equal(g.taps, [0.5, 1.25, 0.5])
    assert_allclose(g.lifted(0.75, 2.0).taps, [1.0, 4.0, 1.0])


def test_grid_endpoints_and_env(monkeypatch):
    w = FrequencyGrid(5).samples
    assert w[0] == 0.0 and w[-1] == np.pi
    assert np.all(np.diff(w) > 0)
    monkeypatch.setenv("MINPHASE_GRID", "17")
    assert FrequencyGrid.from_env().count == 17
    monkeypatch.delenv("MINPHASE_GRID")
    assert FrequencyGrid.from_env().count == 4096
    with pytest.raises(ValueError):
        FrequencyGrid(1)


# -- convolution

def test_convolve_examples(table1):
    assert_array_equal(convolve([1.0], [5.0, 2.0]).taps, [5.0, 2.0])
    assert_array_equal(convolve([1.0, 0.5], [0.5, 1.0]).taps, [0.5, 1.25, 0.5])
    assert_array_equal(convolve(table1, [1.0]).taps, table1.taps)


def test_autocorrelation_examples():
    assert_array_equal(autocorrelation([1.0]).taps, [1.0])
    assert_array_equal(autocorrelation([1.0, 0.5]).taps, [0.5, 1.25, 0.5])
    assert_array_equal(autocorrelation([3.0, 1.0]).taps, [3.0, 10.0, 3.0])


@given(taps)
def test_autocorrelation_is_convolution_with_reversal(h):
    assert_array_equal(autocorrelation(h).taps, convolve(h, h[::-1]).taps)


@given(taps)
def test_autocorrelation_brute_force(h):
    M = h.size
    want = [sum(h[n] * h[n + k] for n in range(M - k)) for k in range(M)]
    got = autocorrelation(h).half
    assert_allclose(got, want, rtol=1e-12, atol=1e-12 * max(1.0, h @ h))


# -- amplitude and magnitude

def test_amplitude_examples():
    assert_array_equal(amplitude_response([1.0], FrequencyGrid(8)), np.ones(8))
    assert amplitude_response([0.5, 1.25, 0.5], [0.0])[0] == pytest.approx(2.25)


def test_amplitude_table1_minimum(table1):
    w, a = amplitude_extremum(table1, "min")
    assert a == pytest.approx(-0.00120505352635236, abs=1e-12)
    assert np.min(amplitude_response(table1)) >= a


@given(arrays(np.float64, st.integers(1, 20), elements=st.floats(-1, 1, width=64)))
def test_amplitude_endpoints(half):
    g = LinearPhasePrototype.from_half(half)
    a0, api = amplitude_response(g, [0.0, np.pi])
    scale = np.sum(np.abs(g.taps)) + 1e-300
    assert abs(a0 - np.sum(g.taps)) <= 1e-14 * scale
    alt = np.sum(g.taps * (-1.0) ** (np.arange(len(g)) - g.center))
    assert abs(api - alt) <= 1e-14 * scale


@given(arrays(np.float64, st.integers(2, 12), elements=st.floats(-1, 1, width=64)),
       st.sampled_from(["min", "max"]))
def test_extremum_beats_dense_grid(half, kind):
    # oracle: a grid 64 times denser than the scan
    g = LinearPhasePrototype.from_half(half)
    a = amplitude_response(g, np.linspace(0, np.pi, 4096 * 64))
    _, val = amplitude_extremum(g, kind)
    if kind == "min":
        assert val <= a.min() + 1e-13
    else:
        assert val >= a.max() - 1e-13


def test_magnitude_examples():
    assert_allclose(frequency_response_magnitude([1.0], FrequencyGrid(4)), 1.0)
    assert frequency_response_magnitude([0.5, 0.5], [np.pi])[0] == pytest.approx(0, abs=1e-16)


@given(arrays(np.float64, st.integers(1, 32), elements=st.floats(-1, 1, width=64)))
def test_magnitude_squared_is_amplitude_of_autocorrelation(h):
    mag2 = frequency_response_magnitude(h) ** 2
    amp = amplitude_response(autocorrelation(h))
    assert np.max(np.abs(mag2 - amp)) <= 1e-12 * max(h @ h, 1e-300) + 1e-300


# -- zeros and minimum-phase diagnostics

def test_zeros_examples():
    assert_allclose(zeros([1.0, -0.5]), [0.5])
    assert_allclose(np.sort(zeros([1.0, 0.0, -0.25]).real), [-0.5, 0.5], atol=1e-15)
    assert zeros([2.0]).size == 0


def test_zeros_refusals():
    with pytest.raises(ValueError):
        zeros([0.0, 0.0])
    with pytest.raises(ValueError):
        zeros([0.0, 1.0])
    with pytest.raises(ValueError):
        zeros(np.ones(65))


def test_table3_is_minimum_phase(table3):
    assert np.max(np.abs(zeros(table3[0]))) <= 1 + 1e-8


def test_poly_from_zeros_roundtrip():
    z = np.array([0.5, -0.25 + 0.5j, -0.25 - 0.5j])
    h = poly_from_zeros(z, 2.0)
    assert_allclose(np.sort_complex(zeros(h)), np.sort_complex(z), atol=1e-12)


def test_energy_examples(table3):
    assert_array_equal(energy_concentration([1.0, 0.0]), [1.0, 1.0])
    assert_array_equal(energy_concentration([3.0, 1.0]), [9.0, 10.0])
    c = table3[0]
    assert np.all(energy_concentration(c) >= energy_concentration(c[::-1]) - 1e-15)


def test_reflection_preserves_magnitude():
    h = poly_from_zeros([0.5, 0.3 + 0.4j, 0.3 - 0.4j])
    r = reflect_zeros(h, [1, 2])
    assert_allclose(frequency_response_magnitude(r), frequency_response_magnitude(h), atol=1e-13)
    with pytest.raises(ValueError):
        reflect_zeros(h, [1])


@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_minimum_phase_dominates_any_reflection(seed, M):
    rng = np.random.default_rng(seed)
    h, z = minphase_from_zeros(rng, M)
    z = zeros(h)
    i = int(rng.integers(z.size))
    which = [i]
    if abs(z[i].imag) > 1e-9:
        which.append(int(np.argmin(np.abs(z - np.conj(z[i])) + (np.arange(z.size) == i))))
    r = reflect_zeros(h, which)
    scale = h @ h
    assert np.all(energy_concentration(h) >= energy_concentration(r) - 1e-10 * scale)
