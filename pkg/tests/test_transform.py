import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from minphase.gramian import NotPositiveDefinite, build_allpass
from minphase.signal_core import FrequencyGrid, energy_concentration, zeros
from minphase.conversion import MmseConfig, mmse_transform, spectral_equality_check, transform

from conftest import minphase_from_zeros


def test_already_minimum_phase():
    r = transform([3.0, 1.0])
    assert_allclose(r.c.taps, [3.0, 1.0], atol=1e-12)
    assert r.spectral_error <= 1e-12


def test_maximum_phase_input():
    assert_allclose(transform([1.0, 3.0]).c.taps, [3.0, 1.0], atol=1e-12)


def test_single_tap():
    r = transform([-2.0])
    assert_allclose(np.abs(r.c.taps), [2.0])


def test_rand10(rand10):
    r = transform(rand10)
    assert len(r.c) == 10
    assert r.residual.norm <= 1e-14
    assert np.max(np.abs(zeros(r.c))) <= 1 + 1e-8
    assert r.spectral_error <= 1e-10
    assert np.all(energy_concentration(r.c) >= energy_concentration(rand10) - 1e-12)
    d = r.to_dict()
    assert len(d["zeros"]) == 9 and d["max_zero_modulus"] < 1


def test_idempotent(rand10):
    c = transform(rand10).c
    assert_allclose(transform(c).c.taps, c.taps, atol=1e-10)


def test_reversal_gives_same_factor(rand10):
    assert_allclose(transform(rand10[::-1]).c.taps, transform(rand10).c.taps, atol=1e-9)


@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_energy_dominance_random(seed, M):
    rng = np.random.default_rng(seed)
    h = rng.uniform(-1, 1, M)
    r = transform(h)
    assert np.all(energy_concentration(r.c) >= energy_concentration(h) - 1e-9 * (h @ h))


def test_prefilter_reproduces_factor(rand10):
    M = rand10.size
    for Q in (20 * M, 40 * M):
        r = transform(rand10, Q=Q)
        f = r.f_taps
        rebuilt = np.array([f[: M - i] @ rand10[i:] for i in range(M)])
        assert np.max(np.abs(rebuilt - r.c.taps)) <= 1e-8


def test_prefilter_full_convolution(rand10):
    r = transform(rand10, Q=200)
    y = np.convolve(r.f_taps[::-1], rand10)
    n = r.f_taps.size
    assert_allclose(y[n - 1:n - 1 + 10], r.c.taps, atol=1e-8)
    assert np.max(np.abs(y[: n - 1])) <= 1e-8


def test_symmetry_row_is_anticausal(rand10):
    F = build_allpass(rand10, 200)
    row = F.row(F.symmetry_index)
    assert np.max(np.abs(row[F.symmetry_index + F.length:])) <= 1e-12


def test_breakdown_carries_lift_guidance(monkeypatch):
    import minphase.conversion as tr

    def broken(h, Q):
        raise NotPositiveDefinite(3, -1e-18)

    monkeypatch.setattr(tr, "build_allpass", broken)
    with pytest.raises(NotPositiveDefinite, match="lift"):
        tr.transform([1.0, 1.0])


def test_unit_circle_zero_still_factors():
    # finite Gramians of an autocorrelation stay positive definite
    r = transform([1.0, 1.0])
    assert r.spectral_error < 1e-6


# -- spectral equality

def test_spectral_equality_examples(rand10):
    assert spectral_equality_check(rand10, rand10) == 0.0
    assert spectral_equality_check(rand10, rand10[::-1]) <= 1e-13
    with pytest.raises(ValueError):
        spectral_equality_check([1.0], [1.0, 2.0])


def test_spectral_equality_grid_env(monkeypatch):
    monkeypatch.setenv("MINPHASE_GRID", "3")
    # Nyquist is on every grid, and there [1, 1] has a null
    assert spectral_equality_check([1.0, 1.0], [1.0, 0.0]) == pytest.approx(1.0)


# -- MMSE baseline

def test_mmse_trivial():
    r = mmse_transform([1.0], MmseConfig(5, 1e-4))
    assert_allclose(r.c.taps, [1.0])
    assert_allclose(r.f_taps[1:], 0.0, atol=1e-15)
    assert r.f_taps[0] > 0


def test_mmse_close_to_factor_at_low_noise():
    r = mmse_transform([3.0, 1.0], MmseConfig(40, 1e-6))
    assert_allclose(r.c.taps, [3.0, 1.0], atol=1e-3)
    assert r.residual.norm > 0


def test_mmse_gap(rand10):
    mm = mmse_transform(rand10, MmseConfig(100, 1e-4))
    fac = transform(rand10)
    assert mm.residual.norm >= 1e-6
    assert mm.residual.norm >= 1e6 * fac.residual.norm
    assert mm.spectral_error > fac.spectral_error


def test_mmse_defaults(rand10):
    cfg = MmseConfig()
    assert cfg.sigma2 == 1e-4 and cfg.length_for(10) == 100
    assert mmse_transform(rand10).f_taps.size == 100


def test_mmse_config_validation():
    with pytest.raises(ValueError):
        MmseConfig(0)
    with pytest.raises(ValueError):
        MmseConfig(10, -1.0)
    with pytest.raises(ValueError):
        MmseConfig(3).length_for(5)


def test_mmse_singular_system():
    with pytest.raises(np.linalg.LinAlgError):
        mmse_transform([0.0, 1.0], MmseConfig(10, 0.0))


def test_mmse_noise_increases_bias():
    h = [0.5, 1.0]  # zero at -2, so the feedforward part must invert it
    lo = mmse_transform(h, MmseConfig(40, 1e-6)).residual.norm
    hi = mmse_transform(h, MmseConfig(40, 1e-2)).residual.norm
    assert hi > lo
