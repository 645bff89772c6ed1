import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from levikin.analysis import (
    LinearReheatModel,
    LorentzianPSDModel,
    NoiseScalingModel,
    PressureSweepModel,
    convert_pressure,
    linear_reheat_fit,
    lorentzian_fit,
    noise_scaling_fit,
    oscillator_psd,
    pressure_sweep_fit,
    relaxation_curve,
    relaxation_fit,
    welch_psd,
)
from levikin.dynamics import SimulationConfig, simulate
from levikin.environment import GasState, gas_damping
from levikin.exceptions import DomainError, FitError
from levikin.photonics import LightSourceSpec, shot_noise_psd
from levikin.scattering import ParticleSpec

MC_REPEATS = 1000


# -- PSD ---------------------------------------------------------------------


def test_white_noise_level():
    rng = np.random.default_rng(0)
    est = welch_psd(rng.standard_normal(2**18), 1e-3, n_segments=16)
    # variance / (fs / 2)
    assert est.psd[1:-1].mean() == pytest.approx(2e-3, rel=0.02)


def test_sinusoid_peak_power():
    dt, f0, A = 1e-4, 123.4, 0.7
    t = np.arange(2**18) * dt
    est = welch_psd(A * np.sin(2 * math.pi * f0 * t + 0.3), dt)
    assert est.power(f0 - 20, f0 + 20) == pytest.approx(A**2 / 2, rel=0.02)


def test_zero_series():
    est = welch_psd(np.zeros(1024), 1e-3)
    assert np.all(est.psd == 0)


def test_too_short_and_window():
    with pytest.raises(DomainError):
        welch_psd(np.ones(100), 1e-3, n_segments=8)
    with pytest.raises(DomainError):
        welch_psd(np.ones(4096), 1e-3, window="boxcar")


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.95), st.integers(2, 16))
def test_parseval(seed, ar, n_segments):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(2**18)
    x = np.empty_like(e)
    x[0] = e[0]
    for_ar = np.frompyfunc(lambda a, b: ar * a + b, 2, 1)
    x = for_ar.accumulate(e, dtype=object).astype(float)
    est = welch_psd(x, 1e-3, n_segments=n_segments)
    assert np.all(est.psd >= 0)
    assert est.power() == pytest.approx(np.mean(x**2), rel=0.01)


def test_parseval_on_simulated_trace():
    c = SimulationConfig(
        ParticleSpec(55e-9), LightSourceSpec.thermal(0.0, 1e-12), gas=GasState.from_mbar(5.0), duration=0.01,
        n_trajectories=2, initial_state="stationary",
    )
    q = simulate(c).positions[:, 0, :]
    assert welch_psd(q, c.dt).power() == pytest.approx(np.mean(q**2), rel=0.01)


# -- Lorentzian --------------------------------------------------------------


def _synthetic_psd(rng, gamma=1e3, w0=2 * math.pi * 1e3, k=16, background=0.0):
    f = np.arange(1, 4000) * 1.0
    w = 2 * math.pi * f
    true = oscillator_psd(w, w0, gamma, 1.0, background)
    # average of k exponential periodogram ordinates
    noisy = true * rng.gamma(k, 1.0 / k, size=f.size)
    return w, noisy


def test_lorentzian_synthetic_recovery():
    # 64 segments: the reported gamma error is about 0.6 %
    w, s = _synthetic_psd(np.random.default_rng(1), k=64)
    m = LorentzianPSDModel().fit(w, s)
    assert abs(m.gamma_ - 1e3) < 3 * math.sqrt(m.cov_[1, 1])
    assert m.gamma_ == pytest.approx(1e3, rel=0.02)
    assert m.omega0_ == pytest.approx(2 * math.pi * 1e3, rel=1e-3)
    assert m.predict(w).shape == w.shape


def test_lorentzian_with_background():
    w, s = _synthetic_psd(np.random.default_rng(2), background=1e-15)
    m = LorentzianPSDModel(fit_background=True).fit(w, s)
    assert m.gamma_ == pytest.approx(1e3, rel=0.03)
    assert m.background_ == pytest.approx(1e-15, rel=0.1)


def test_lorentzian_plateau_only_raises():
    rng = np.random.default_rng(3)
    f = np.arange(1, 2000) * 1.0
    with pytest.raises(FitError) as err:
        LorentzianPSDModel().fit(2 * math.pi * f, 1e-12 * rng.gamma(16, 1 / 16, f.size))
    assert err.value.diagnostics


def test_lorentzian_on_simulated_5mbar_trace():
    p = ParticleSpec(55e-9)
    c = SimulationConfig(
        p, LightSourceSpec.thermal(0.0, 1e-12), gas=GasState.from_mbar(5.0), duration=0.02,
        n_trajectories=4, initial_state="stationary", seed=9,
    )
    ens = simulate(c)
    gamma = gas_damping(p, c.gas)
    for q in range(3):
        fit = lorentzian_fit(welch_psd(ens.positions[:, q, :], c.dt))
        assert fit.gamma == pytest.approx(gamma, rel=0.05)
        assert fit.temperature(p.mass) == pytest.approx(300, rel=0.1)


def test_lorentzian_coverage():
    rng = np.random.default_rng(0)
    hits = 0
    for _ in range(MC_REPEATS):
        w, s = _synthetic_psd(rng)
        m = LorentzianPSDModel().fit(w, s)
        hits += abs(m.gamma_ - 1e3) <= math.sqrt(m.cov_[1, 1])
    assert hits / MC_REPEATS >= 0.68


# -- linear fit --------------------------------------------------------------


def test_linear_exact():
    t = np.linspace(0, 0.15, 20)
    fit = linear_reheat_fit(t, 0.05 + 0.5 * t)
    assert fit.a0 == pytest.approx(0.05, abs=1e-14)
    assert fit.a1 == pytest.approx(0.5, abs=1e-13)
    assert np.all(np.linalg.eigvalsh(fit.cov) >= -1e-30)


def test_linear_noise_slope_consistent_with_zero():
    rng = np.random.default_rng(4)
    t = np.linspace(0, 0.15, 150)
    fit = linear_reheat_fit(t, 0.05 + 0.01 * rng.standard_normal(t.size), np.full(t.size, 0.01))
    assert abs(fit.a1) < 2 * fit.a1_err


def test_linear_errors():
    with pytest.raises(DomainError):
        linear_reheat_fit(np.arange(4.0), np.arange(4.0))
    with pytest.raises(DomainError):
        linear_reheat_fit(np.arange(6.0), np.arange(6.0), np.zeros(6))
    with pytest.raises(DomainError):
        linear_reheat_fit(np.ones(6), np.arange(6.0))


def test_linear_coverage():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 0.15, 30)
    sigma = 0.02 * (1 + t)
    hits = 0
    for _ in range(MC_REPEATS):
        y = 0.05 + 0.5 * t + sigma * rng.standard_normal(t.size)
        fit = linear_reheat_fit(t, y, sigma)
        hits += abs(fit.a1 - 0.5) <= fit.a1_err
    assert hits / MC_REPEATS >= 0.68


# -- pressure sweep ----------------------------------------------------------

PRESSURES = np.array([5e-8, 1.5e-7, 5e-7, 1.5e-6, 5e-6, 1.5e-5])
A_PH = np.array([0.08, 0.45, 0.45])
A2 = 4e4  # K/s per mbar


def _sweep_data(rng, rel=0.05):
    truth = A_PH[None, :] + A2 * PRESSURES[:, None]
    err = rel * truth
    return truth + err * rng.standard_normal(truth.shape), err


def test_sweep_recovery_and_crossover():
    rates, err = _sweep_data(np.random.default_rng(5))
    fit = pressure_sweep_fit(PRESSURES, rates, err)
    assert abs(fit.a2 - A2) < 3 * fit.a2_err
    assert fit.crossover_pressure() == pytest.approx(0.45 / A2, rel=0.3)
    assert np.all(fit.a_ph >= 0)
    assert fit.a_ph[1] == fit.a_ph[2]


def test_sweep_intercepts_unit_invariant():
    rates, err = _sweep_data(np.random.default_rng(6))
    mbar = pressure_sweep_fit(PRESSURES, rates, err, unit="mbar")
    pa = pressure_sweep_fit(convert_pressure(PRESSURES, "mbar", "Pa"), rates, err, unit="Pa")
    np.testing.assert_allclose(pa.a_ph, mbar.a_ph, rtol=1e-8)
    assert pa.a2 * 100 == pytest.approx(mbar.a2, rel=1e-8)
    conv = mbar.in_unit("Pa")
    assert conv.a2 == pytest.approx(pa.a2, rel=1e-8)
    assert conv.crossover_pressure() == pytest.approx(100 * mbar.crossover_pressure(), rel=1e-8)


def test_sweep_nonnegative_intercepts():
    rng = np.random.default_rng(7)
    rates = A2 * PRESSURES[:, None] * np.ones(3) - 0.05 + 0.01 * rng.standard_normal((6, 3))
    fit = pressure_sweep_fit(PRESSURES, rates, grouping="none")
    assert np.all(fit.a_ph >= 0)
    assert fit.notes


def test_sweep_span_errors():
    with pytest.raises(FitError):
        pressure_sweep_fit([1e-7], np.ones((1, 3)))
    with pytest.raises(FitError):
        pressure_sweep_fit([1e-7, 2e-7, 5e-7], np.ones((3, 3)))


def test_sweep_coverage():
    rng = np.random.default_rng(0)
    hits = 0
    for _ in range(MC_REPEATS):
        rates, err = _sweep_data(rng)
        fit = pressure_sweep_fit(PRESSURES, rates, err)
        hits += abs(fit.a2 - A2) <= fit.a2_err
    assert hits / MC_REPEATS >= 0.68


# -- noise scaling -----------------------------------------------------------

POWERS = np.linspace(5.0, 130.0, 12)


@pytest.mark.parametrize("kind,exponent", [("laser", 1), ("thermal", 2)])
def test_noise_scaling_selects_exponent(kind, exponent):
    rng = np.random.default_rng(8)
    s = shot_noise_psd(POWERS, kind, 1e-3, 1e-4) * (1 + 0.03 * rng.standard_normal(POWERS.size))
    res = noise_scaling_fit(POWERS, s)
    assert res.exponent == exponent
    assert not res.ambiguous
    assert res.effective_exponent == pytest.approx(exponent, abs=0.25)


def test_noise_scaling_mixed_is_ambiguous():
    s = 1e-3 + 2e-4 * POWERS + 1.5e-6 * POWERS**2
    res = noise_scaling_fit(POWERS, s)
    assert res.ambiguous


def test_noise_scaling_needs_points():
    with pytest.raises(DomainError):
        noise_scaling_fit(POWERS[:4], POWERS[:4])


# -- relaxation --------------------------------------------------------------


def test_relaxation_fit_recovers():
    rng = np.random.default_rng(9)
    t = np.linspace(0, 25, 125)
    truth = relaxation_curve(t, 0.63, 220.0, 1.0)
    err = 0.005 * truth + 0.01
    fit = relaxation_fit(t, truth + err * rng.standard_normal(t.size), err)
    assert fit.gamma == pytest.approx(0.63, rel=0.01)
    assert fit.T_inf == pytest.approx(220.0, rel=0.01)


# -- estimator protocol ------------------------------------------------------


@pytest.mark.parametrize("model", [LorentzianPSDModel(band=3.0), LinearReheatModel(), PressureSweepModel("none"), NoiseScalingModel()])
def test_estimators_clone_and_unfitted(model):
    c = clone(model)
    assert c.get_params() == model.get_params()
    with pytest.raises(NotFittedError):
        c.predict(np.ones(3))
