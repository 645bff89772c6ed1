import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from levikin.exceptions import DomainError, UnsupportedOperationError
from levikin.photonics import (
    C_LIGHT,
    HBAR,
    KB,
    GaussianGain,
    LightSourceSpec,
    SourceKind,
    emission_band,
    focal_intensity,
    mean_occupation,
    photon_number_variance,
    shot_noise_psd,
    spectral_intensity,
    wavelength_to_omega,
)

mp.mp.dps = 40


@pytest.fixture
def sld():
    return LightSourceSpec.thermal(0.130, 1e-12)


def _mp_nbar(wavelength_nm, mu_nm=1115, T=300):
    hbar, c, k = mp.mpf(HBAR), mp.mpf(C_LIGHT), mp.mpf(KB)
    w = 2 * mp.pi * c / (mp.mpf(wavelength_nm) * mp.mpf("1e-9"))
    mu = hbar * 2 * mp.pi * c / (mp.mpf(mu_nm) * mp.mpf("1e-9"))
    return 1 / (mp.exp((hbar * w - mu) / (k * T)) - 1)


def test_occupation_ln2_gives_one(sld):
    w = (sld.chemical_potential + KB * 300 * math.log(2)) / HBAR
    assert mean_occupation(w, sld) == pytest.approx(1.0, rel=1e-12)


def test_occupation_band_edge_oracle(sld):
    # independent 40-digit evaluation; frozen value 0.594557...
    ref = float(_mp_nbar(1090))
    assert ref == pytest.approx(0.594557, abs=5e-6)
    assert mean_occupation(sld.cutoff_frequency, sld) == pytest.approx(ref, rel=1e-12)


def test_occupation_tail_vanishes(sld):
    assert mean_occupation(1e3 * sld.cutoff_frequency, sld) == 0.0


def test_occupation_rejects_laser_and_below_mu(sld):
    with pytest.raises(UnsupportedOperationError):
        mean_occupation(1e15, LightSourceSpec.laser(0.1, 1e-12))
    with pytest.raises(DomainError):
        mean_occupation(0.99 * sld.chemical_potential / HBAR, sld)


def test_occupation_monotone(sld):
    w = np.linspace(sld.cutoff_frequency, 1.2 * sld.cutoff_frequency, 200)
    n = mean_occupation(w, sld)
    assert np.all(np.diff(n) < 0)
    temps = np.linspace(200, 400, 20)
    nT = [mean_occupation(sld.cutoff_frequency, sld.with_temperature(t)) for t in temps]
    assert np.all(np.diff(nT) > 0)


def test_variance_examples():
    assert photon_number_variance(0.0, "thermal") == 0.0
    assert photon_number_variance(0.0, "laser") == 0.0
    assert photon_number_variance(1.0, SourceKind.THERMAL) == 2.0
    assert photon_number_variance(1.0, SourceKind.LASER) == 1.0
    assert photon_number_variance(0.594, "thermal") == pytest.approx(0.594 + 0.594**2)
    with pytest.raises(DomainError):
        photon_number_variance(-0.1, "thermal")


# below ~2e-16 the n^2 term is lost to rounding and the two coincide
@given(st.one_of(st.just(0.0), st.floats(1e-15, 1e6)))
def test_thermal_variance_dominates(n):
    th = photon_number_variance(n, "thermal")
    la = photon_number_variance(n, "laser")
    assert th >= la
    assert (th == la) == (n == 0)


def test_construction_invariants():
    with pytest.raises(DomainError):
        LightSourceSpec.thermal(0.1, 1e-12, mu_wavelength=1080e-9, cutoff_wavelength=1090e-9)
    with pytest.raises(DomainError):
        LightSourceSpec.thermal(0.1, 0.0)
    with pytest.raises(DomainError):
        LightSourceSpec.thermal(-0.1, 1e-12)
    with pytest.raises(DomainError):
        LightSourceSpec.thermal(0.1, 1e-12, bulk_temperature=0.0)


def test_spectral_intensity_zero_below_cutoff(sld):
    assert spectral_intensity(0.999 * sld.cutoff_frequency, sld) == 0.0


def test_spectral_ratio_constant_gain(sld):
    w1, w2 = sld.cutoff_frequency * 1.001, sld.cutoff_frequency * 1.01
    expected = (w1**3 * mean_occupation(w1, sld)) / (w2**3 * mean_occupation(w2, sld))
    assert spectral_intensity(w1, sld) / spectral_intensity(w2, sld) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("gain", [None, GaussianGain.from_wavelength(1060e-9, 30e-9)])
def test_spectral_intensity_normalised_to_power(gain):
    src = LightSourceSpec.thermal(0.130, 1e-12, gain=gain)
    lo, hi = emission_band(src)
    # fine trapezoid, independent of the Gauss-Legendre normalisation
    w = np.linspace(lo, hi, 400001)
    total = integrate.trapezoid(spectral_intensity(w, src), w)
    assert total * src.waist_area == pytest.approx(src.focal_power, rel=1e-6)


def test_gaussian_gain_fwhm():
    g = GaussianGain.from_wavelength(1060e-9, 30e-9)
    lo, hi = wavelength_to_omega(1075e-9), wavelength_to_omega(1045e-9)
    assert g(g.center) == pytest.approx(1.0)
    assert 2 * g.stddev * math.sqrt(2 * math.log(2)) == pytest.approx(hi - lo, rel=1e-12)


def test_focal_intensity():
    assert focal_intensity(LightSourceSpec.thermal(0.130, 1e-12)) == pytest.approx(1.3e11)
    assert focal_intensity(LightSourceSpec.thermal(0.0, 1e-12)) == 0.0
    a = focal_intensity(LightSourceSpec.laser(0.1, 1e-12))
    b = focal_intensity(LightSourceSpec.laser(0.1, 2e-12))
    assert b == pytest.approx(a / 2)


def test_shot_noise_examples():
    assert shot_noise_psd(0.0, "thermal", 3.0, 5.0) == 3.0
    for kind, factor in (("thermal", 4.0), ("laser", 2.0)):
        above1 = shot_noise_psd(0.2, kind, 1.0, 7.0) - 1.0
        above2 = shot_noise_psd(0.4, kind, 1.0, 7.0) - 1.0
        assert above2 / above1 == pytest.approx(factor)


@pytest.mark.parametrize("kind,slope", [("laser", 1.0), ("thermal", 2.0)])
def test_shot_noise_log_slope(kind, slope):
    p = np.array([1e3, 2e3])
    s = shot_noise_psd(p, kind, 1e-6, 1.0) - 1e-6
    # above the floor, slope of log(S - a) vs log(P)
    measured = np.diff(np.log(s)) / np.diff(np.log(p))
    assert measured[0] == pytest.approx(slope, abs=1e-3)


@settings(max_examples=50, deadline=None)
@given(st.floats(250.0, 400.0), st.floats(1e-3, 0.2))
def test_spectral_quadrature_ratio_scales(T, dw):
    src = LightSourceSpec.thermal(0.1, 1e-12, bulk_temperature=T)
    w1 = src.cutoff_frequency
    w2 = w1 * (1 + dw)
    x1 = (HBAR * w1 - src.chemical_potential) / (KB * T)
    x2 = (HBAR * w2 - src.chemical_potential) / (KB * T)
    expected = (w1 / w2) ** 3 * math.expm1(x2) / math.expm1(x1)
    assert spectral_intensity(w1, src) / spectral_intensity(w2, src) == pytest.approx(expected, rel=1e-10)
