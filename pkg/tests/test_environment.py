import math

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levikin.environment import (
    GASES,
    FreeMolecularWarning,
    GasState,
    gas_damping,
    gas_heating_rate,
    radius_from_damping,
)
from levikin.exceptions import ConfigError, DomainError
from levikin.photonics import KB
from levikin.scattering import ParticleSpec

P55 = ParticleSpec(55e-9)


def _mp_damping(radius, pressure_pa, T=300, rho=2200):
    m = mp.mpf(GASES["N2"][0])
    return (
        8 / (3 * mp.mpf(rho) * mp.mpf(radius))
        * mp.sqrt(2 * m / (mp.pi * mp.mpf(KB) * T))
        * mp.mpf(pressure_pa)
        * (1 + mp.pi / 8)
    )


def test_zero_pressure():
    assert gas_damping(P55, GasState(pressure=0.0)) == 0.0


def test_damping_oracle():
    g = GasState.from_mbar(5e-8)
    assert gas_damping(P55, g) == pytest.approx(float(_mp_damping(55e-9, 5e-6)), rel=1e-12)
    # frozen: the Epstein gas offset gamma_g T_g at 5e-8 mbar
    assert gas_damping(P55, g) * 300 == pytest.approx(0.123082, rel=1e-5)


def test_damping_at_5_mbar_in_range():
    gamma = gas_damping(P55, GasState.from_mbar(5.0))
    assert 1e3 <= gamma <= 1e5
    assert gamma == pytest.approx(41027, rel=1e-3)


@given(st.floats(1e-10, 1e-1), st.floats(10e-9, 200e-9))
def test_linear_in_pressure_inverse_in_radius(p_mbar, r):
    p = ParticleSpec(r)
    g1 = gas_damping(p, GasState.from_mbar(p_mbar))
    g2 = gas_damping(p, GasState.from_mbar(2 * p_mbar))
    assert g2 == pytest.approx(2 * g1, rel=1e-14)
    assert gas_damping(ParticleSpec(2 * r), GasState.from_mbar(p_mbar)) == pytest.approx(g1 / 2, rel=1e-14)


def test_free_molecular_warning():
    with pytest.warns(FreeMolecularWarning):
        gas_damping(P55, GasState.from_mbar(1000.0))


def test_mean_free_path():
    assert GasState.from_mbar(5e-8).mean_free_path == pytest.approx(1407, rel=1e-3)
    assert math.isinf(GasState(pressure=0.0).mean_free_path)


def test_heating_rate_examples():
    assert gas_heating_rate(1e-3, 300.0, 300.0) == 0.0
    assert gas_heating_rate(1e-3, 300.0, 0.0) == pytest.approx(0.3)
    assert gas_heating_rate(6e-5, 300.0, 0.0) == pytest.approx(0.018)


def test_radius_roundtrip():
    g = GasState.from_mbar(5.0)
    assert radius_from_damping(gas_damping(P55, g), g) == pytest.approx(55e-9, rel=1e-12)
    with pytest.raises(DomainError):
        radius_from_damping(0.0, g)


def test_invariants_and_config():
    with pytest.raises(DomainError):
        GasState(pressure=-1.0)
    with pytest.raises(DomainError):
        GasState(temperature=0.0)
    g = GasState.from_config({"pressure_mbar": 5e-8, "gas_temp_K": 300, "gas": "N2"})
    assert g.pressure == pytest.approx(5e-6)
    assert g.pressure_mbar == pytest.approx(5e-8)
    with pytest.raises(ConfigError):
        GasState.from_config({"gas": "Xe"})
