"""Background-gas bath in the free-molecular (Epstein) regime."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .exceptions import ConfigError, DomainError
from .photonics import KB
from .scattering import ParticleSpec

MBAR = 100.0  # Pa

# molecular mass (kg) and kinetic diameter (m)
GASES = {
    "N2": (4.65e-26, 3.64e-10),
    "air": (4.81e-26, 3.66e-10),
    "He": (6.646e-27, 2.60e-10),
    "Ar": (6.634e-26, 3.40e-10),
}

DIFFUSE_EPSTEIN_FACTOR = 1.0 + math.pi / 8.0
# warn below this Knudsen number (mean free path / radius)
MIN_KNUDSEN = 10.0


class FreeMolecularWarning(UserWarning):
    """Gas too dense for the free-molecular drag law."""


@dataclass(frozen=True)
class GasState:
    """Residual gas: pressure in Pa, temperature in K, molecular mass in kg.

    ``epstein_factor`` multiplies the specular drag; the default is the
    diffuse-reflection value 1 + pi/8.
    """

    pressure: float = 5e-6
    temperature: float = 300.0
    molecular_mass: float = GASES["N2"][0]
    molecular_diameter: float = GASES["N2"][1]
    epstein_factor: float = DIFFUSE_EPSTEIN_FACTOR

    def __post_init__(self):
        if not self.pressure >= 0:
            raise DomainError("pressure must be non-negative")
        if not self.temperature > 0:
            raise DomainError("gas temperature must be positive")
        if not self.molecular_mass > 0:
            raise DomainError("molecular mass must be positive")

    @classmethod
    def from_mbar(cls, pressure_mbar: float, **kwargs) -> "GasState":
        return cls(pressure=pressure_mbar * MBAR, **kwargs)

    @classmethod
    def from_config(cls, cfg: Mapping) -> "GasState":
        name = cfg.get("gas", "N2")
        if name not in GASES:
            raise ConfigError(f"unknown gas {name!r}", "gas.gas")
        mass, diameter = GASES[name]
        return cls(
            pressure=float(cfg.get("pressure_mbar", 5e-8)) * MBAR,
            temperature=float(cfg.get("gas_temp_K", 300.0)),
            molecular_mass=float(cfg.get("molecular_mass_kg", mass)),
            molecular_diameter=diameter,
            epstein_factor=float(cfg.get("epstein_factor", DIFFUSE_EPSTEIN_FACTOR)),
        )

    @property
    def pressure_mbar(self) -> float:
        return self.pressure / MBAR

    @property
    def mean_free_path(self) -> float:
        if self.pressure == 0:
            return math.inf
        return KB * self.temperature / (math.sqrt(2.0) * math.pi * self.molecular_diameter**2 * self.pressure)

    def with_pressure(self, pressure: float) -> "GasState":
        return replace(self, pressure=pressure)


def gas_damping(particle: ParticleSpec, gas: GasState) -> float:
    """Epstein damping rate (1/s).

    gamma_g = 8 / (3 rho r) * sqrt(2 m_g / (pi k_B T_g)) * P_g * epstein_factor
    """
    knudsen = gas.mean_free_path / particle.radius
    if knudsen < MIN_KNUDSEN:
        warnings.warn(
            f"Knudsen number {knudsen:.3g} < {MIN_KNUDSEN:g}: free-molecular drag overestimates damping",
            FreeMolecularWarning,
            stacklevel=2,
        )
    thermal = math.sqrt(2.0 * gas.molecular_mass / (math.pi * KB * gas.temperature))
    return 8.0 / (3.0 * particle.density * particle.radius) * thermal * gas.pressure * gas.epstein_factor


def gas_heating_rate(gamma_g, gas_temperature, initial_temperature):
    """Linear-regime gas heating gamma_g (T_g - T_i) in K/s."""
    out = np.asarray(gamma_g, dtype=float) * (gas_temperature - np.asarray(initial_temperature, dtype=float))
    return out if out.ndim else float(out)


def radius_from_damping(gamma: float, gas: GasState, density: float = 2200.0) -> float:
    """Invert :func:`gas_damping` for the particle radius (m)."""
    if not gamma > 0:
        raise DomainError("damping rate must be positive")
    ref = ParticleSpec(radius=1e-6, density=density)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FreeMolecularWarning)
        return ref.radius * gas_damping(ref, gas) / gamma
