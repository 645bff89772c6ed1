"""Rayleigh scattering, photon-recoil heating and Doppler damping.

Axes follow the trap convention: ``x`` is parallel to the light polarisation,
``z`` is the propagation direction of the trapping beam. Incident photons
arrive uniformly (in solid angle) from a cone of half-angle ``theta_max``
around ``z``; scattered photons follow the dipole pattern of an
x-polarised point dipole.

Rates are returned normalised by ``k_B`` (K/s), the way reheating data are
reported.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
from scipy import optimize

from .exceptions import (
    ConvergenceError,
    DomainError,
    RegimeError,
    SingularRegimeError,
)
from .photonics import (
    C_LIGHT,
    HBAR,
    KB,
    LightSourceSpec,
    emission_band,
    focal_intensity,
    gauss_legendre,
    mean_occupation,
    photon_number_variance,
    spectral_normalization,
)

AXES = ("x", "y", "z")
DOPPLER_SPEED_LIMIT = 1e-3 * C_LIGHT
CONVERGENCE_TOLERANCE = 0.05
# smallest (hbar w_c - mu_c)/k_B T accepted before the prefactor is treated as singular
SINGULAR_DETUNING = 1e-6


class RayleighWarning(UserWarning):
    """Particle too large for the point-dipole approximation."""


def axis_index(axis) -> int:
    if isinstance(axis, str):
        try:
            return AXES.index(axis.lower())
        except ValueError:
            raise DomainError(f"unknown axis {axis!r}") from None
    idx = int(axis)
    if idx not in (0, 1, 2):
        raise DomainError(f"axis index out of range: {axis!r}")
    return idx


@dataclass(frozen=True)
class ParticleSpec:
    """Homogeneous dielectric sphere (fused silica by default)."""

    radius: float
    density: float = 2200.0
    refractive_index: float = 1.45

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("radius must be positive")
        if not self.density > 0:
            raise DomainError("density must be positive")
        if not self.refractive_index > 1:
            raise DomainError("refractive index must exceed 1")

    @classmethod
    def from_config(cls, cfg: Mapping) -> "ParticleSpec":
        return cls(
            radius=float(cfg.get("radius_nm", 55.0)) * 1e-9,
            density=float(cfg.get("density_kg_m3", 2200.0)),
            refractive_index=float(cfg.get("refractive_index", 1.45)),
        )

    @property
    def mass(self) -> float:
        return 4.0 / 3.0 * math.pi * self.radius**3 * self.density

    @property
    def polarizability_volume(self) -> float:
        """Clausius-Mossotti polarisability r^3 (n^2-1)/(n^2+2), m^3."""
        n2 = self.refractive_index**2
        return self.radius**3 * (n2 - 1.0) / (n2 + 2.0)

    def with_radius(self, radius: float) -> "ParticleSpec":
        return replace(self, radius=radius)


@dataclass(frozen=True)
class TrapConfig:
    """Trap frequencies (rad/s, x/y/z) and incidence-cone half-angle."""

    frequencies: tuple = (2 * math.pi * 100e3, 2 * math.pi * 120e3, 2 * math.pi * 35e3)
    theta_max: float = 0.43
    numerical_aperture: float = 0.77

    def __post_init__(self):
        freqs = tuple(float(f) for f in self.frequencies)
        if len(freqs) != 3 or not all(f > 0 for f in freqs):
            raise DomainError("need three positive trap frequencies")
        object.__setattr__(self, "frequencies", freqs)
        if not 0.0 <= self.theta_max < math.pi / 2:
            raise DomainError("theta_max must lie in [0, pi/2)")

    @classmethod
    def from_config(cls, cfg: Mapping) -> "TrapConfig":
        freqs = cfg.get("freq_kHz", [100.0, 120.0, 35.0])
        return cls(
            frequencies=tuple(2 * math.pi * 1e3 * float(f) for f in freqs),
            theta_max=float(cfg.get("theta_max_rad", 0.43)),
            numerical_aperture=float(cfg.get("numerical_aperture", 0.77)),
        )

    @property
    def omega(self) -> np.ndarray:
        return np.asarray(self.frequencies)

    def scaled(self, factor: float) -> "TrapConfig":
        return replace(self, frequencies=tuple(f * factor for f in self.frequencies))


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts of the tensor-product Gauss-Legendre rule."""

    n_omega: int = 64
    n_theta_i: int = 16
    n_phi_i: int = 16
    n_theta_s: int = 32
    n_phi_s: int = 32

    def __post_init__(self):
        for name in ("n_omega", "n_theta_i", "n_phi_i", "n_theta_s", "n_phi_s"):
            if int(getattr(self, name)) < 2:
                raise DomainError(f"{name} must be at least 2")

    @classmethod
    def from_config(cls, cfg: Mapping | None) -> "QuadratureSpec":
        return cls(**dict(cfg or {}))

    def refined(self) -> "QuadratureSpec":
        """Twice the nodes in every dimension."""
        return QuadratureSpec(*(2 * n for n in self.as_tuple()))

    def coarsened(self) -> "QuadratureSpec":
        """Half the nodes in every dimension (at least 2)."""
        return QuadratureSpec(*(max(2, n // 2) for n in self.as_tuple()))

    def as_tuple(self):
        return (self.n_omega, self.n_theta_i, self.n_phi_i, self.n_theta_s, self.n_phi_s)


@dataclass
class HeatingRates:
    gamma_ph: np.ndarray
    dTdt: np.ndarray
    method: str
    convergence: float | None = None
    grid: QuadratureSpec | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def ratios(self) -> np.ndarray:
        return self.dTdt / self.dTdt[0] if self.dTdt[0] > 0 else np.full(3, np.nan)

    def as_rows(self):
        """CSV rows: axis, gamma_ph_per_s, dTdt_K_per_s, ratio_to_x, method."""
        ratios = self.ratios
        return [
            (AXES[i], float(self.gamma_ph[i]), float(self.dTdt[i]), float(ratios[i]), self.method)
            for i in range(3)
        ]


def cross_section(omega, particle: ParticleSpec):
    """Rayleigh scattering cross section (8 pi / 3) k^4 alpha'^2 in m^2."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise DomainError("frequency must be non-negative")
    k = omega / C_LIGHT
    if np.any(k * particle.radius >= 1.0):
        warnings.warn("particle radius exceeds lambda/2pi; Rayleigh limit is marginal", RayleighWarning, stacklevel=2)
    out = 8.0 * math.pi / 3.0 * k**4 * particle.polarizability_volume**2
    return out if out.ndim else float(out)


def dipole_pattern(theta_s, phi_s):
    """Angular distribution of photons scattered by an x-oriented dipole (1/sr)."""
    theta_s = np.asarray(theta_s, dtype=float)
    phi_s = np.asarray(phi_s, dtype=float)
    out = 3.0 / (8.0 * math.pi) * (np.cos(theta_s) ** 2 * np.cos(phi_s) ** 2 + np.sin(phi_s) ** 2)
    return out if out.ndim else float(out)


def _unit_vectors(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def incident_block(theta_max: float, n_theta: int, n_phi: int):
    """Incident directions and weights averaging uniformly over the cone.

    Weights sum to one (they carry ``sin(theta) / Omega_mx``). A zero
    half-angle collapses to the plane wave along ``z``.
    """
    # below 1e-8 rad the cone correction (order theta^2) is lost to rounding
    if theta_max < 1e-8:
        return np.array([[0.0, 0.0, 1.0]]), np.array([1.0])
    th, wt = gauss_legendre(n_theta, 0.0, theta_max)
    ph, wp = gauss_legendre(n_phi, 0.0, 2.0 * math.pi)
    T, P = np.meshgrid(th, ph, indexing="ij")
    solid_angle = 4.0 * math.pi * math.sin(theta_max / 2.0) ** 2
    w = (wt[:, None] * np.sin(th)[:, None] * wp[None, :]) / solid_angle
    return _unit_vectors(T, P).reshape(-1, 3), w.reshape(-1)


def scattered_block(n_theta: int, n_phi: int):
    """Scattered directions and weights ``P_r sin(theta) dtheta dphi``."""
    th, wt = gauss_legendre(n_theta, 0.0, math.pi)
    ph, wp = gauss_legendre(n_phi, 0.0, 2.0 * math.pi)
    T, P = np.meshgrid(th, ph, indexing="ij")
    w = wt[:, None] * np.sin(th)[:, None] * wp[None, :] * dipole_pattern(T, P)
    return _unit_vectors(T, P).reshape(-1, 3), w.reshape(-1)


def angular_recoil_moments(theta_max: float, grid: QuadratureSpec | None = None) -> np.ndarray:
    """Cone- and dipole-averaged squared recoil ``<(Theta_i + Theta_s)_q^2>``.

    Evaluated on the full four-dimensional angular grid, cross terms included.
    """
    grid = grid or QuadratureSpec()
    di, wi = incident_block(theta_max, grid.n_theta_i, grid.n_phi_i)
    ds, ws = scattered_block(grid.n_theta_s, grid.n_phi_s)
    weight = wi[:, None] * ws[None, :]
    out = np.empty(3)
    for q in range(3):
        recoil = di[:, q][:, None] + ds[:, q][None, :]
        out[q] = np.sum(weight * recoil * recoil)
    return out


def lambda_coefficients(theta_max: float = 0.43, grid: QuadratureSpec | None = None) -> np.ndarray:
    """Geometric projection factors Lambda^q, normalised to sum to one."""
    if not 0.0 <= theta_max < math.pi / 2:
        raise DomainError("theta_max must lie in [0, pi/2)")
    moments = angular_recoil_moments(theta_max, grid)
    return moments / moments.sum()


def bose_prefactor(src: LightSourceSpec) -> float:
    """1 / (1 - exp[(mu_c - hbar w_c)/k_B T]), i.e. 1 + nbar(w_c)."""
    src._require_thermal("bose_prefactor")
    delta = src.edge_detuning
    if delta < SINGULAR_DETUNING:
        raise SingularRegimeError(
            f"mu_c is within {delta:.2e} k_B T of hbar*omega_c; the photon-condensate limit is not modelled"
        )
    return -1.0 / math.expm1(-delta)


def photon_damping(particle: ParticleSpec, src: LightSourceSpec, trap: TrapConfig, axis=None):
    """gamma_ph^q = Lambda^q sigma I / (M c^2) times hbar w_c / k_B T for thermal light.

    For a laser the thermal enhancement factor is one and sigma is taken at
    the laser frequency. Returns all three axes unless ``axis`` is given.
    """
    lam = lambda_coefficients(trap.theta_max)
    omega_ref = src.reference_frequency
    base = lam * cross_section(omega_ref, particle) * focal_intensity(src) / (particle.mass * C_LIGHT**2)
    if src.is_thermal:
        base = base * HBAR * omega_ref / (KB * src.bulk_temperature)
    return base if axis is None else float(base[axis_index(axis)])


def recoil_heating_closed_form(particle: ParticleSpec, src: LightSourceSpec, trap: TrapConfig) -> HeatingRates:
    """Per-axis recoil heating from the narrow-band closed form.

    Thermal: dT/dt = gamma_ph T / (1 - exp[(mu_c - hbar w_c)/k_B T]).
    Laser: dT/dt = gamma_ph hbar w_L / k_B.
    """
    gamma = photon_damping(particle, src, trap)
    if src.is_thermal:
        dTdt = gamma * src.bulk_temperature * bose_prefactor(src)
    else:
        dTdt = gamma * HBAR * src.laser_frequency / KB
    return HeatingRates(gamma_ph=gamma, dTdt=dTdt, method="closed_form")


def _heating_quadrature_once(particle, src, trap, grid: QuadratureSpec) -> np.ndarray:
    moments = angular_recoil_moments(trap.theta_max, grid)
    mass = particle.mass
    if not src.is_thermal:
        w = src.laser_frequency
        photon_flux = focal_intensity(src) / (HBAR * w)
        recoil = (HBAR * w / C_LIGHT) ** 2
        return photon_flux * cross_section(w, particle) * recoil * moments / (2.0 * mass) / KB
    lo, hi = emission_band(src)
    nodes, weights = gauss_legendre(grid.n_omega, lo, hi)
    nbar = mean_occupation(nodes, src)
    k = nodes / C_LIGHT
    spectral = (
        src.gain(nodes)
        * cross_section(nodes, particle)
        * nodes**2
        * photon_number_variance(nbar, src.kind)
        / (math.pi**2 * C_LIGHT**2)
        * (HBAR * k) ** 2
    )
    # integrand is (spectral factor) x (angular factor): the 5-D tensor sum factorises
    omega_sum = float(np.sum(weights * spectral))
    return spectral_normalization(src) * omega_sum * moments / (2.0 * mass) / KB


def recoil_heating_quadrature(
    particle: ParticleSpec,
    src: LightSourceSpec,
    trap: TrapConfig,
    grid: QuadratureSpec | None = None,
    check_convergence: bool = True,
) -> HeatingRates:
    """Per-axis recoil heating by tensor-product Gauss-Legendre quadrature.

    Integrates photon-number fluctuations over frequency, incident cone and
    dipole scattering pattern. The convergence estimate is the largest
    relative change against a grid with half the nodes per dimension.

    Raises
    ------
    ConvergenceError
        If the convergence estimate exceeds 5 %.
    """
    grid = grid or QuadratureSpec()
    dTdt = _heating_quadrature_once(particle, src, trap, grid)
    convergence = None
    if check_convergence:
        coarse = _heating_quadrature_once(particle, src, trap, grid.coarsened())
        convergence = float(np.max(np.abs(dTdt - coarse) / np.abs(dTdt)))
        if convergence > CONVERGENCE_TOLERANCE:
            raise ConvergenceError(
                f"quadrature not converged ({convergence:.2%} change against half grid)",
                {"grid": grid.as_tuple(), "fine": dTdt.tolist(), "coarse": coarse.tolist()},
            )
    # gamma_ph is the closed-form coefficient; it does not depend on the grid
    gamma = photon_damping(particle, src, trap)
    return HeatingRates(gamma_ph=gamma, dTdt=dTdt, method="quadrature", convergence=convergence, grid=grid)


def _occupation_shift(x, shift):
    # nbar(x + shift) - nbar(x), free of cancellation for tiny shifts
    return -np.exp(x) * np.expm1(shift) / (np.expm1(x + shift) * np.expm1(x))


def doppler_force(
    velocity: Sequence[float],
    particle: ParticleSpec,
    src: LightSourceSpec,
    trap: TrapConfig,
    grid: QuadratureSpec | None = None,
) -> np.ndarray:
    """Velocity-dependent radiation force of thermal light (N).

    Each incident or scattered photon is weighted by the Bose occupation at
    its Doppler-shifted frequency ``w (1 + v.Theta / c)``. The static
    radiation pressure (the value at ``v = 0``) is subtracted.

    Raises
    ------
    RegimeError
        If ``|v|`` exceeds 1e-3 c.
    """
    src._require_thermal("doppler_force")
    grid = grid or QuadratureSpec()
    v = np.asarray(velocity, dtype=float).reshape(3)
    if np.linalg.norm(v) > DOPPLER_SPEED_LIMIT:
        raise RegimeError("Doppler force requires |v| <= 1e-3 c")
    lo, hi = emission_band(src)
    nodes, weights = gauss_legendre(grid.n_omega, lo, hi)
    di, wi = incident_block(trap.theta_max, grid.n_theta_i, grid.n_phi_i)
    ds, ws = scattered_block(grid.n_theta_s, grid.n_phi_s)
    kT = KB * src.bulk_temperature
    x = (HBAR * nodes - src.chemical_potential) / kT
    energy = HBAR * nodes / kT
    beta_i = di @ v / C_LIGHT
    beta_s = ds @ v / C_LIGHT
    dn_i = _occupation_shift(x[:, None], energy[:, None] * beta_i[None, :])
    dn_s = _occupation_shift(x[:, None], energy[:, None] * beta_s[None, :])
    incident = (dn_i * wi[None, :]) @ di * ws.sum()
    scattered = (dn_s * ws[None, :]) @ ds * wi.sum()
    spectral = (
        src.gain(nodes) * cross_section(nodes, particle) * nodes**2 / (math.pi**2 * C_LIGHT**2) * HBAR * nodes / C_LIGHT
    )
    force = spectral_normalization(src) * ((weights * spectral)[:, None] * (incident + scattered)).sum(axis=0)
    return force


def doppler_damping(particle: ParticleSpec, src: LightSourceSpec, trap: TrapConfig) -> np.ndarray:
    """Linearised photon damping Gamma^q with F_q = -M Gamma^q v_q (1/s).

    Thermal: 2 gamma_ph / (1 - exp[(mu_c - hbar w_c)/k_B T]); laser: 2 gamma_ph.
    """
    gamma = photon_damping(particle, src, trap)
    return 2.0 * gamma * (bose_prefactor(src) if src.is_thermal else 1.0)


def doppler_damping_quadrature(
    particle: ParticleSpec,
    src: LightSourceSpec,
    trap: TrapConfig,
    grid: QuadratureSpec | None = None,
    step: float = 1e-3,
) -> np.ndarray:
    """Gamma^q from a central difference of :func:`doppler_force` at v = 0."""
    out = np.empty(3)
    for q in range(3):
        dv = np.zeros(3)
        dv[q] = step
        slope = (doppler_force(dv, particle, src, trap, grid)[q] - doppler_force(-dv, particle, src, trap, grid)[q]) / (
            2 * step
        )
        out[q] = -slope / particle.mass
    return out


def equilibrium_temperature(src) -> float:
    """Motional temperature set by the photon bath alone: T / 2.

    Accepts a thermal :class:`LightSourceSpec` or a bulk temperature in K.
    """
    if isinstance(src, LightSourceSpec):
        bose_prefactor(src)  # rejects laser and the singular regime
        return src.bulk_temperature / 2.0
    temperature = float(src)
    if temperature < 0:
        raise DomainError("temperature must be non-negative")
    return temperature / 2.0


def equilibrium_temperature_balance(
    particle: ParticleSpec,
    src: LightSourceSpec,
    trap: TrapConfig,
    grid: QuadratureSpec | None = None,
) -> np.ndarray:
    """Per-axis temperature where Doppler cooling power equals recoil heating.

    Solves ``|F_q(v_q)| v_q = dE/dt_q`` with ``M v_q^2 = k_B T_ph`` using the
    quadrature forms of both sides.
    """
    grid = grid or QuadratureSpec()
    heating = recoil_heating_quadrature(particle, src, trap, grid, check_convergence=False).dTdt * KB
    mass = particle.mass
    out = np.empty(3)
    for q in range(3):

        def imbalance(log_t, q=q):
            t_ph = math.exp(log_t)
            v = np.zeros(3)
            v[q] = math.sqrt(KB * t_ph / mass)
            cooling = -doppler_force(v, particle, src, trap, grid)[q] * v[q]
            return cooling / heating[q] - 1.0

        T = src.bulk_temperature
        out[q] = math.exp(optimize.brentq(imbalance, math.log(1e-3 * T), math.log(1e2 * T), xtol=1e-12))
    return out


@dataclass(frozen=True)
class PhotonBath:
    """Photon bath entering the Langevin equation, per axis."""

    damping: np.ndarray
    temperature: np.ndarray
    heating: np.ndarray


def photon_bath(
    particle: ParticleSpec,
    src: LightSourceSpec,
    trap: TrapConfig,
    method: str = "closed_form",
    grid: QuadratureSpec | None = None,
) -> PhotonBath:
    """Damping and temperature of the photon bath.

    The damping is the linearised Doppler coefficient and the temperature is
    fixed so that ``damping * k_B * temperature`` reproduces the recoil
    heating rate (T/2 for thermal light).
    """
    if src.focal_power == 0:
        zeros = np.zeros(3)
        return PhotonBath(zeros, zeros.copy(), zeros.copy())
    if method == "closed_form":
        heating = recoil_heating_closed_form(particle, src, trap).dTdt
        damping = doppler_damping(particle, src, trap)
    elif method == "quadrature":
        heating = recoil_heating_quadrature(particle, src, trap, grid).dTdt
        if src.is_thermal:
            damping = doppler_damping_quadrature(particle, src, trap, grid)
        else:
            damping = doppler_damping(particle, src, trap)
    else:
        raise DomainError(f"unknown photon-rate method {method!r}")
    return PhotonBath(damping=damping, temperature=heating / damping, heating=heating)


def calibrate_waist_area(
    target_rate: float, axis, particle: ParticleSpec, src: LightSourceSpec, trap: TrapConfig
) -> float:
    """Focal area A_w giving closed-form heating ``target_rate`` (K/s) on ``axis``."""
    if not target_rate > 0:
        raise DomainError("target rate must be positive")
    rate = recoil_heating_closed_form(particle, src, trap).dTdt[axis_index(axis)]
    return src.waist_area * rate / target_rate


__all__ = [
    "AXES",
    "HeatingRates",
    "ParticleSpec",
    "PhotonBath",
    "QuadratureSpec",
    "RayleighWarning",
    "TrapConfig",
    "angular_recoil_moments",
    "axis_index",
    "bose_prefactor",
    "calibrate_waist_area",
    "cross_section",
    "dipole_pattern",
    "doppler_damping",
    "doppler_damping_quadrature",
    "doppler_force",
    "equilibrium_temperature",
    "equilibrium_temperature_balance",
    "incident_block",
    "lambda_coefficients",
    "photon_bath",
    "photon_damping",
    "recoil_heating_closed_form",
    "recoil_heating_quadrature",
    "scattered_block",
]
