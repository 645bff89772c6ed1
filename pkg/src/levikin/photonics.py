"""Light-source models: Bose-Einstein statistics, spectra and detector noise.

A thermal source (superluminescent diode) is described by a blackbody-like
spectrum with a chemical potential ``mu_c`` and a low-frequency band edge
``omega_c``. A laser is monochromatic with Poissonian photon statistics.

Absolute spectral scales are fixed by the focal power ``P`` and the focal
spot area ``A_w``: the emitted spectrum is normalised so that its integral
equals the focal intensity ``P / A_w``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np
from scipy import constants as const
from scipy import optimize

from .exceptions import DomainError, UnsupportedOperationError

HBAR = const.hbar
KB = const.k
C_LIGHT = const.c

# spectral tail cut: band ends where the emission falls below this fraction of its peak
BAND_TAIL_FRACTION = 1e-9
_NORMALIZATION_NODES = 400


class SourceKind(str, enum.Enum):
    THERMAL = "thermal"
    LASER = "laser"


def _as_kind(kind) -> SourceKind:
    if isinstance(kind, LightSourceSpec):
        return kind.kind
    try:
        return SourceKind(kind)
    except ValueError as exc:
        raise DomainError(f"unknown source kind {kind!r}") from exc


def wavelength_to_omega(wavelength):
    """Angular frequency (rad/s) of light with the given vacuum wavelength (m)."""
    return 2.0 * np.pi * C_LIGHT / np.asarray(wavelength, dtype=float)


def omega_to_wavelength(omega):
    return 2.0 * np.pi * C_LIGHT / np.asarray(omega, dtype=float)


@dataclass(frozen=True)
class ConstantGain:
    """Frequency-independent gain G(omega) = 1."""

    def log_value(self, omega):
        return np.zeros_like(np.asarray(omega, dtype=float))

    def __call__(self, omega):
        return np.ones_like(np.asarray(omega, dtype=float))


@dataclass(frozen=True)
class GaussianGain:
    """Gaussian gain profile in angular frequency, peak value 1.

    Parameters
    ----------
    center : float
        Centre angular frequency in rad/s.
    stddev : float
        Standard deviation in rad/s.
    """

    center: float
    stddev: float

    def __post_init__(self):
        if not (self.center > 0 and self.stddev > 0):
            raise DomainError("Gaussian gain needs positive center and stddev")

    @classmethod
    def from_wavelength(cls, center_wavelength: float, fwhm_wavelength: float) -> "GaussianGain":
        """Build from a centre wavelength and a full width at half maximum (both m)."""
        lo = center_wavelength - fwhm_wavelength / 2.0
        hi = center_wavelength + fwhm_wavelength / 2.0
        if lo <= 0:
            raise DomainError("FWHM too large for the centre wavelength")
        fwhm_omega = float(wavelength_to_omega(lo) - wavelength_to_omega(hi))
        sigma = fwhm_omega / (2.0 * math.sqrt(2.0 * math.log(2.0)))
        return cls(center=float(wavelength_to_omega(center_wavelength)), stddev=sigma)

    def log_value(self, omega):
        z = (np.asarray(omega, dtype=float) - self.center) / self.stddev
        return -0.5 * z * z

    def __call__(self, omega):
        return np.exp(self.log_value(omega))


Gain = Union[ConstantGain, GaussianGain]


@dataclass(frozen=True)
class LightSourceSpec:
    """Immutable description of a trapping light source (SI units).

    Use :meth:`thermal` or :meth:`laser` rather than the raw constructor.
    """

    kind: SourceKind
    focal_power: float
    waist_area: float
    bulk_temperature: float = 300.0
    chemical_potential: float = 0.0
    cutoff_frequency: float = 0.0
    gain: Gain = field(default_factory=ConstantGain)
    laser_frequency: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", _as_kind(self.kind))
        if not self.focal_power >= 0:
            raise DomainError("focal power must be non-negative")
        if not self.waist_area > 0:
            raise DomainError("waist area must be positive")
        if self.kind is SourceKind.THERMAL:
            if not self.bulk_temperature > 0:
                raise DomainError("bulk temperature must be positive")
            if not self.cutoff_frequency > 0:
                raise DomainError("cutoff frequency must be positive")
            if not HBAR * self.cutoff_frequency > self.chemical_potential:
                raise DomainError(
                    "thermal source requires hbar*omega_c > mu_c "
                    f"(got {HBAR * self.cutoff_frequency:.6e} J <= {self.chemical_potential:.6e} J)"
                )
        elif not self.laser_frequency > 0:
            raise DomainError("laser frequency must be positive")

    @classmethod
    def thermal(
        cls,
        focal_power: float,
        waist_area: float,
        bulk_temperature: float = 300.0,
        mu_wavelength: float = 1115e-9,
        cutoff_wavelength: float = 1090e-9,
        gain: Gain | None = None,
    ) -> "LightSourceSpec":
        """Thermal source with ``mu_c = 2 pi hbar c / mu_wavelength``."""
        return cls(
            kind=SourceKind.THERMAL,
            focal_power=focal_power,
            waist_area=waist_area,
            bulk_temperature=bulk_temperature,
            chemical_potential=float(HBAR * wavelength_to_omega(mu_wavelength)),
            cutoff_frequency=float(wavelength_to_omega(cutoff_wavelength)),
            gain=ConstantGain() if gain is None else gain,
        )

    @classmethod
    def laser(cls, focal_power: float, waist_area: float, wavelength: float = 1064e-9) -> "LightSourceSpec":
        return cls(
            kind=SourceKind.LASER,
            focal_power=focal_power,
            waist_area=waist_area,
            laser_frequency=float(wavelength_to_omega(wavelength)),
        )

    @classmethod
    def from_config(cls, cfg: Mapping) -> "LightSourceSpec":
        """Build from the scenario-file object (units in key names)."""
        power = float(cfg.get("power_mW", 130.0)) * 1e-3
        waist = float(cfg.get("waist_um2", 1.0)) * 1e-12
        if cfg.get("kind", "thermal") == "laser":
            return cls.laser(power, waist, float(cfg.get("wavelength_nm", 1064.0)) * 1e-9)
        gain_cfg = cfg.get("gain", {"type": "constant"})
        if gain_cfg.get("type", "constant") == "gaussian":
            gain = GaussianGain.from_wavelength(
                float(gain_cfg.get("center_nm", 1060.0)) * 1e-9,
                float(gain_cfg.get("fwhm_nm", 30.0)) * 1e-9,
            )
        else:
            gain = ConstantGain()
        return cls.thermal(
            power,
            waist,
            bulk_temperature=float(cfg.get("bulk_temp_K", 300.0)),
            mu_wavelength=float(cfg.get("wavelength_mu_nm", 1115.0)) * 1e-9,
            cutoff_wavelength=float(cfg.get("wavelength_cutoff_nm", 1090.0)) * 1e-9,
            gain=gain,
        )

    @property
    def is_thermal(self) -> bool:
        return self.kind is SourceKind.THERMAL

    @property
    def reference_frequency(self) -> float:
        """omega_c for a thermal source, omega_L for a laser."""
        return self.cutoff_frequency if self.is_thermal else self.laser_frequency

    @property
    def edge_detuning(self) -> float:
        """(hbar omega_c - mu_c) / k_B T, dimensionless."""
        self._require_thermal("edge_detuning")
        return (HBAR * self.cutoff_frequency - self.chemical_potential) / (KB * self.bulk_temperature)

    def _require_thermal(self, what: str):
        if not self.is_thermal:
            raise UnsupportedOperationError(f"{what} is only defined for a thermal source")

    def with_power(self, focal_power: float) -> "LightSourceSpec":
        return _replace(self, focal_power=focal_power)

    def with_waist_area(self, waist_area: float) -> "LightSourceSpec":
        return _replace(self, waist_area=waist_area)

    def with_gain(self, gain: Gain) -> "LightSourceSpec":
        return _replace(self, gain=gain)

    def with_temperature(self, bulk_temperature: float) -> "LightSourceSpec":
        return _replace(self, bulk_temperature=bulk_temperature)


def _replace(src: LightSourceSpec, **changes) -> LightSourceSpec:
    import dataclasses

    return dataclasses.replace(src, **changes)


def _reduced_energy(omega, src: LightSourceSpec):
    return (HBAR * np.asarray(omega, dtype=float) - src.chemical_potential) / (KB * src.bulk_temperature)


def mean_occupation(omega, src: LightSourceSpec):
    """Bose-Einstein occupation 1 / (exp[(hbar w - mu_c)/k_B T] - 1).

    Raises
    ------
    UnsupportedOperationError
        For a laser source.
    DomainError
        If ``hbar * omega <= mu_c`` anywhere.
    """
    src._require_thermal("mean_occupation")
    x = _reduced_energy(omega, src)
    if np.any(x <= 0):
        raise DomainError("mean occupation requires hbar*omega > mu_c")
    with np.errstate(over="ignore"):
        out = 1.0 / np.expm1(x)
    return out if np.ndim(out) else float(out)


def photon_number_variance(nbar, kind):
    """Photon-number variance: n + n^2 for thermal light, n for a laser."""
    nbar_arr = np.asarray(nbar, dtype=float)
    if np.any(nbar_arr < 0):
        raise DomainError("mean photon number must be non-negative")
    kind = _as_kind(kind)
    out = nbar_arr + nbar_arr**2 if kind is SourceKind.THERMAL else nbar_arr.copy()
    return out if np.ndim(out) else float(out)


def _log_emission_shape(omega, src: LightSourceSpec):
    # log of G(w) w^3 nbar(w) without the constant prefactors
    x = _reduced_energy(omega, src)
    return src.gain.log_value(omega) + 3.0 * np.log(omega) - np.log(np.expm1(x))


def emission_shape(omega, src: LightSourceSpec):
    """Unnormalised spectral shape G(w) hbar w^3 nbar(w) / (pi^2 c^2) on the band."""
    omega = np.asarray(omega, dtype=float)
    return src.gain(omega) * HBAR * omega**3 * mean_occupation(omega, src) / (np.pi**2 * C_LIGHT**2)


@functools.lru_cache(maxsize=256)
def emission_band(src: LightSourceSpec) -> tuple[float, float]:
    """Integration band [omega_c, omega_max] of a thermal source.

    ``omega_max`` is where the emitted spectrum drops below
    ``BAND_TAIL_FRACTION`` of its peak.
    """
    src._require_thermal("emission_band")
    wc = src.cutoff_frequency
    thermal_width = KB * src.bulk_temperature / HBAR
    hi = wc + 60.0 * thermal_width
    if isinstance(src.gain, GaussianGain):
        hi = max(hi, src.gain.center + 14.0 * src.gain.stddev)
    grid = np.linspace(wc, hi, 8001)
    logf = _log_emission_shape(grid, src)
    target = logf.max() + math.log(BAND_TAIL_FRACTION)
    above = np.nonzero(logf >= target)[0]
    last = above[-1]
    if last == grid.size - 1:
        return wc, float(hi)
    root = optimize.brentq(
        lambda w: float(_log_emission_shape(w, src)) - target, grid[last], grid[last + 1], xtol=1e-12 * wc
    )
    return wc, float(root)


def gauss_legendre(n: int, lo: float, hi: float):
    """Gauss-Legendre nodes and weights mapped to [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


@functools.lru_cache(maxsize=256)
def spectral_normalization(src: LightSourceSpec) -> float:
    """Lumped coefficient A_pn G / A_w fixing the absolute spectral scale.

    Chosen so that ``spectral_intensity`` integrates to ``P / A_w``.
    """
    lo, hi = emission_band(src)
    nodes, weights = gauss_legendre(_NORMALIZATION_NODES, lo, hi)
    total = float(np.sum(weights * emission_shape(nodes, src)))
    return focal_intensity(src) / total


def spectral_intensity(omega, src: LightSourceSpec):
    """Spectral intensity at the focus, W/m^2 per unit angular frequency.

    Zero below the band edge ``omega_c``.
    """
    src._require_thermal("spectral_intensity")
    omega = np.asarray(omega, dtype=float)
    out = np.zeros_like(omega)
    inside = omega >= src.cutoff_frequency
    if np.any(inside):
        out[inside] = spectral_normalization(src) * emission_shape(omega[inside], src)
    return out if out.ndim else float(out)


def focal_intensity(src: LightSourceSpec) -> float:
    """Focal intensity I = P / A_w (W/m^2)."""
    return src.focal_power / src.waist_area


def shot_noise_psd(power, kind, a: float, b: float):
    """Detector noise PSD: ``a + b P`` (laser) or ``a + b P^2`` (thermal)."""
    power = np.asarray(power, dtype=float)
    if np.any(power < 0):
        raise DomainError("optical power must be non-negative")
    exponent = 2 if _as_kind(kind) is SourceKind.THERMAL else 1
    out = a + b * power**exponent
    return out if out.ndim else float(out)
