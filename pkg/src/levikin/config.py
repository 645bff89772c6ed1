"""Scenario files: JSON schema, defaults and conversion to domain objects."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema
import numpy as np

from .dynamics import SimulationConfig, bath_spec, feedback_for_temperature
from .environment import GASES, GasState
from .exceptions import ConfigError, LevikinError
from .photonics import LightSourceSpec
from .scattering import ParticleSpec, QuadratureSpec, TrapConfig

# focal area (um^2) that puts the closed-form z rate of a 70 nm sphere under
# 130 mW of thermal light at 1.02 K/s
CALIBRATED_WAIST_UM2 = 0.4867415672641045

_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_VEC3_POS = {"type": "array", "items": _POS, "minItems": 3, "maxItems": 3}
_VEC3_NONNEG = {"type": "array", "items": _NONNEG, "minItems": 3, "maxItems": 3}
_COUNT = {"type": "integer", "minimum": 1}


def _obj(props: dict, **extra) -> dict:
    return {"type": "object", "properties": props, "additionalProperties": False, **extra}


SCHEMA = _obj(
    {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "particle": _obj({"radius_nm": _POS, "density_kg_m3": _POS, "refractive_index": {"type": "number", "exclusiveMinimum": 1}}),
        "source": _obj(
            {
                "kind": {"enum": ["thermal", "laser"]},
                "power_mW": _NONNEG,
                "waist_um2": _POS,
                "wavelength_nm": _POS,
                "bulk_temp_K": _POS,
                "wavelength_mu_nm": _POS,
                "wavelength_cutoff_nm": _POS,
                "gain": _obj({"type": {"enum": ["constant", "gaussian"]}, "center_nm": _POS, "fwhm_nm": _POS}),
            }
        ),
        "trap": _obj(
            {
                "freq_kHz": _VEC3_POS,
                "theta_max_rad": {"type": "number", "minimum": 0, "exclusiveMaximum": math.pi / 2},
                "numerical_aperture": _POS,
            }
        ),
        "gas": _obj(
            {
                "pressure_mbar": _NONNEG,
                "gas_temp_K": _POS,
                "gas": {"enum": sorted(GASES)},
                "molecular_mass_kg": _POS,
                "epstein_factor": _POS,
            }
        ),
        "quadrature": _obj({k: {"type": "integer", "minimum": 2} for k in QuadratureSpec().__dataclass_fields__}),
        "simulation": _obj(
            {
                "dt_s": _POS,
                "duration_s": _POS,
                "n_trajectories": _COUNT,
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "feedback_damping_per_s": _VEC3_NONNEG,
                "initial_temp_mK": _VEC3_POS,
                "initial_state": {"enum": ["rest", "stationary", "thermal"]},
                "photon_method": {"enum": ["closed_form", "quadrature"]},
                "photon_damping_scale": _NONNEG,
                "record_every": _COUNT,
                "measurement_noise_m": _NONNEG,
                "n_repeats": _COUNT,
                "window_s": _POS,
                "bin_width_s": _POS,
                "burn_in_s": _POS,
            },
        )
        | {"not": {"required": ["feedback_damping_per_s", "initial_temp_mK"]}},
        "sweep": _obj(
            {
                "pressures_mbar": {"type": "array", "items": _POS, "minItems": 1},
                "grouping": {"enum": ["yz", "none"]},
            }
        ),
        "psd": _obj({"n_segments": _COUNT, "axis": {"enum": ["x", "y", "z"]}, "fit_background": {"type": "boolean"}}),
    }
)


def _error_path(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        parts += extra[:1]
    return ".".join(parts) or "<root>"


def validate(raw: Mapping) -> None:
    """Raise :class:`ConfigError` naming the first offending key."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        if err.validator == "not":
            raise ConfigError("give either feedback_damping_per_s or initial_temp_mK, not both", _error_path(err))
        raise ConfigError(err.message, _error_path(err))


@dataclass
class Scenario:
    """Validated scenario with domain objects built from it."""

    raw: dict
    particle: ParticleSpec
    source: LightSourceSpec
    trap: TrapConfig
    gas: GasState
    grid: QuadratureSpec
    simulation: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    psd: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.raw.get("name", "scenario")

    def simulation_config(self, seed: int | None = None, gas: GasState | None = None, **overrides) -> SimulationConfig:
        sim = self.simulation
        init_state = sim.get("initial_state", "stationary")
        try:
            return self._simulation_config(sim, init_state, seed, gas, overrides)
        except ConfigError:
            raise
        except LevikinError as exc:
            raise ConfigError(str(exc), "simulation") from exc

    def _simulation_config(self, sim, init_state, seed, gas, overrides) -> SimulationConfig:
        cfg = SimulationConfig(
            particle=self.particle,
            source=self.source,
            trap=self.trap,
            gas=gas or self.gas,
            dt=float(sim.get("dt_s", 1e-7)),
            duration=float(sim.get("duration_s", 1e-3)),
            seed=int(sim.get("seed", 0) if seed is None else seed),
            n_trajectories=int(sim.get("n_trajectories", 1)),
            photon_method=sim.get("photon_method", "closed_form"),
            photon_damping_scale=float(sim.get("photon_damping_scale", 1.0)),
            initial_state=init_state,
            initial_temperature=tuple(1e-3 * t for t in sim["initial_temp_mK"])
            if init_state == "thermal" and "initial_temp_mK" in sim
            else None,
            record_every=int(sim.get("record_every", 1)),
            measurement_noise=float(sim.get("measurement_noise_m", 0.0)),
            grid=self.grid,
        )
        if "feedback_damping_per_s" in sim:
            cfg = cfg.replace(feedback_damping=tuple(sim["feedback_damping_per_s"]))
        elif "initial_temp_mK" in sim and init_state != "thermal":
            fb = feedback_for_temperature(bath_spec(cfg), 1e-3 * np.asarray(sim["initial_temp_mK"]))
            cfg = cfg.replace(feedback_damping=tuple(fb))
        return cfg.replace(**overrides) if overrides else cfg


def _with_defaults(raw: Mapping) -> dict:
    out = json.loads(json.dumps(raw))
    out.setdefault("source", {}).setdefault("waist_um2", CALIBRATED_WAIST_UM2)
    return out


def build(raw: Mapping) -> Scenario:
    """Validate ``raw`` and build the domain objects.

    Domain errors raised while constructing objects are reported as
    :class:`ConfigError` with the section name as path.
    """
    validate(raw)
    data = _with_defaults(raw)
    section = "<root>"
    try:
        section = "particle"
        particle = ParticleSpec.from_config(data.get("particle", {}))
        section = "source"
        source = LightSourceSpec.from_config(data["source"])
        section = "trap"
        trap = TrapConfig.from_config(data.get("trap", {}))
        section = "gas"
        gas = GasState.from_config(data.get("gas", {}))
        section = "quadrature"
        grid = QuadratureSpec.from_config(data.get("quadrature"))
    except ConfigError:
        raise
    except (LevikinError, ValueError) as exc:
        raise ConfigError(str(exc), section) from exc
    return Scenario(
        raw=data,
        particle=particle,
        source=source,
        trap=trap,
        gas=gas,
        grid=grid,
        simulation=data.get("simulation", {}),
        sweep=data.get("sweep", {}),
        psd=data.get("psd", {}),
    )


def load(path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object")
    return build(raw)


def preset_names():
    return sorted(p.name[:-5] for p in resources.files("levikin.presets").iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> Scenario:
    ref = resources.files("levikin.presets") / f"{name}.json"
    if not ref.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return build(json.loads(ref.read_text()))


def raw_preset(name: str) -> dict[str, Any]:
    return json.loads((resources.files("levikin.presets") / f"{name}.json").read_text())
