"""Command-line front end: ``levikin rates|simulate|reheat|sweep|psd|fit``.

Every command reads a JSON scenario (``--config`` file or ``--preset``
name), writes CSV and JSON files into ``--out`` and prints a short summary.
Exit status: 0 on success, 2 for usage or configuration errors, 3 for
numerical failures (fits, convergence, out-of-domain results).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    PRESSURE_UNITS,
    convert_pressure,
    linear_reheat_fit,
    lorentzian_fit,
    pressure_sweep_fit,
    welch_psd,
)
from .config import Scenario, load, load_preset, preset_names
from .dynamics import reheat_protocol, simulate, write_trace
from .environment import radius_from_damping
from .exceptions import ConfigError, LevikinError
from .scattering import (
    AXES,
    bose_prefactor,
    doppler_damping,
    equilibrium_temperature,
    lambda_coefficients,
    recoil_heating_closed_form,
    recoil_heating_quadrature,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _axes_dict(values):
    return {a: float(v) for a, v in zip(AXES, values)}


# -- commands ----------------------------------------------------------------


def cmd_rates(sc: Scenario, args) -> dict:
    grid = sc.grid.refined() if args.oracle else sc.grid
    closed = recoil_heating_closed_form(sc.particle, sc.source, sc.trap)
    quad = recoil_heating_quadrature(sc.particle, sc.source, sc.trap, grid)
    write_csv(
        args.out / "rates.csv",
        ["axis", "gamma_ph_per_s", "dTdt_K_per_s", "ratio_to_x", "method"],
        closed.as_rows() + quad.as_rows(),
    )
    summary = {
        "scenario": sc.name,
        "lambda": _axes_dict(lambda_coefficients(sc.trap.theta_max, sc.grid)),
        "closed_form_dTdt_K_per_s": _axes_dict(closed.dTdt),
        "quadrature_dTdt_K_per_s": _axes_dict(quad.dTdt),
        "quadrature_to_closed_form": _axes_dict(quad.dTdt / closed.dTdt) if np.all(closed.dTdt > 0) else None,
        "doppler_damping_per_s": _axes_dict(doppler_damping(sc.particle, sc.source, sc.trap)),
        "quadrature_grid": list(grid.as_tuple()),
        "quadrature_convergence": quad.convergence,
    }
    if sc.source.is_thermal:
        summary["bose_prefactor"] = bose_prefactor(sc.source)
        summary["equilibrium_temperature_K"] = equilibrium_temperature(sc.source)
    if args.oracle:
        summary["oracle"] = True
    write_json(args.out / "rates.json", summary)
    print(f"{'axis':>4} {'closed K/s':>12} {'quad K/s':>12} {'ratio':>8}")
    for q, a in enumerate(AXES):
        print(f"{a:>4} {closed.dTdt[q]:12.5g} {quad.dTdt[q]:12.5g} {closed.ratios[q]:8.4f}")
    if args.oracle:
        print(f"quadrature grid {grid.as_tuple()}, relative change vs coarser grid {quad.convergence:.3g}")
    return summary


def _curve_rows(times, mean, stderr):
    return [
        (float(t), a, float(mean[q, k]), float(stderr[q, k]))
        for q, a in enumerate(AXES)
        for k, t in enumerate(times)
    ]


def cmd_simulate(sc: Scenario, args) -> dict:
    cfg = sc.simulation_config(seed=args.seed, **_traj_override(args))
    ens = simulate(cfg, threads=args.threads)
    bin_width = float(sc.simulation.get("bin_width_s", cfg.duration / 100))
    times, mean, err = ens.temperature_curve(bin_width)
    write_csv(args.out / "simulate.csv", ["time_s", "axis", "T_cm_K", "stderr_K"], _curve_rows(times, mean, err))
    if args.trace:
        write_trace(args.out / "trace.bin", ens)
    summary = {
        "scenario": sc.name,
        "seed": cfg.seed,
        "n_trajectories": cfg.n_trajectories,
        "steady_temperature_K": _axes_dict(ens.bath.steady_temperature()),
        "mean_T_cm_K": _axes_dict(mean.mean(axis=1)),
    }
    write_json(args.out / "simulate.json", summary)
    print("mean T_cm (K): " + ", ".join(f"{a}={v:.5g}" for a, v in summary["mean_T_cm_K"].items()))
    return summary


def _traj_override(args):
    return {"n_trajectories": args.trajectories} if args.trajectories else {}


def _reheat(sc: Scenario, args, gas=None):
    sim = sc.simulation
    cfg = sc.simulation_config(seed=args.seed, gas=gas)
    n_repeats = args.repeats or int(sim.get("n_repeats", 600))
    window = float(args.window or sim.get("window_s", 0.150))
    return reheat_protocol(
        cfg,
        n_repeats=n_repeats,
        window=window,
        bin_width=sim.get("bin_width_s"),
        burn_in=sim.get("burn_in_s"),
        threads=args.threads,
    )


def _reheat_summary(res):
    return {
        "slope_K_per_s": _axes_dict(res.slope),
        "slope_stderr_K_per_s": _axes_dict(res.slope_stderr),
        "expected_slope_K_per_s": _axes_dict(res.expected_slope()),
        "initial_temperature_K": _axes_dict(res.initial_temperature),
        "n_repeats": res.n_repeats,
        "window_s": res.window,
        "warnings": res.warnings,
    }


def cmd_reheat(sc: Scenario, args) -> dict:
    res = _reheat(sc, args)
    write_csv(args.out / "reheat.csv", ["time_s", "axis", "T_cm_K", "stderr_K"], res.as_rows())
    summary = {"scenario": sc.name, "seed": args.seed if args.seed is not None else sc.simulation.get("seed", 0)}
    summary.update(_reheat_summary(res))
    write_json(args.out / "reheat.json", summary)
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for q, a in enumerate(AXES):
        print(f"{a}: a1 = {res.slope[q]:.4g} +/- {res.slope_stderr[q]:.2g} K/s (expected {res.expected_slope()[q]:.4g})")
    return summary


def cmd_sweep(sc: Scenario, args) -> dict:
    unit = args.pressure_unit
    if args.pressures:
        pressures = [float(p) for p in args.pressures.split(",")]
    else:
        pressures = list(convert_pressure(sc.sweep.get("pressures_mbar", []), "mbar", unit))
    if not pressures:
        raise ConfigError("no pressures given", "sweep.pressures_mbar")
    grouping = sc.sweep.get("grouping", "yz")
    rows, rates, errs = [], [], []
    for p in pressures:
        gas = sc.gas.with_pressure(float(convert_pressure(p, unit, "Pa")))
        res = _reheat(sc, args, gas=gas)
        rates.append(res.slope)
        errs.append(res.slope_stderr)
        for q, a in enumerate(AXES):
            rows.append((float(p), a, float(res.slope[q]), float(res.slope_stderr[q])))
        print(f"P = {p:.3g} {unit}: " + ", ".join(f"{a}={v:.4g}" for a, v in zip(AXES, res.slope)))
    write_csv(args.out / "sweep.csv", [f"pressure_{unit}", "axis", "rate_K_per_s", "stderr_K_per_s"], rows)
    fit = pressure_sweep_fit(pressures, np.array(rates), np.array(errs), grouping=grouping, unit=unit)
    out = fit.as_dict()
    write_json(args.out / "sweep_fit.json", out)
    print(f"a_ph = {out['a_ph']}, a2 = {fit.a2:.4g} K/s/{unit}, crossover = {out['crossover_pressure']:.3g} {unit}")
    return out


def cmd_psd(sc: Scenario, args) -> dict:
    cfg = sc.simulation_config(seed=args.seed, **_traj_override(args))
    ens = simulate(cfg, threads=args.threads)
    n_segments = int(sc.psd.get("n_segments", 8))
    axes = [sc.psd["axis"]] if "axis" in sc.psd else list(AXES)
    rows, fits = [], {}
    for a in axes:
        q = AXES.index(a)
        est = welch_psd(ens.positions[:, q, :], ens.dt, n_segments=n_segments)
        rows += [(float(f), a, float(s)) for f, s in zip(est.frequency, est.psd)]
        fit = lorentzian_fit(est, fit_background=bool(sc.psd.get("fit_background", cfg.measurement_noise > 0)))
        fits[a] = {
            "omega0_rad_per_s": fit.omega0,
            "gamma_per_s": fit.gamma,
            "plateau_m2_per_Hz": fit.plateau,
            "background_m2_per_Hz": fit.background,
            "temperature_K": fit.temperature(cfg.particle.mass),
            "radius_nm": 1e9 * radius_from_damping(fit.gamma, cfg.gas, cfg.particle.density),
            "variance_m2": est.power(),
        }
        print(f"{a}: w0/2pi = {fit.omega0 / 2 / math.pi:.5g} Hz, gamma = {fit.gamma:.4g} /s, r = {fits[a]['radius_nm']:.3g} nm")
    write_csv(args.out / "psd.csv", ["frequency_Hz", "axis", "S_m2_per_Hz"], rows)
    write_json(args.out / "psd_fit.json", fits)
    return fits


def _read_csv(path):
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}", "--input") from None
    except StopIteration:
        raise ConfigError(f"empty CSV: {path}", "--input") from None
    return header, rows


def cmd_fit(args) -> dict:
    header, rows = _read_csv(args.input)
    if header[:2] == ["time_s", "axis"]:
        out = {}
        for a in AXES:
            sel = [r for r in rows if r[1] == a]
            t = np.array([float(r[0]) for r in sel])
            T = np.array([float(r[2]) for r in sel])
            se = np.array([float(r[3]) for r in sel])
            fit = linear_reheat_fit(t, T, se if np.all(se > 0) else None)
            out[a] = {"a0_K": fit.a0, "a1_K_per_s": fit.a1, "cov": fit.cov, "residual_variance": fit.residual_variance}
            print(f"{a}: a0 = {fit.a0:.4g} K, a1 = {fit.a1:.4g} +/- {fit.a1_err:.2g} K/s")
        name = "reheat_fit.json"
    elif header[0].startswith("pressure_") and header[1] == "axis":
        unit = header[0][len("pressure_") :]
        if unit not in PRESSURE_UNITS:
            raise ConfigError(f"unknown pressure unit {unit!r} in CSV header", "--input")
        table = {}
        for r in rows:
            table.setdefault(float(r[0]), {})[r[1]] = (float(r[2]), float(r[3]))
        pressures = sorted(table)
        rates = np.array([[table[p][a][0] for a in AXES] for p in pressures])
        errs = np.array([[table[p][a][1] for a in AXES] for p in pressures])
        fit = pressure_sweep_fit(pressures, rates, errs if np.all(errs > 0) else None, grouping=args.grouping, unit=unit)
        if args.pressure_unit != unit:
            fit = fit.in_unit(args.pressure_unit)
        out = fit.as_dict()
        print(f"a_ph = {out['a_ph']}, a2 = {fit.a2:.4g} K/s/{fit.unit}")
        name = "sweep_fit.json"
    else:
        raise ConfigError("unrecognised CSV header " + ",".join(header), "--input")
    write_json(args.out / name, out)
    return out


# -- argument parsing --------------------------------------------------------


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="scenario JSON file")
    src.add_argument("--preset", choices=preset_names(), help="bundled scenario")
    common.add_argument("--seed", type=_u64, default=None, help="override the scenario seed")
    common.add_argument("--threads", type=_positive_int, default=1)
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")

    runs = argparse.ArgumentParser(add_help=False)
    runs.add_argument("--trajectories", type=_positive_int, help="override n_trajectories")

    reps = argparse.ArgumentParser(add_help=False)
    reps.add_argument("--repeats", type=_positive_int, help="override n_repeats")
    reps.add_argument("--window", type=float, help="override window_s")

    parser = argparse.ArgumentParser(prog="levikin", description="Photon-recoil and gas heating of a levitated nanosphere.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("rates", parents=[common], help="photon heating rates per axis")
    p.add_argument("--oracle", action="store_true", help="use the doubled quadrature grid and report convergence")
    p = sub.add_parser("simulate", parents=[common, runs], help="free-running ensemble, binned T_cm(t)")
    p.add_argument("--trace", action="store_true", help="also dump trajectory 0 as a binary trace")
    sub.add_parser("reheat", parents=[common, reps], help="release-and-reheat protocol")
    p = sub.add_parser("sweep", parents=[common, reps], help="reheating rate versus gas pressure")
    p.add_argument("--pressures", help="comma-separated pressures in --pressure-unit")
    p.add_argument("--pressure-unit", choices=sorted(PRESSURE_UNITS), default="mbar")
    sub.add_parser("psd", parents=[common, runs], help="position PSD and Lorentzian linewidth")
    p = sub.add_parser("fit", help="fit a reheat or sweep CSV")
    p.add_argument("input", type=Path)
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("--grouping", choices=["yz", "none"], default="yz")
    p.add_argument("--pressure-unit", choices=sorted(PRESSURE_UNITS), default="mbar")
    return parser


COMMANDS = {"rates": cmd_rates, "simulate": cmd_simulate, "reheat": cmd_reheat, "sweep": cmd_sweep, "psd": cmd_psd}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "fit":
            cmd_fit(args)
            return EXIT_OK
        sc = load(args.config) if args.config else load_preset(args.preset)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            COMMANDS[args.command](sc, args)
    except ConfigError as exc:
        print(f"levikin: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LevikinError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"levikin: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
