"""Three-axis Langevin dynamics of the trapped particle.

Each axis is an independent damped harmonic oscillator

    M q'' + M (gamma_g + Gamma_ph + gamma_fb) q' + M w^2 q = f(t),

with white force noise of density 2 M k_B (gamma_g T_g + Gamma_ph T_ph).
The linear SDE is advanced with its exact Gaussian transition over one
step, so temperatures carry no time-step bias.

Every trajectory draws from its own counter-based (Philox) stream keyed by
``(seed, trajectory index)``. Results therefore do not depend on the number
of worker threads or on the order in which trajectories run.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numba
import numpy as np
from scipy import linalg

from .environment import GasState, gas_damping
from .exceptions import DomainError
from .photonics import KB, LightSourceSpec
from .scattering import AXES, ParticleSpec, QuadratureSpec, TrapConfig, axis_index, photon_bath

STEPS_PER_PERIOD_MIN = 50
MIN_PERIODS_FOR_TEMPERATURE = 10
LINEAR_REGIME_FRACTION = 0.01
_CHUNK = 8192
TRACE_MAGIC = b"LVK1"
_TRACE_HEADER = struct.Struct("<4sIQd")


@dataclass(frozen=True)
class SimulationConfig:
    """Everything needed to reproduce an ensemble bit-for-bit.

    ``initial_state`` is ``"rest"`` (or the explicit ``initial_position`` /
    ``initial_velocity``), ``"stationary"`` (steady state of the configured
    dynamics, feedback included) or ``"thermal"`` (Gaussian state at
    ``initial_temperature``).
    """

    particle: ParticleSpec
    source: LightSourceSpec
    trap: TrapConfig = field(default_factory=TrapConfig)
    gas: GasState = field(default_factory=GasState)
    feedback_damping: tuple = (0.0, 0.0, 0.0)
    dt: float = 1e-7
    duration: float = 1e-3
    seed: int = 0
    n_trajectories: int = 1
    photon_method: str = "closed_form"
    photon_damping_scale: float = 1.0
    initial_state: str = "rest"
    initial_temperature: tuple | None = None
    initial_position: tuple | None = None
    initial_velocity: tuple | None = None
    record_every: int = 1
    measurement_noise: float = 0.0
    grid: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        fb = tuple(float(g) for g in np.broadcast_to(np.asarray(self.feedback_damping, dtype=float), (3,)))
        object.__setattr__(self, "feedback_damping", fb)
        if any(g < 0 for g in fb):
            raise DomainError("feedback damping must be non-negative")
        if not self.dt > 0:
            raise DomainError("time step must be positive")
        max_dt = 2 * math.pi / (STEPS_PER_PERIOD_MIN * max(self.trap.frequencies))
        if self.dt > max_dt * (1 + 1e-12):
            raise DomainError(f"dt = {self.dt:.3g} s exceeds the stability limit 2pi/(50 w_max) = {max_dt:.3g} s")
        if not self.duration > 0:
            raise DomainError("duration must be positive")
        if int(self.n_trajectories) < 1:
            raise DomainError("need at least one trajectory")
        if int(self.record_every) < 1:
            raise DomainError("record_every must be >= 1")
        if self.initial_state not in ("rest", "stationary", "thermal"):
            raise DomainError(f"unknown initial state {self.initial_state!r}")
        if self.initial_state == "thermal" and self.initial_temperature is None:
            raise DomainError("thermal initial state needs initial_temperature")
        if not self.photon_damping_scale >= 0:
            raise DomainError("photon damping scale must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    def replace(self, **changes) -> "SimulationConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class BathSpec:
    """Per-axis damping rates (1/s) and bath temperatures (K)."""

    gas_damping: np.ndarray
    photon_damping: np.ndarray
    feedback_damping: np.ndarray
    gas_temperature: float
    photon_temperature: np.ndarray
    mass: float

    @property
    def release_damping(self) -> np.ndarray:
        """gamma_q without feedback."""
        return self.gas_damping + self.photon_damping

    def total_damping(self, feedback: bool = True) -> np.ndarray:
        return self.release_damping + (self.feedback_damping if feedback else 0.0)

    @property
    def heating_power(self) -> np.ndarray:
        """gamma_g T_g + Gamma_ph T_ph (K/s); the noise drives this heating from T = 0."""
        return self.gas_damping * self.gas_temperature + self.photon_damping * self.photon_temperature

    @property
    def noise_density(self) -> np.ndarray:
        """Force-noise variance density 2 M k_B (gamma_g T_g + Gamma_ph T_ph) in N^2 s."""
        return 2.0 * self.mass * KB * self.heating_power

    def steady_temperature(self, feedback: bool = True) -> np.ndarray:
        """(gamma_g T_g + Gamma_ph T_ph) / gamma_total; zero where nothing damps."""
        total = self.total_damping(feedback)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(total > 0, self.heating_power / np.where(total > 0, total, 1.0), 0.0)

    def reheat_slope(self, initial_temperature) -> np.ndarray:
        """Linear-regime slope gamma_g (T_g - T_i) + Gamma_ph (T_ph - T_i) in K/s."""
        t_i = np.asarray(initial_temperature, dtype=float)
        return self.heating_power - self.release_damping * t_i


def bath_spec(cfg: SimulationConfig) -> BathSpec:
    photons = photon_bath(cfg.particle, cfg.source, cfg.trap, cfg.photon_method, cfg.grid)
    gamma_g = gas_damping(cfg.particle, cfg.gas)
    return BathSpec(
        gas_damping=np.full(3, gamma_g),
        photon_damping=photons.damping * cfg.photon_damping_scale,
        feedback_damping=np.asarray(cfg.feedback_damping, dtype=float),
        gas_temperature=cfg.gas.temperature,
        photon_temperature=np.asarray(photons.temperature, dtype=float),
        mass=cfg.particle.mass,
    )


def feedback_for_temperature(bath: BathSpec, target_temperature) -> np.ndarray:
    """Feedback damping that holds each axis at ``target_temperature`` (K)."""
    target = np.asarray(target_temperature, dtype=float)
    if np.any(target <= 0):
        raise DomainError("target temperature must be positive")
    fb = bath.heating_power / target - bath.release_damping
    if np.any(fb < 0):
        raise DomainError("target temperature is above the feedback-free steady state")
    return fb


def exact_transition(omega: float, gamma: float, diffusion: float, dt: float):
    """One-step transition of (q, v) for the damped oscillator with noise.

    ``diffusion`` is the velocity-noise intensity (noise density / M^2).
    Returns the propagator and the lower Cholesky factor of the step noise
    covariance (Van Loan's block-exponential method).
    """
    # work in (q, v / omega) so every matrix entry is O(omega dt)
    a = np.array([[0.0, omega], [-omega, -gamma]]) * dt
    g = np.array([[0.0, 0.0], [0.0, 1.0]]) * dt
    block = np.zeros((4, 4))
    block[:2, :2] = -a
    block[:2, 2:] = g
    block[2:, 2:] = a.T
    e = linalg.expm(block)
    phi_s = e[2:, 2:].T
    cov_s = phi_s @ e[:2, 2:] * (diffusion / omega**2)
    cov_s = 0.5 * (cov_s + cov_s.T)
    scale = np.array([1.0, omega])
    phi = phi_s * scale[:, None] / scale[None, :]
    cov = cov_s * scale[:, None] * scale[None, :]
    return phi, _cholesky2(cov), cov


def _cholesky2(cov):
    l11 = math.sqrt(max(cov[0, 0], 0.0))
    l21 = cov[1, 0] / l11 if l11 > 0 else 0.0
    l22 = math.sqrt(max(cov[1, 1] - l21 * l21, 0.0))
    return np.array([[l11, 0.0], [l21, l22]])


def _axis_transitions(bath: BathSpec, omega: np.ndarray, dt: float, feedback: bool):
    damping = bath.total_damping(feedback)
    diffusion = bath.noise_density / bath.mass**2
    phis = np.empty((3, 2, 2))
    chols = np.empty((3, 2, 2))
    covs = np.empty((3, 2, 2))
    for q in range(3):
        phis[q], chols[q], covs[q] = exact_transition(omega[q], damping[q], diffusion[q], dt)
    return phis, chols, covs


@numba.njit(nogil=True, cache=True)
def _advance_store(state, z, phi, chol, record_every, offset, out_q, out_v):
    n = z.shape[0]
    for i in range(n):
        for a in range(3):
            q = state[a, 0]
            v = state[a, 1]
            z0 = z[i, a, 0]
            z1 = z[i, a, 1]
            state[a, 0] = phi[a, 0, 0] * q + phi[a, 0, 1] * v + chol[a, 0, 0] * z0
            state[a, 1] = phi[a, 1, 0] * q + phi[a, 1, 1] * v + chol[a, 1, 0] * z0 + chol[a, 1, 1] * z1
        step = offset + i + 1
        if step % record_every == 0:
            k = step // record_every
            for a in range(3):
                out_q[a, k] = state[a, 0]
                out_v[a, k] = state[a, 1]


@numba.njit(nogil=True, cache=True)
def _advance_bins(state, z, phi, chol, steps_per_bin, offset, acc):
    n = z.shape[0]
    for i in range(n):
        b = (offset + i) // steps_per_bin
        for a in range(3):
            q = state[a, 0]
            v = state[a, 1]
            z0 = z[i, a, 0]
            z1 = z[i, a, 1]
            qn = phi[a, 0, 0] * q + phi[a, 0, 1] * v + chol[a, 0, 0] * z0
            state[a, 1] = phi[a, 1, 0] * q + phi[a, 1, 1] * v + chol[a, 1, 0] * z0 + chol[a, 1, 1] * z1
            state[a, 0] = qn
            acc[a, b] += qn * qn


@numba.njit(nogil=True, cache=True)
def _advance_silent(state, z, phi, chol):
    n = z.shape[0]
    for i in range(n):
        for a in range(3):
            q = state[a, 0]
            v = state[a, 1]
            state[a, 0] = phi[a, 0, 0] * q + phi[a, 0, 1] * v + chol[a, 0, 0] * z[i, a, 0]
            state[a, 1] = (
                phi[a, 1, 0] * q + phi[a, 1, 1] * v + chol[a, 1, 0] * z[i, a, 0] + chol[a, 1, 1] * z[i, a, 1]
            )


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    """Philox stream for one trajectory, keyed by ``(seed, index)``."""
    key = np.random.SeedSequence(int(seed), spawn_key=(int(index),)).generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _noise_chunks(rng: np.random.Generator, n_steps: int):
    done = 0
    while done < n_steps:
        m = min(_CHUNK, n_steps - done)
        yield done, rng.standard_normal((m, 3, 2))
        done += m


def _gaussian_state(rng, temperature, omega, mass):
    z = rng.standard_normal((3, 2))
    t = np.maximum(np.asarray(temperature, dtype=float), 0.0)
    state = np.empty((3, 2))
    state[:, 0] = z[:, 0] * np.sqrt(KB * t / (mass * omega**2))
    state[:, 1] = z[:, 1] * np.sqrt(KB * t / mass)
    return state


def _initial_state(cfg: SimulationConfig, bath: BathSpec, rng) -> np.ndarray:
    omega = cfg.trap.omega
    if cfg.initial_state == "stationary":
        return _gaussian_state(rng, bath.steady_temperature(feedback=True), omega, bath.mass)
    if cfg.initial_state == "thermal":
        return _gaussian_state(rng, np.broadcast_to(cfg.initial_temperature, (3,)), omega, bath.mass)
    state = np.zeros((3, 2))
    if cfg.initial_position is not None:
        state[:, 0] = cfg.initial_position
    if cfg.initial_velocity is not None:
        state[:, 1] = cfg.initial_velocity
    return state


def _run_parallel(fn, n: int, threads: int):
    if threads <= 1 or n == 1:
        return [fn(j) for j in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


@dataclass
class TrajectoryEnsemble:
    """Recorded positions and velocities, shape (n_trajectories, 3, n_samples)."""

    dt: float
    positions: np.ndarray
    velocities: np.ndarray
    seed: int
    config: SimulationConfig
    bath: BathSpec

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.positions.shape[-1]) * self.dt

    def cm_temperature(self, axis, t_start: float = 0.0, t_stop: float | None = None) -> float:
        """Ensemble- and time-averaged temperature of one axis over [t_start, t_stop)."""
        q = axis_index(axis)
        t = self.times
        stop = t[-1] + self.dt if t_stop is None else t_stop
        mask = (t >= t_start) & (t < stop)
        return cm_temperature(
            self.positions[:, q, mask], self.config.trap.frequencies[q], self.config.particle.mass, self.dt
        )

    def temperature_curve(self, bin_width: float):
        """Binned T_cm(t): times, mean (3, n_bins) and standard error over trajectories."""
        per_bin = max(1, int(round(bin_width / self.dt)))
        n_bins = (self.positions.shape[-1] - 1) // per_bin
        if n_bins < 1:
            raise DomainError("bin width longer than the record")
        q2 = self.positions[:, :, 1 : 1 + n_bins * per_bin] ** 2
        q2 = q2.reshape(q2.shape[0], 3, n_bins, per_bin).mean(axis=-1)
        scale = self.config.particle.mass * self.config.trap.omega**2 / KB
        per_traj = q2 * scale[None, :, None]
        times = (np.arange(n_bins) + 0.5) * per_bin * self.dt
        return times, per_traj.mean(axis=0), _stderr(per_traj)


def _stderr(samples: np.ndarray) -> np.ndarray:
    n = samples.shape[0]
    if n < 2:
        return np.zeros(samples.shape[1:])
    return samples.std(axis=0, ddof=1) / math.sqrt(n)


def simulate(cfg: SimulationConfig, threads: int = 1) -> TrajectoryEnsemble:
    """Integrate ``cfg.n_trajectories`` independent three-axis trajectories.

    Positions and velocities are recorded every ``cfg.record_every`` steps,
    starting with the initial state.
    """
    bath = bath_spec(cfg)
    omega = cfg.trap.omega
    phis, chols, _ = _axis_transitions(bath, omega, cfg.dt, feedback=True)
    n_steps = cfg.n_steps
    n_rec = n_steps // cfg.record_every + 1

    def run(j):
        rng = trajectory_rng(cfg.seed, j)
        state = _initial_state(cfg, bath, rng)
        out_q = np.empty((3, n_rec))
        out_v = np.empty((3, n_rec))
        out_q[:, 0] = state[:, 0]
        out_v[:, 0] = state[:, 1]
        for offset, z in _noise_chunks(rng, n_steps):
            _advance_store(state, z, phis, chols, cfg.record_every, offset, out_q, out_v)
        if cfg.measurement_noise > 0:
            out_q = out_q + cfg.measurement_noise * rng.standard_normal(out_q.shape)
        return out_q, out_v

    results = _run_parallel(run, int(cfg.n_trajectories), threads)
    positions = np.stack([r[0] for r in results])
    velocities = np.stack([r[1] for r in results])
    return TrajectoryEnsemble(
        dt=cfg.dt * cfg.record_every,
        positions=positions,
        velocities=velocities,
        seed=cfg.seed,
        config=cfg,
        bath=bath,
    )


def cm_temperature(positions, omega: float, mass: float, dt: float) -> float:
    """Centre-of-mass temperature M w^2 <q^2> / k_B (K).

    Raises
    ------
    DomainError
        If the segment spans fewer than ten oscillation periods.
    """
    q = np.asarray(positions, dtype=float)
    span = q.shape[-1] * dt
    if span < MIN_PERIODS_FOR_TEMPERATURE * 2 * math.pi / omega:
        raise DomainError(
            f"segment of {span:.3g} s is shorter than {MIN_PERIODS_FOR_TEMPERATURE} oscillation periods"
        )
    return float(mass * omega**2 * np.mean(q * q) / KB)


@dataclass
class ReheatResult:
    """Averaged T_cm(t) after feedback release, one row per time bin."""

    times: np.ndarray
    temperature: np.ndarray
    stderr: np.ndarray
    trajectory_slopes: np.ndarray
    initial_temperature: np.ndarray
    bath: BathSpec
    window: float
    warnings: list = field(default_factory=list)

    @property
    def n_repeats(self) -> int:
        return self.trajectory_slopes.shape[0]

    @property
    def slope(self) -> np.ndarray:
        """Mean reheating rate per axis (K/s) from per-trajectory line fits."""
        return self.trajectory_slopes.mean(axis=0)

    @property
    def slope_stderr(self) -> np.ndarray:
        return _stderr(self.trajectory_slopes)

    def expected_slope(self) -> np.ndarray:
        return self.bath.reheat_slope(self.initial_temperature)

    def as_rows(self):
        """CSV rows: time_s, axis, T_cm_K, stderr_K."""
        rows = []
        for q, name in enumerate(AXES):
            for k, t in enumerate(self.times):
                rows.append((float(t), name, float(self.temperature[q, k]), float(self.stderr[q, k])))
        return rows


def reheat_protocol(
    cfg: SimulationConfig,
    n_repeats: int = 600,
    window: float = 0.150,
    bin_width: float | None = None,
    burn_in: float | None = None,
    threads: int = 1,
) -> ReheatResult:
    """Release-and-reheat measurement averaged over ``n_repeats`` runs.

    Each repeat starts from the feedback-cooled steady state: sampled exactly
    when ``burn_in`` is None, otherwise reached by integrating ``burn_in``
    seconds with feedback on. Feedback is then switched off and T_cm(t) is
    recorded in bins of ``bin_width`` (default ``window / 150``) for
    ``window`` seconds.
    """
    bath = bath_spec(cfg)
    omega = cfg.trap.omega
    if not window > 0:
        raise DomainError("reheat window must be positive")
    if burn_in is not None:
        fb = bath.feedback_damping
        if np.any(fb <= 0) or burn_in < np.max(10.0 / fb):
            raise DomainError("burn-in must last at least 10 / gamma_fb on every axis")
    bin_width = window / 150.0 if bin_width is None else bin_width
    per_bin = max(1, int(round(bin_width / cfg.dt)))
    n_bins = max(1, int(round(window / (per_bin * cfg.dt))))
    n_steps = n_bins * per_bin
    release_phi, release_chol, _ = _axis_transitions(bath, omega, cfg.dt, feedback=False)
    if burn_in is not None:
        cool_phi, cool_chol, _ = _axis_transitions(bath, omega, cfg.dt, feedback=True)
        burn_steps = int(round(burn_in / cfg.dt))
    scale = cfg.particle.mass * omega**2 / KB
    t_bins = (np.arange(n_bins) + 0.5) * per_bin * cfg.dt

    def run(j):
        rng = trajectory_rng(cfg.seed, j)
        if burn_in is None:
            state = _gaussian_state(rng, bath.steady_temperature(feedback=True), omega, bath.mass)
        else:
            state = _initial_state(cfg, bath, rng)
            for _, z in _noise_chunks(rng, burn_steps):
                _advance_silent(state, z, cool_phi, cool_chol)
        acc = np.zeros((3, n_bins))
        for offset, z in _noise_chunks(rng, n_steps):
            _advance_bins(state, z, release_phi, release_chol, per_bin, offset, acc)
        return acc * (scale[:, None] / per_bin)

    per_traj = np.stack(_run_parallel(run, int(n_repeats), threads))
    slopes = _line_slopes(t_bins, per_traj)
    notes = []
    release = bath.release_damping
    for q, name in enumerate(AXES):
        if release[q] > 0 and window >= LINEAR_REGIME_FRACTION * 2 * math.pi / release[q]:
            notes.append(f"{name}: window {window:.3g} s is not << 2pi/gamma_q = {2 * math.pi / release[q]:.3g} s")
    return ReheatResult(
        times=t_bins,
        temperature=per_traj.mean(axis=0),
        stderr=_stderr(per_traj),
        trajectory_slopes=slopes,
        initial_temperature=bath.steady_temperature(feedback=True),
        bath=bath,
        window=n_steps * cfg.dt,
        warnings=notes,
    )


def _line_slopes(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    tc = t - t.mean()
    return np.tensordot(y - y.mean(axis=-1, keepdims=True), tc, axes=([-1], [0])) / np.dot(tc, tc)


def propagate_moments(phi: np.ndarray, cov: np.ndarray, n_steps: int):
    """Propagator and accumulated noise covariance after ``n_steps`` steps."""
    result_phi = np.eye(2)
    result_cov = np.zeros((2, 2))
    base_phi, base_cov = phi.copy(), cov.copy()
    n = int(n_steps)
    while n:
        if n & 1:
            result_cov = base_phi @ result_cov @ base_phi.T + base_cov
            result_phi = base_phi @ result_phi
        base_cov = base_phi @ base_cov @ base_phi.T + base_cov
        base_phi = base_phi @ base_phi
        n >>= 1
    return result_phi, result_cov


def expected_temperature(cfg: SimulationConfig, step_counts: Sequence[int], initial_temperature, feedback=False):
    """Exact mean T_cm (from <q^2>) of the discrete scheme after the given step counts.

    Starts from a Gaussian state at ``initial_temperature`` per axis.
    """
    bath = bath_spec(cfg)
    omega = cfg.trap.omega
    phis, _, covs = _axis_transitions(bath, omega, cfg.dt, feedback=feedback)
    t0 = np.broadcast_to(np.asarray(initial_temperature, dtype=float), (3,))
    out = np.empty((3, len(step_counts)))
    for q in range(3):
        sigma0 = np.diag([KB * t0[q] / (bath.mass * omega[q] ** 2), KB * t0[q] / bath.mass])
        for k, n in enumerate(step_counts):
            p, c = propagate_moments(phis[q], covs[q], n)
            out[q, k] = (p @ sigma0 @ p.T + c)[0, 0] * bath.mass * omega[q] ** 2 / KB
    return out


def write_trace(path, ensemble: TrajectoryEnsemble, trajectory: int = 0) -> None:
    """Binary dump of one trajectory's positions.

    Layout: little-endian header (magic ``LVK1``, uint32 n_axes, uint64
    n_steps, float64 dt) followed by n_axes x n_steps float64 values,
    axis-major.
    """
    q = np.ascontiguousarray(ensemble.positions[trajectory], dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_TRACE_HEADER.pack(TRACE_MAGIC, q.shape[0], q.shape[1], float(ensemble.dt)))
        fh.write(q.tobytes())


def read_trace(path):
    """Inverse of :func:`write_trace`; returns ``(dt, positions)``."""
    with open(path, "rb") as fh:
        header = fh.read(_TRACE_HEADER.size)
        magic, n_axes, n_steps, dt = _TRACE_HEADER.unpack(header)
        if magic != TRACE_MAGIC:
            raise DomainError(f"not a levikin trace (magic {magic!r})")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n_axes * n_steps:
        raise DomainError("truncated trace file")
    return dt, data.reshape(n_axes, n_steps)


def sampled_position_psd(cfg: SimulationConfig, axis, frequency, feedback: bool = True):
    """Exact one-sided PSD (m^2/Hz) of the position sampled every ``cfg.dt``.

    The sampled state obeys x_{n+1} = Phi x_n + w_n, so its spectrum is
    [G Q G^H]_qq with G = (I - Phi e^{-i 2 pi f dt})^{-1}. This includes
    aliasing and is the reference for periodogram checks.
    """
    q = axis_index(axis)
    bath = bath_spec(cfg)
    phis, _, covs = _axis_transitions(bath, cfg.trap.omega, cfg.dt, feedback=feedback)
    f = np.atleast_1d(np.asarray(frequency, dtype=float))
    z = np.exp(-2j * math.pi * f * cfg.dt)
    (p00, p01), (p10, p11) = phis[q]
    # closed-form inverse of I - Phi z, first row only
    a, b, c, d = 1 - p00 * z, -p01 * z, -p10 * z, 1 - p11 * z
    det = a * d - b * c
    g0, g1 = d / det, -b / det
    cov = covs[q]
    s = (np.abs(g0) ** 2 * cov[0, 0] + np.abs(g1) ** 2 * cov[1, 1] + 2 * (g0 * np.conj(g1)).real * cov[0, 1])
    return 2.0 * cfg.dt * s
