"""Spectral estimates and the fits applied to reheating data.

The fitters follow the scikit-learn estimator protocol (``fit`` /
``predict`` with trailing-underscore attributes) so they compose with
``clone`` and parameter searches. Each has a functional wrapper returning a
plain result record.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, signal
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .environment import MBAR
from .exceptions import DomainError, FitError
from .photonics import KB

AXES = ("x", "y", "z")
MIN_SAMPLES_PER_SEGMENT = 8
MIN_REHEAT_BINS = 5
MIN_NOISE_POINTS = 5
PRESSURE_UNITS = {"Pa": 1.0, "mbar": MBAR}
# relative residual ratio above which neither noise model is preferred
AMBIGUITY_SSR_RATIO = 0.25
AMBIGUITY_EXPONENT_GAP = 0.25
LM_XTOL = 1e-10
LM_MAX_ITER = 200


# -- power spectral density -------------------------------------------------


@dataclass
class PsdEstimate:
    """One-sided PSD. ``frequency`` in Hz, ``psd`` in (unit)^2/Hz."""

    frequency: np.ndarray
    psd: np.ndarray
    n_segments: int
    window: str
    dt: float

    @property
    def df(self) -> float:
        return float(self.frequency[1] - self.frequency[0])

    @property
    def omega(self) -> np.ndarray:
        return 2 * math.pi * self.frequency

    def power(self, f_lo: float = 0.0, f_hi: float = math.inf) -> float:
        """Integrated power in [f_lo, f_hi] (rectangle rule on the bin grid)."""
        sel = (self.frequency >= f_lo) & (self.frequency <= f_hi)
        return float(self.psd[sel].sum() * self.df)

    def as_rows(self):
        return [(float(f), float(s)) for f, s in zip(self.frequency, self.psd)]


def welch_psd(series, dt: float, n_segments: int = 8, window: str = "hann", detrend=False) -> PsdEstimate:
    """Welch estimate with 50 % overlap and density (window-power) scaling.

    ``series`` may be 1-D or 2-D; rows of a 2-D array are treated as
    independent records and their PSDs averaged. The segment length is
    chosen so that ``n_segments`` half-overlapping segments tile the record.

    Examples
    --------
    >>> rng = np.random.default_rng(1)
    >>> est = welch_psd(rng.standard_normal(2**16), 1e-3)
    >>> round(float(np.median(est.psd)) * 1e3, 1)
    2.0
    """
    if window.lower() not in ("hann", "hanning"):
        raise DomainError(f"unsupported window {window!r}; only Hann is provided")
    x = np.atleast_2d(np.asarray(series, dtype=float))
    n = x.shape[-1]
    n_segments = int(n_segments)
    if n_segments < 1:
        raise DomainError("need at least one segment")
    if n < 2 * n_segments * MIN_SAMPLES_PER_SEGMENT:
        raise DomainError(
            f"series of {n} samples too short for {n_segments} segments "
            f"(need >= {2 * n_segments * MIN_SAMPLES_PER_SEGMENT})"
        )
    nperseg = (2 * n) // (n_segments + 1)
    freq, pxx = signal.welch(
        x,
        fs=1.0 / dt,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend=detrend,
        return_onesided=True,
        scaling="density",
        axis=-1,
    )
    psd = pxx.mean(axis=0)
    return PsdEstimate(frequency=freq, psd=np.maximum(psd, 0.0), n_segments=n_segments, window="hann", dt=dt)


def oscillator_psd(omega, omega0: float, gamma: float, amplitude: float, background: float = 0.0):
    """One-sided damped-oscillator PSD ``A / ((w0^2 - w^2)^2 + gamma^2 w^2) + B``.

    For a particle of mass M at temperature T, ``A = 4 k_B T gamma / M``
    gives the spectrum per Hz.
    """
    w = np.asarray(omega, dtype=float)
    return amplitude / ((omega0**2 - w**2) ** 2 + gamma**2 * w**2) + background


# -- Lorentzian linewidth ----------------------------------------------------


@dataclass
class LorentzianFit:
    omega0: float
    gamma: float
    amplitude: float
    background: float
    cov: np.ndarray
    nfev: int
    cost: float

    @property
    def plateau(self) -> float:
        """Low-frequency level of the oscillator term, A / w0^4."""
        return self.amplitude / self.omega0**4

    def temperature(self, mass: float) -> float:
        """Oscillator temperature implied by the area, A M / (4 k_B gamma)."""
        return self.amplitude * mass / (4 * KB * self.gamma)


class LorentzianPSDModel(BaseEstimator, RegressorMixin):
    """Levenberg-Marquardt fit of :func:`oscillator_psd` to a PSD.

    Residuals are taken in log space so every decade of the spectrum counts
    equally. ``fit(omega, psd)`` takes angular frequencies in rad/s.

    Parameters
    ----------
    fit_background : bool
        Also fit a white floor ``B``.
    band : float or None
        Keep only ``omega <= band * omega_peak``; None keeps everything.
    min_contrast : float
        Required ratio of peak height to the floor / plateau; below it the
        input is treated as having no resolved peak.
    """

    def __init__(self, fit_background=False, band=4.0, min_contrast=3.0, xtol=LM_XTOL, max_iter=LM_MAX_ITER):
        self.fit_background = fit_background
        self.band = band
        self.min_contrast = min_contrast
        self.xtol = xtol
        self.max_iter = max_iter

    def _guess(self, w, s):
        k = int(np.argmax(s))
        peak = s[k]
        if k == 0 or k == len(s) - 1:
            raise FitError("no interior spectral peak", {"peak_index": k})
        edge = np.median(np.concatenate([s[: max(1, k // 4)], s[-max(1, len(s) // 8) :]]))
        if peak < self.min_contrast * edge:
            raise FitError("no resolved peak above the plateau", {"peak": peak, "plateau": edge})
        above = np.nonzero(s >= peak / 2)[0]
        width = max(w[above[-1]] - w[above[0]], w[1] - w[0])
        w0 = w[k]
        return w0, width, peak * width**2 * w0**2, max(float(np.min(s)), 1e-300)

    def fit(self, X, y):
        w = np.asarray(X, dtype=float).ravel()
        s = np.asarray(y, dtype=float).ravel()
        keep = (w > 0) & (s > 0) & np.isfinite(s)
        w, s = w[keep], s[keep]
        if w.size < 5:
            raise FitError("need at least five positive PSD bins", {"n": int(w.size)})
        w0, g0, a0, b0 = self._guess(w, s)
        if self.band is not None:
            sel = w <= self.band * w0
            w, s = w[sel], s[sel]
        p0 = [math.log(w0), math.log(g0), math.log(a0)]
        if self.fit_background:
            p0.append(math.log(b0))
        log_s = np.log(s)

        def residual(p):
            bg = math.exp(p[3]) if self.fit_background else 0.0
            return np.log(oscillator_psd(w, math.exp(p[0]), math.exp(p[1]), math.exp(p[2]), bg)) - log_s

        with np.errstate(over="ignore", invalid="ignore"):
            sol = optimize.least_squares(
                residual, p0, method="lm", xtol=self.xtol, ftol=1e-12, max_nfev=self.max_iter * (len(p0) + 1)
            )
        diag = {"status": int(sol.status), "message": sol.message, "nfev": int(sol.nfev), "cost": float(sol.cost)}
        if sol.status <= 0 or not np.all(np.isfinite(sol.x)):
            raise FitError("Lorentzian fit did not converge", diag)
        omega0, gamma, amp = (math.exp(v) for v in sol.x[:3])
        background = math.exp(sol.x[3]) if self.fit_background else 0.0
        if not (w[0] <= omega0 <= w[-1]) or gamma <= 0:
            raise FitError("fitted resonance outside the data", dict(diag, omega0=omega0))
        peak = amp / (gamma * omega0) ** 2
        if self.fit_background and peak < self.min_contrast * background:
            raise FitError("fitted peak does not rise above the floor", dict(diag, peak=peak, floor=background))
        jac = sol.jac
        dof = max(1, w.size - len(p0))
        s2 = 2 * sol.cost / dof
        try:
            cov_log = np.linalg.inv(jac.T @ jac) * s2
        except np.linalg.LinAlgError:
            cov_log = np.full((len(p0), len(p0)), np.nan)
        scale = np.exp(sol.x)
        self.omega0_ = omega0
        self.gamma_ = gamma
        self.amplitude_ = amp
        self.background_ = background
        # delta-method covariance of the natural parameters
        self.cov_ = cov_log * np.outer(scale, scale)
        self.n_fev_ = int(sol.nfev)
        self.cost_ = float(sol.cost)
        return self

    def predict(self, X):
        check_is_fitted(self, "omega0_")
        return oscillator_psd(np.asarray(X, dtype=float), self.omega0_, self.gamma_, self.amplitude_, self.background_)

    def result(self) -> LorentzianFit:
        check_is_fitted(self, "omega0_")
        return LorentzianFit(
            self.omega0_, self.gamma_, self.amplitude_, self.background_, self.cov_, self.n_fev_, self.cost_
        )


def lorentzian_fit(psd: PsdEstimate, **kwargs) -> LorentzianFit:
    """Resonance frequency, linewidth and plateau of a single-peak PSD.

    Raises
    ------
    FitError
        Flat input, an unresolved peak, or non-convergence; ``diagnostics``
        holds the optimizer state.
    """
    return LorentzianPSDModel(**kwargs).fit(psd.omega, psd.psd).result()


# -- linear reheating fit ----------------------------------------------------


@dataclass
class LinearFitResult:
    a0: float
    a1: float
    cov: np.ndarray
    residual_variance: float
    chi2: float
    dof: int

    @property
    def a0_err(self) -> float:
        return float(math.sqrt(self.cov[0, 0]))

    @property
    def a1_err(self) -> float:
        return float(math.sqrt(self.cov[1, 1]))


def _check_weights(sigma, n):
    if sigma is None:
        return None
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (n,))
    if not np.all(np.isfinite(sigma)) or np.any(sigma <= 0):
        raise DomainError("standard errors must be finite and positive")
    return sigma


class LinearReheatModel(BaseEstimator, RegressorMixin):
    """Straight line ``a0 + a1 t`` by weighted least squares.

    With ``sample_weight`` given as 1/sigma^2 the covariance is absolute;
    without weights it is scaled by the residual variance.
    """

    def fit(self, X, y, sample_weight=None):
        t = np.asarray(X, dtype=float).ravel()
        T = np.asarray(y, dtype=float).ravel()
        if t.size != T.size:
            raise DomainError("time and temperature lengths differ")
        if t.size < MIN_REHEAT_BINS:
            raise DomainError(f"need at least {MIN_REHEAT_BINS} time bins, got {t.size}")
        absolute = sample_weight is not None
        w = np.ones_like(t) if sample_weight is None else np.asarray(sample_weight, dtype=float).ravel()
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise DomainError("weights must be finite and positive")
        design = np.column_stack([np.ones_like(t), t])
        normal = design.T @ (w[:, None] * design)
        if np.linalg.cond(normal) > 1e14:
            raise DomainError("degenerate design: all times (nearly) equal")
        cov = np.linalg.inv(normal)
        coef = cov @ (design.T @ (w * T))
        resid = T - design @ coef
        dof = t.size - 2
        chi2 = float(np.sum(w * resid**2))
        self.coef_ = coef
        self.chi2_ = chi2
        self.dof_ = dof
        self.residual_variance_ = float(np.sum(resid**2) / dof)
        self.cov_ = cov if absolute else cov * (chi2 / dof)
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return self.coef_[0] + self.coef_[1] * np.asarray(X, dtype=float)


def linear_reheat_fit(t, T_mean, T_stderr=None) -> LinearFitResult:
    """Fit ``a0 + a1 t`` to binned T_cm(t); a1 is the reheating rate (K/s).

    Examples
    --------
    >>> t = np.linspace(0, 0.15, 11)
    >>> fit = linear_reheat_fit(t, 0.05 + 0.5 * t)
    >>> round(fit.a0, 12), round(fit.a1, 12)
    (0.05, 0.5)
    """
    t = np.asarray(t, dtype=float)
    sigma = _check_weights(T_stderr, t.size)
    model = LinearReheatModel().fit(t, T_mean, None if sigma is None else 1.0 / sigma**2)
    return LinearFitResult(
        a0=float(model.coef_[0]),
        a1=float(model.coef_[1]),
        cov=model.cov_,
        residual_variance=model.residual_variance_,
        chi2=model.chi2_,
        dof=model.dof_,
    )


# -- pressure sweep ----------------------------------------------------------


@dataclass
class SweepFitResult:
    """``rate_q(P) = a_ph[q] + a2 P``; a2 is per ``unit`` of pressure."""

    a_ph: np.ndarray
    a2: float
    cov: np.ndarray
    a_ph_err: np.ndarray
    a2_err: float
    unit: str
    groups: tuple
    chi2: float
    dof: int
    notes: list = field(default_factory=list)

    def crossover_pressure(self, axis=None) -> float:
        """Pressure (in ``unit``) where the gas term equals the photon term.

        ``axis=None`` uses the largest photon intercept: above that pressure
        the gas dominates on every axis.
        """
        if not self.a2 > 0:
            raise FitError("non-positive gas slope; no crossover", {"a2": self.a2})
        a = self.a_ph.max() if axis is None else self.a_ph[AXES.index(axis) if isinstance(axis, str) else axis]
        return float(a / self.a2)

    def in_unit(self, unit: str) -> "SweepFitResult":
        """Same fit with pressures expressed in another unit."""
        if unit not in PRESSURE_UNITS:
            raise DomainError(f"unknown pressure unit {unit!r}")
        f = PRESSURE_UNITS[unit] / PRESSURE_UNITS[self.unit]  # P_new = P_old / f
        n = len(self.groups)
        scale = np.ones(n + 1)
        scale[-1] = f
        return SweepFitResult(
            a_ph=self.a_ph.copy(),
            a2=self.a2 * f,
            cov=self.cov * np.outer(scale, scale),
            a_ph_err=self.a_ph_err.copy(),
            a2_err=self.a2_err * f,
            unit=unit,
            groups=self.groups,
            chi2=self.chi2,
            dof=self.dof,
            notes=list(self.notes),
        )

    def as_dict(self):
        return {
            "a_ph": {a: float(v) for a, v in zip(AXES, self.a_ph)},
            "a_ph_err": {a: float(v) for a, v in zip(AXES, self.a_ph_err)},
            "a2": float(self.a2),
            "a2_err": float(self.a2_err),
            "pressure_unit": self.unit,
            "groups": [list(g) for g in self.groups],
            "cov": self.cov.tolist(),
            "crossover_pressure": self.crossover_pressure() if self.a2 > 0 else None,
            "chi2": self.chi2,
            "dof": self.dof,
        }


GROUPINGS = {"yz": ((0,), (1, 2)), "none": ((0,), (1,), (2,))}


class PressureSweepModel(BaseEstimator, RegressorMixin):
    """Joint fit of per-axis intercepts and a shared gas slope.

    ``X`` is the pressure column, ``y`` has one column per axis. Intercepts
    are bounded below by zero (``scipy.optimize.lsq_linear``).
    """

    def __init__(self, grouping="yz"):
        self.grouping = grouping

    def _design(self, p):
        groups = GROUPINGS[self.grouping]
        n_p = p.size
        design = np.zeros((3 * n_p, len(groups) + 1))
        for gi, members in enumerate(groups):
            for q in members:
                design[q * n_p : (q + 1) * n_p, gi] = 1.0
        design[:, -1] = np.tile(p, 3)
        return design

    def fit(self, X, y, sample_weight=None):
        if self.grouping not in GROUPINGS:
            raise DomainError(f"unknown grouping {self.grouping!r}")
        p = np.asarray(X, dtype=float).ravel()
        rates = np.asarray(y, dtype=float).reshape(p.size, 3)
        distinct = np.unique(p)
        if distinct.size < 3:
            raise FitError("need at least three distinct pressures", {"n_pressures": int(distinct.size)})
        if np.any(distinct <= 0) or distinct[-1] / distinct[0] < 10.0 * (1 - 1e-9):
            raise FitError("pressures must be positive and span at least one decade", {"span": float(distinct[-1] / distinct[0])})
        design = self._design(p)
        target = rates.T.ravel()
        w = np.ones_like(target) if sample_weight is None else np.asarray(sample_weight, dtype=float).reshape(p.size, 3).T.ravel()
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise DomainError("weights must be finite and positive")
        sw = np.sqrt(w)
        # column scaling keeps the problem well conditioned for Pa or mbar alike
        col = np.abs(design).max(axis=0)
        a_mat = design * sw[:, None] / col
        lower = np.r_[np.zeros(design.shape[1] - 1), -np.inf]
        sol = optimize.lsq_linear(a_mat, target * sw, bounds=(lower, np.inf), method="bvls", tol=1e-14)
        if not sol.success:
            raise FitError("constrained sweep fit failed", {"status": int(sol.status), "message": sol.message})
        coef = sol.x / col
        resid = target - design @ coef
        dof = target.size - design.shape[1]
        chi2 = float(np.sum(w * resid**2))
        cov = np.linalg.inv(design.T @ (w[:, None] * design))
        if sample_weight is None:
            cov = cov * (chi2 / max(dof, 1))
        self.coef_ = coef
        self.cov_ = cov
        self.chi2_ = chi2
        self.dof_ = dof
        self.active_bounds_ = sol.active_mask.copy()
        return self

    def axis_intercepts(self):
        check_is_fitted(self, "coef_")
        out = np.empty(3)
        err = np.empty(3)
        for gi, members in enumerate(GROUPINGS[self.grouping]):
            for q in members:
                out[q] = self.coef_[gi]
                err[q] = math.sqrt(self.cov_[gi, gi])
        return out, err

    def predict(self, X):
        check_is_fitted(self, "coef_")
        p = np.asarray(X, dtype=float).ravel()
        a_ph, _ = self.axis_intercepts()
        return a_ph[None, :] + self.coef_[-1] * p[:, None]


def pressure_sweep_fit(pressures, rates, stderr=None, grouping: str = "yz", unit: str = "mbar") -> SweepFitResult:
    """Decompose reheating rates into photon intercepts and a gas slope.

    Parameters
    ----------
    pressures : (n,) array in ``unit``
    rates : (n, 3) reheating rates (K/s) per axis
    stderr : (n, 3) array, optional
        Standard errors of the rates; with them the covariance is absolute.
    grouping : {"yz", "none"}
        ``"yz"`` shares one intercept between y and z.
    """
    if unit not in PRESSURE_UNITS:
        raise DomainError(f"unknown pressure unit {unit!r}")
    weights = None
    if stderr is not None:
        s = np.asarray(stderr, dtype=float)
        if not np.all(np.isfinite(s)) or np.any(s <= 0):
            raise DomainError("standard errors must be finite and positive")
        weights = 1.0 / s**2
    model = PressureSweepModel(grouping=grouping).fit(pressures, rates, weights)
    a_ph, a_err = model.axis_intercepts()
    notes = []
    if np.any(model.active_bounds_[:-1] != 0):
        notes.append("an intercept sits on its a_ph >= 0 bound; its error bar is one-sided")
    return SweepFitResult(
        a_ph=a_ph,
        a2=float(model.coef_[-1]),
        cov=model.cov_,
        a_ph_err=a_err,
        a2_err=float(math.sqrt(model.cov_[-1, -1])),
        unit=unit,
        groups=GROUPINGS[grouping],
        chi2=model.chi2_,
        dof=model.dof_,
        notes=notes,
    )


# -- detector noise scaling --------------------------------------------------


@dataclass
class NoiseScalingResult:
    exponent: int
    a: float
    b: float
    effective_exponent: float
    ssr: dict
    ambiguous: bool


class NoiseScalingModel(BaseEstimator, RegressorMixin):
    """Choose between ``a + b P`` and ``a + b P^2`` for detector noise.

    Both models are fitted with relative residuals (the data usually span
    decades) and the smaller residual sum wins. A free-exponent fit
    ``a + b P^p`` supplies the effective exponent.
    """

    def __init__(self, ambiguity_ratio=AMBIGUITY_SSR_RATIO, exponent_gap=AMBIGUITY_EXPONENT_GAP):
        self.ambiguity_ratio = ambiguity_ratio
        self.exponent_gap = exponent_gap

    @staticmethod
    def _linear(p, s, k):
        design = np.column_stack([np.ones_like(p), p**k]) / s[:, None]
        coef, *_ = np.linalg.lstsq(design, np.ones_like(s), rcond=None)
        resid = design @ coef - 1.0
        return coef, float(resid @ resid)

    def fit(self, X, y):
        p = np.asarray(X, dtype=float).ravel()
        s = np.asarray(y, dtype=float).ravel()
        if p.size < MIN_NOISE_POINTS:
            raise DomainError(f"need at least {MIN_NOISE_POINTS} power points")
        if np.any(s <= 0) or np.any(p < 0):
            raise DomainError("noise levels must be positive and powers non-negative")
        fits = {k: self._linear(p, s, k) for k in (1, 2)}
        best = min(fits, key=lambda k: fits[k][1])
        other = 3 - best
        ssr_best, ssr_other = fits[best][1], fits[other][1]

        def resid(theta):
            a, b, e = theta
            return (a + b * p**e) / s - 1.0

        a0, b0 = fits[best][0]
        sol = optimize.least_squares(resid, [a0, b0, float(best)], bounds=([-np.inf, 0.0, 0.1], [np.inf, np.inf, 6.0]))
        self.effective_exponent_ = float(sol.x[2])
        self.exponent_ = best
        self.coef_ = fits[best][0]
        self.ssr_ = {"linear": fits[1][1], "quadratic": fits[2][1], "free": float(2 * sol.cost)}
        self.ambiguous_ = bool(
            ssr_best > self.ambiguity_ratio * ssr_other
            or abs(self.effective_exponent_ - best) > self.exponent_gap
        )
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return self.coef_[0] + self.coef_[1] * np.asarray(X, dtype=float) ** self.exponent_


def noise_scaling_fit(P, S) -> NoiseScalingResult:
    """Select the power law (1 or 2) of detector noise versus optical power."""
    m = NoiseScalingModel().fit(P, S)
    return NoiseScalingResult(
        exponent=m.exponent_,
        a=float(m.coef_[0]),
        b=float(m.coef_[1]),
        effective_exponent=m.effective_exponent_,
        ssr=m.ssr_,
        ambiguous=m.ambiguous_,
    )


# -- exponential relaxation --------------------------------------------------


@dataclass
class RelaxationFitResult:
    gamma: float
    T_inf: float
    T_i: float
    cov: np.ndarray

    @property
    def gamma_err(self) -> float:
        return float(math.sqrt(self.cov[0, 0]))


def relaxation_curve(t, gamma, T_inf, T_i):
    return T_inf + (T_i - T_inf) * np.exp(-gamma * np.asarray(t, dtype=float))


def relaxation_fit(t, T, stderr=None, gamma_guess: float | None = None) -> RelaxationFitResult:
    """Fit ``T_inf + (T_i - T_inf) exp(-gamma t)``."""
    t = np.asarray(t, dtype=float)
    T = np.asarray(T, dtype=float)
    if t.size < 4:
        raise DomainError("need at least four points for a relaxation fit")
    sigma = _check_weights(stderr, t.size)
    if gamma_guess is None:
        gamma_guess = 3.0 / (t[-1] - t[0])
    p0 = [gamma_guess, T[-1], T[0]]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", optimize.OptimizeWarning)
            popt, pcov = optimize.curve_fit(
                relaxation_curve, t, T, p0=p0, sigma=sigma, absolute_sigma=sigma is not None, maxfev=20000
            )
    except (RuntimeError, optimize.OptimizeWarning) as exc:
        raise FitError(f"relaxation fit failed: {exc}") from exc
    return RelaxationFitResult(gamma=float(popt[0]), T_inf=float(popt[1]), T_i=float(popt[2]), cov=pcov)


def convert_pressure(values, from_unit: str, to_unit: str):
    if from_unit not in PRESSURE_UNITS or to_unit not in PRESSURE_UNITS:
        raise DomainError(f"unknown pressure unit in {from_unit!r} -> {to_unit!r}")
    return np.asarray(values, dtype=float) * PRESSURE_UNITS[from_unit] / PRESSURE_UNITS[to_unit]
