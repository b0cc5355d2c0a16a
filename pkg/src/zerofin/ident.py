"""Calibration maneuvers and least-squares identification of the roll model.

The identified model is

    theta'' = -2 n_theta theta' - omega0^2 theta + k_1 V_f^2 delta_f
              + k_02 delta_f' |delta_f'|
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal


class IdentificationError(ValueError):
    pass


class RankDeficientError(IdentificationError):
    def __init__(self, message, condition_number):
        super().__init__(message)
        self.condition_number = condition_number


@dataclass(frozen=True)
class ManeuverStage:
    """A harmonic command stage, or a zero hold when ``period`` is None.

    ``duration`` is in seconds; ``cycles`` (harmonic stages only) sets it
    to a whole number of periods instead.
    """

    amplitude: float
    period: float | None = None
    duration: float | None = None
    cycles: float | None = None

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if self.period is not None and not self.period > 0:
            raise ValueError("period must be positive")
        if self.cycles is not None:
            if self.period is None:
                raise ValueError("cycles requires a period")
            object.__setattr__(self, "duration", self.cycles * self.period)
        if self.duration is None or not self.duration > 0:
            raise ValueError("stage duration must be positive")

    @property
    def is_hold(self) -> bool:
        return self.period is None or self.amplitude == 0


def calibration_maneuver() -> list[ManeuverStage]:
    """Eight-stage calibration maneuver: 10 and 20 deg at 10, 8, 5 s periods."""
    stages = []
    for deg in (10.0, 20.0):
        a = math.radians(deg)
        stages += [ManeuverStage(a, period=T, cycles=5) for T in (10.0, 8.0, 5.0)]
        stages.append(ManeuverStage(0.0, duration=30.0))
    return stages


class Maneuver:
    """Piecewise command signal ``u(t)`` built from consecutive stages."""

    def __init__(self, stages):
        stages = list(stages)
        if not stages:
            raise ValueError("maneuver needs at least one stage")
        self.stages = stages
        self.starts = np.concatenate([[0.0], np.cumsum([s.duration for s in stages])])

    @property
    def duration(self) -> float:
        return float(self.starts[-1])

    def __call__(self, t: float) -> float:
        i = int(np.searchsorted(self.starts, t, side="right")) - 1
        if i < 0 or i >= len(self.stages):
            return 0.0
        s = self.stages[i]
        if s.is_hold:
            return 0.0
        return s.amplitude * math.sin(2.0 * math.pi / s.period * (t - self.starts[i]))

    def sample(self, t):
        return np.array([self(x) for x in np.asarray(t, dtype=float)])


def generate_maneuver(stages) -> Maneuver:
    return Maneuver(stages)


_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def _stencil(x, kernel, dt, order):
    out = np.full(len(x), np.nan)
    out[2:-2] = np.correlate(x, kernel, mode="valid") / dt**order
    return out


def lowpass(x, dt: float, cutoff: float | None):
    """Zero-phase 2nd-order Butterworth filter, run forward and backward."""
    x = np.asarray(x, dtype=float)
    if cutoff is None:
        return x.copy()
    nyq = math.pi / dt
    if not 0 < cutoff < nyq:
        raise IdentificationError(f"cutoff {cutoff} rad/s outside (0, {nyq})")
    b, a = signal.butter(2, cutoff / nyq)
    return signal.filtfilt(b, a, x, method="gust")


def _trim(dt, cutoff):
    # filter transient near the record ends, plus the stencil half-width
    return 2 + (0 if cutoff is None else int(math.ceil(8.0 / (cutoff * dt))))


def estimate_rate(x, dt: float, cutoff: float | None = None):
    """First derivative by the 5-point central stencil; NaN at trimmed ends."""
    x = np.asarray(x, dtype=float)
    if len(x) < 5:
        raise IdentificationError("series too short (need >= 5 samples)")
    out = _stencil(lowpass(x, dt, cutoff), _D1, dt, 1)
    k = _trim(dt, cutoff)
    out[:k] = out[len(out) - k:] = np.nan
    return out


def estimate_accel(theta, dt: float, cutoff: float | None = None):
    """Second derivative by the 5-point central stencil after optional smoothing.

    Returns an array of the input length with NaN in the trimmed end samples.
    """
    theta = np.asarray(theta, dtype=float)
    if len(theta) < 5:
        raise IdentificationError("series too short (need >= 5 samples)")
    out = _stencil(lowpass(theta, dt, cutoff), _D2, dt, 2)
    k = _trim(dt, cutoff)
    out[:k] = out[len(out) - k:] = np.nan
    return out


@dataclass(frozen=True)
class IdentResult:
    omega0_hat: float
    nu_theta_hat: float
    k02_hat: float
    k1_hat: float | None
    residual_rms: float
    condition_number: float
    valid: bool
    n_samples: int

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _regress(y, drag, theta_dot, theta, lift=None, max_condition=1e10) -> IdentResult:
    X = [theta_dot, theta, drag] + ([] if lift is None else [lift])
    X = np.column_stack(X)
    ok = np.isfinite(y) & np.all(np.isfinite(X), axis=1)
    X, y = X[ok], y[ok]
    if len(y) < 10 * X.shape[1]:
        raise IdentificationError(f"need >= {10 * X.shape[1]} usable samples, got {len(y)}")

    scale = np.sqrt(np.mean(X**2, axis=0))
    if np.any(scale == 0):
        raise RankDeficientError("regressor column identically zero", math.inf)
    Xs = X / scale
    sv = np.linalg.svd(Xs, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if cond > max_condition:
        raise RankDeficientError(f"regressor matrix rank deficient (condition {cond:.3g})", cond)
    coef, *_ = np.linalg.lstsq(Xs, y, rcond=None)
    coef = coef / scale
    resid = y - X @ coef

    two_n, w0sq, k02 = -coef[0], -coef[1], coef[2]
    valid = bool(w0sq > 0)
    w0 = math.sqrt(w0sq) if valid else math.nan
    return IdentResult(omega0_hat=w0, nu_theta_hat=float(two_n / (2.0 * w0)) if valid else math.nan,
                       k02_hat=float(k02), k1_hat=float(coef[3]) if lift is not None else None,
                       residual_rms=float(np.sqrt(np.mean(resid**2))), condition_number=cond,
                       valid=valid, n_samples=int(len(y)))


def _speed(V_f, n):
    return np.zeros(n) if V_f is None else np.broadcast_to(np.asarray(V_f, dtype=float), (n,))


def fit_least_squares(theta, theta_dot, theta_ddot, delta_f, delta_f_dot, V_f=None,
                      v_threshold: float = 0.1, max_condition: float = 1e10) -> IdentResult:
    """Estimate the roll-model coefficients by linear least squares.

    Regressors ``[theta', theta, delta_f' |delta_f'|, V_f^2 delta_f]`` are
    scaled to unit RMS and solved by SVD. The lift column is dropped when
    ``max |V_f| < v_threshold``. Rows containing NaN are ignored.
    """
    cols = [np.asarray(x, dtype=float) for x in (theta, theta_dot, theta_ddot, delta_f, delta_f_dot)]
    n = len(cols[0])
    if any(len(x) != n for x in cols):
        raise IdentificationError("all series must have the same length")
    th, thd, thdd, d, dd = cols
    V = _speed(V_f, n)
    lift = V**2 * d if np.max(np.abs(V)) >= v_threshold else None
    return _regress(thdd, dd * np.abs(dd), thd, th, lift, max_condition)


def identify_series(t, theta, delta_f, V_f=None, omega0_prior: float = 2 * math.pi / 11.0,
                    cutoff="auto", v_threshold: float = 0.1,
                    max_condition: float = 1e10) -> IdentResult:
    """Identify from sampled roll angle and fin angle.

    Derivatives come from 5-point stencils. The same zero-phase filter is
    applied to the target and to every regressor, so it cancels in the
    regression; the drag regressor is formed from the raw fin rate and
    filtered afterwards. ``cutoff="auto"`` uses ``4 omega0_prior``.
    """
    t = np.asarray(t, dtype=float)
    steps = np.diff(t)
    dt = float(np.mean(steps))
    if np.max(np.abs(steps - dt)) > 1e-6 * dt:
        raise IdentificationError("series must be uniformly sampled")
    if cutoff == "auto":
        cutoff = 4.0 * omega0_prior
    theta = np.asarray(theta, dtype=float)
    delta_f = np.asarray(delta_f, dtype=float)
    n = len(t)
    if len(theta) != n or len(delta_f) != n:
        raise IdentificationError("all series must have the same length")
    V = _speed(V_f, n)

    dd = estimate_rate(delta_f, dt)
    q = np.nan_to_num(dd * np.abs(dd))
    k = _trim(dt, cutoff) + 2
    edge = np.zeros(n, dtype=bool)
    edge[:k] = edge[n - k:] = True

    def filt(x):
        out = lowpass(x, dt, cutoff)
        out[edge] = np.nan
        return out

    lift = filt(V**2 * delta_f) if np.max(np.abs(V)) >= v_threshold else None
    return _regress(estimate_accel(theta, dt, cutoff), filt(q), estimate_rate(theta, dt, cutoff),
                    filt(theta), lift, max_condition)
