"""Fin moments, the saturated rate-moment curve and actuator models."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FinForceParams:
    """Geometry and force coefficients of the fin set.

    ``S_f`` is the combined area of all fins acting together (two fins
    driven in anti-phase contribute additively to the roll moment).
    """

    S_f: float
    l_f: float
    C_delta: float
    k: float
    rho: float = 1025.0

    def __post_init__(self):
        for name in ("rho", "S_f", "l_f", "C_delta", "k"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    def zero_speed_gain(self, J_xx: float) -> float:
        """Normalized drag gain ``k_02 = l_f S_f k / J_xx``."""
        return self.l_f * self.S_f * self.k / J_xx

    def lift_gain(self, J_xx: float) -> float:
        """Normalized lift gain ``k_1 = rho S_f l_f C_delta / (2 J_xx)``."""
        return self.rho * self.S_f * self.l_f * self.C_delta / (2.0 * J_xx)

    @classmethod
    def from_gains(cls, k_02, J_xx, S_f, l_f, C_delta, rho=1025.0):
        """Back out the drag coefficient ``k`` from an identified ``k_02``."""
        return cls(S_f=S_f, l_f=l_f, C_delta=C_delta, k=k_02 * J_xx / (l_f * S_f), rho=rho)


@dataclass(frozen=True)
class ActuatorParams:
    """Electrohydraulic fin actuator with full-follow-up loop.

    ``K_v`` defaults to ``1 / T_delta`` so the unsaturated loop reduces to
    the first-order lag used for control design.
    """

    T_delta: float
    omega_f_max: float
    delta_f_max: float
    tau: float = 0.0
    deadband: float = 0.0
    K_v: float | None = None

    def __post_init__(self):
        if self.K_v is None:
            object.__setattr__(self, "K_v", 1.0 / self.T_delta)
        for name in ("T_delta", "omega_f_max", "delta_f_max", "K_v"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("tau", "deadband"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")

    @property
    def full_stroke_time(self) -> float:
        return 2.0 * self.delta_f_max / self.omega_f_max

    def delay_steps(self, dt: float) -> int:
        return int(round(self.tau / dt))


@dataclass(frozen=True)
class SaturatedMomentCurve:
    """Zero-speed moment ``k_02 w |w|`` clipped at ``+-h_max``.

    Calling the instance evaluates the curve.
    """

    k_02: float
    omega_f_max: float

    def __post_init__(self):
        if not self.k_02 > 0 or not self.omega_f_max > 0:
            raise ValueError("k_02 and omega_f_max must be positive")

    @property
    def h_max(self) -> float:
        # same product as the clipped branch of saturated_h, bit for bit
        return self.k_02 * self.omega_f_max * self.omega_f_max

    @property
    def k_f(self) -> float:
        """Upper slope bound of the curve, ``2 k_02 omega_f_max``."""
        return 2.0 * self.k_02 * self.omega_f_max

    def __call__(self, omega_f):
        return saturated_h(omega_f, self)


def lift_moment(delta_f, V_f, p: FinForceParams):
    return 0.5 * p.rho * V_f**2 * p.S_f * p.l_f * p.C_delta * delta_f


def zero_speed_moment(omega_f, p: FinForceParams):
    return p.l_f * p.S_f * p.k * omega_f * np.abs(omega_f)


def saturated_h(omega_f, c: SaturatedMomentCurve):
    w = np.clip(omega_f, -c.omega_f_max, c.omega_f_max)
    out = c.k_02 * w * np.abs(w)
    return float(out) if np.ndim(out) == 0 else out


def actuator_simple_step(delta_f: float, u: float, T_delta: float, dt: float) -> float:
    """Advance ``delta_f' = (u - delta_f) / T_delta`` exactly over ``dt``.

    ``u`` is held constant across the step.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    return u + (delta_f - u) * math.exp(-dt / T_delta)


class DelayLine:
    """Fixed-capacity ring buffer delaying a sampled command by ``n`` steps."""

    def __init__(self, n: int, initial: float = 0.0):
        if n < 0:
            raise ValueError("delay length must be non-negative")
        self.n = n
        self._buf = np.full(max(n, 1), float(initial))
        self._head = 0

    def push(self, u: float) -> float:
        """Store ``u`` and return the command issued ``n`` steps earlier."""
        if self.n == 0:
            return u
        out = self._buf[self._head]
        self._buf[self._head] = u
        self._head = (self._head + 1) % self.n
        return float(out)

    def copy(self) -> "DelayLine":
        other = DelayLine.__new__(DelayLine)
        other.n = self.n
        other._buf = self._buf.copy()
        other._head = self._head
        return other


@dataclass(frozen=True)
class ActuatorState:
    delta_f: float = 0.0
    omega_f: float = 0.0


def ffu_rate(delta_f: float, u_delayed: float, p: ActuatorParams) -> float:
    """Fin rate commanded by the follow-up loop at angle ``delta_f``."""
    e = u_delayed - delta_f
    if abs(e) < p.deadband:
        return 0.0
    w = p.K_v * e
    if w > p.omega_f_max:
        w = p.omega_f_max
    elif w < -p.omega_f_max:
        w = -p.omega_f_max
    # stop-and-hold: only motion further into the hard stop is blocked
    if (delta_f >= p.delta_f_max and w > 0.0) or (delta_f <= -p.delta_f_max and w < 0.0):
        return 0.0
    return w


def actuator_ffu_step(state: ActuatorState, u_history: DelayLine, u: float,
                      p: ActuatorParams, dt: float):
    """One step of the nonlinear actuator.

    ``u`` is pushed into ``u_history`` and the command delayed by
    ``u_history.n`` steps drives the loop, held over the step. Returns the
    new state and the mean fin rate over the step.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if u_history.n != p.delay_steps(dt):
        raise ValueError(
            f"delay buffer holds {u_history.n} steps, actuator needs {p.delay_steps(dt)}")
    u_del = u_history.push(u)
    d = state.delta_f
    k1 = ffu_rate(d, u_del, p)
    k2 = ffu_rate(d + 0.5 * dt * k1, u_del, p)
    k3 = ffu_rate(d + 0.5 * dt * k2, u_del, p)
    k4 = ffu_rate(d + dt * k3, u_del, p)
    d_new = d + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    d_new = min(max(d_new, -p.delta_f_max), p.delta_f_max)
    omega = (d_new - d) / dt
    return ActuatorState(delta_f=d_new, omega_f=omega), omega
