"""Fixed-step closed-loop roll simulator.

Two fidelities share one RK4 integrator over the state
``(theta, theta', delta_f)``:

``design``
    Linear roll model, first-order actuator and the saturated drag curve
    ``h`` (the Lur'e plant used for control design).
``testbench``
    Quadratic-damping roll model, full lift and drag moments and the
    follow-up actuator with delay, deadband, rate and angle limits.

Wave and open-loop command inputs are sampled at the RK4 stage times and
held constant between them; a delayed closed-loop command is held over the
whole step.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .control import ControllerGains
from .fins import ActuatorParams, DelayLine, FinForceParams, SaturatedMomentCurve, ffu_rate
from .vessel import LinearRollParams, VesselParams
from .waves import SeaStateSpec, WaveRealization, discretize

FIDELITIES = ("design", "testbench")


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Scenario:
    """Everything needed to run one experiment.

    ``command`` is an open-loop fin command ``u(t)`` and takes precedence
    over ``gains``. ``nonlinearity`` replaces the saturated drag curve at
    design fidelity (any slope-restricted ``h``). ``control_period`` turns
    on a sample-and-hold controller.
    """

    vessel: VesselParams
    linear: LinearRollParams
    fins: FinForceParams
    actuator: ActuatorParams
    gains: ControllerGains | None = None
    sea: SeaStateSpec | None = None
    waves: WaveRealization | None = None
    n_harmonics: int = 10
    fidelity: str = "design"
    dt: float = 0.01
    duration: float = 600.0
    initial: tuple = (0.0, 0.0, 0.0)
    command: Callable[[float], float] | None = field(default=None, compare=False)
    nonlinearity: Callable[[float], float] | None = field(default=None, compare=False)
    control_period: float | None = None
    name: str = "scenario"

    def __post_init__(self):
        if self.fidelity not in FIDELITIES:
            raise ValueError(f"fidelity must be one of {FIDELITIES}, got {self.fidelity!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.duration != 0 and not self.duration >= 10 * self.dt:
            raise ValueError("duration must be 0 or at least 10 steps")
        if not math.isclose(self.linear.omega0, self.vessel.omega0, rel_tol=1e-9):
            raise ValueError(
                f"linear omega0={self.linear.omega0} disagrees with vessel omega0={self.vessel.omega0}")
        if self.control_period is not None and self.control_period < self.dt:
            raise ValueError("control_period must be at least dt")
        object.__setattr__(self, "initial", tuple(float(x) for x in self.initial))
        if len(self.initial) != 3:
            raise ValueError("initial state is (theta, theta_dot, delta_f)")

    @property
    def curve(self) -> SaturatedMomentCurve:
        return SaturatedMomentCurve(self.fins.zero_speed_gain(self.vessel.J_xx),
                                    self.actuator.omega_f_max)

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))

    def realization(self) -> WaveRealization | None:
        if self.waves is not None:
            return self.waves
        if self.sea is not None:
            return discretize(self.sea, self.n_harmonics)
        return None

    def with_(self, **kw) -> "Scenario":
        return replace(self, **kw)


@dataclass
class SimState:
    t: float
    theta: float
    theta_dot: float
    delta_f: float
    delay: DelayLine | None = None
    u_hold: float = 0.0
    k: int = 0

    @property
    def x(self) -> np.ndarray:
        return np.array([self.theta, self.theta_dot, self.delta_f])


def initial_state(sc: Scenario) -> SimState:
    th, thd, d = sc.initial
    delay = None
    if sc.fidelity == "testbench" and sc.command is None:
        delay = DelayLine(sc.actuator.delay_steps(sc.dt))
    return SimState(0.0, th, thd, d, delay=delay)


class _Plant:
    """Scenario compiled to float constants and one derivative closure."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        self.dt = sc.dt
        self.real = sc.realization()
        self.testbench = sc.fidelity == "testbench"
        self.n_delay = sc.actuator.delay_steps(sc.dt) if self.testbench else 0
        self.open_loop = sc.command is not None
        self.closed_loop = sc.gains is not None and not self.open_loop
        self.hold_every = (0 if sc.control_period is None
                           else max(1, int(round(sc.control_period / sc.dt))))
        # closed-loop command evaluated inside the derivative when undelayed
        self.continuous = self.closed_loop and self.n_delay == 0 and self.hold_every == 0
        v, act = sc.vessel, sc.actuator
        self.J = v.J_xx
        self.wave_gain = v.restoring if self.testbench else sc.linear.omega0**2
        self.delta_max = act.delta_f_max
        self.omega_max = act.omega_f_max
        self.f = self._testbench_rhs() if self.testbench else self._design_rhs()

    def controller(self, th, thd, d):
        g = self.sc.gains
        return (1.0 - g.T_delta * g.c) * d - g.T_delta * (g.k_p * th + g.k_d * thd)

    def _design_rhs(self):
        sc = self.sc
        n2 = 2.0 * sc.linear.n_theta
        w2 = sc.linear.omega0**2
        curve = sc.curve
        k02, wm = curve.k_02, curve.omega_f_max
        k1v2 = sc.fins.lift_gain(self.J) * sc.vessel.V**2
        T = sc.actuator.T_delta if sc.gains is None else sc.gains.T_delta
        h = sc.nonlinearity
        ctrl = self.controller if self.continuous else None
        J = self.J

        def f(th, thd, d, mw, u):
            if ctrl is not None:
                u = ctrl(th, thd, d)
            wf = (u - d) / T
            if h is None:
                w = wm if wf > wm else (-wm if wf < -wm else wf)
                mz = k02 * w * abs(w)
            else:
                mz = h(wf)
            ml = k1v2 * d
            return thd, ml + mz + mw - n2 * thd - w2 * th, wf, ml * J, mz * J, u

        return f

    def _testbench_rhs(self):
        sc = self.sc
        v, act, p = sc.vessel, sc.actuator, sc.fins
        J, N1, N2, kres = v.J_xx, v.N1, v.N2, v.restoring
        lift = 0.5 * p.rho * v.V**2 * p.S_f * p.l_f * p.C_delta
        zero = p.l_f * p.S_f * p.k
        ctrl = self.controller if self.continuous else None

        def f(th, thd, d, Mw, u):
            if ctrl is not None:
                u = ctrl(th, thd, d)
            wf = ffu_rate(d, u, act)
            ml = lift * d
            mz = zero * wf * abs(wf)
            thdd = (Mw + ml + mz - 2.0 * N1 * thd - N2 * abs(thd) * thd - kres * th) / J
            return thd, thdd, wf, ml, mz, u

        return f

    def wave_at(self, t):
        if self.real is None:
            return np.zeros_like(np.asarray(t, dtype=float))
        return self.wave_gain * self.real.slope(t)

    def command_at(self, t):
        """Open-loop command seen by the actuator, including transport delay."""
        t = np.atleast_1d(np.asarray(t, dtype=float)) - self.n_delay * self.dt
        cmd = self.sc.command
        return np.array([cmd(x) if x >= 0 else 0.0 for x in t])

    def sampled_command(self, state: SimState) -> float:
        """Command held over the coming step (delay line and/or hold)."""
        if self.hold_every and state.k % self.hold_every == 0:
            state.u_hold = self.controller(state.theta, state.theta_dot, state.delta_f)
        u = state.u_hold if self.hold_every else self.controller(
            state.theta, state.theta_dot, state.delta_f)
        if state.delay is not None:
            u = state.delay.push(u)
        return u

    def rk4(self, th, thd, d, m0, m1, m2, u0, u1, u2):
        f, h = self.f, self.dt
        a = f(th, thd, d, m0, u0)
        b = f(th + 0.5 * h * a[0], thd + 0.5 * h * a[1], d + 0.5 * h * a[2], m1, u1)
        c = f(th + 0.5 * h * b[0], thd + 0.5 * h * b[1], d + 0.5 * h * b[2], m1, u1)
        e = f(th + h * c[0], thd + h * c[1], d + h * c[2], m2, u2)
        th = th + h / 6.0 * (a[0] + 2.0 * b[0] + 2.0 * c[0] + e[0])
        thd = thd + h / 6.0 * (a[1] + 2.0 * b[1] + 2.0 * c[1] + e[1])
        d = d + h / 6.0 * (a[2] + 2.0 * b[2] + 2.0 * c[2] + e[2])
        if self.testbench:
            d = min(max(d, -self.delta_max), self.delta_max)
        return th, thd, d, a

    def _check(self, t, th, thd, d):
        if not (math.isfinite(th) and math.isfinite(thd) and math.isfinite(d)):
            raise SimulationError(
                f"non-finite state at t={t:.6g}: theta={th}, theta_dot={thd}, delta_f={d} "
                f"(dt={self.dt}, scenario={self.sc.name!r})")
        if abs(th) > 1e6 or abs(thd) > 1e6:
            raise SimulationError(f"state diverged at t={t:.6g}: theta={th}, theta_dot={thd}")


def step(state: SimState, scenario: Scenario, plant: _Plant | None = None) -> SimState:
    """Advance ``state`` by one RK4 step of ``scenario.dt``."""
    p = plant or _Plant(scenario)
    dt = p.dt
    t = state.t
    m0, m1, m2 = p.wave_at(np.array([t, t + 0.5 * dt, t + dt]))
    new = replace(state, delay=None if state.delay is None else state.delay.copy())
    if p.open_loop:
        u0, u1, u2 = p.command_at(np.array([t, t + 0.5 * dt, t + dt]))
    elif p.continuous or not p.closed_loop:
        u0 = u1 = u2 = 0.0
    else:
        u0 = u1 = u2 = p.sampled_command(new)
    th, thd, d, _ = p.rk4(state.theta, state.theta_dot, state.delta_f, m0, m1, m2, u0, u1, u2)
    p._check(t + dt, th, thd, d)
    new.t, new.theta, new.theta_dot, new.delta_f, new.k = (
        (state.k + 1) * dt, th, thd, d, state.k + 1)
    return new


COLUMNS = ("t", "theta", "theta_dot", "delta_f", "omega_f", "u", "M_lift", "M_zero", "M_u", "M_w")


@dataclass
class SimRecord:
    """Trajectory columns (see ``COLUMNS``) plus summary metrics."""

    data: dict
    metrics: dict
    omega_f_max: float
    delta_f_max: float
    fidelity: str
    name: str = "scenario"

    def __getattr__(self, key):
        try:
            return self.__dict__["data"][key]
        except KeyError:
            raise AttributeError(key) from None

    def __len__(self):
        return len(self.data["t"])

    @property
    def states(self) -> np.ndarray:
        return np.column_stack([self.data["theta"], self.data["theta_dot"], self.data["delta_f"]])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(COLUMNS)
            for row in zip(*(self.data[c] for c in COLUMNS)):
                w.writerow([repr(float(x)) for x in row])


def run(scenario: Scenario, initial: SimState | None = None) -> SimRecord:
    p = _Plant(scenario)
    n = scenario.steps
    act = scenario.actuator
    if n == 0:
        empty = {c: np.zeros(0) for c in COLUMNS}
        return SimRecord(empty, {}, act.omega_f_max, act.delta_f_max, scenario.fidelity, scenario.name)

    dt = p.dt
    state = initial or initial_state(scenario)
    half = state.t + 0.5 * dt * np.arange(2 * n + 1)
    mw = p.wave_at(half)
    ucmd = p.command_at(half) if p.open_loop else None
    cols = {c: np.empty(n + 1) for c in COLUMNS}
    th, thd, d = state.theta, state.theta_dot, state.delta_f

    for k in range(n + 1):
        m0 = mw[2 * k]
        if p.open_loop:
            u0 = ucmd[2 * k]
            u1, u2 = (ucmd[2 * k + 1], ucmd[2 * k + 2]) if k < n else (u0, u0)
        elif p.continuous or not p.closed_loop:
            u0 = u1 = u2 = 0.0
        else:
            state.theta, state.theta_dot, state.delta_f, state.k = th, thd, d, k
            u0 = u1 = u2 = p.sampled_command(state)
        if k < n:
            th1, thd1, d1, a = p.rk4(th, thd, d, m0, mw[2 * k + 1], mw[2 * k + 2], u0, u1, u2)
            p._check((k + 1) * dt, th1, thd1, d1)
        else:
            a = p.f(th, thd, d, m0, u0)
        cols["t"][k] = state.t + k * dt
        cols["theta"][k] = th
        cols["theta_dot"][k] = thd
        cols["delta_f"][k] = d
        cols["omega_f"][k] = a[2]
        cols["M_lift"][k] = a[3]
        cols["M_zero"][k] = a[4]
        cols["u"][k] = a[5] if p.closed_loop or p.open_loop else 0.0
        if k < n:
            th, thd, d = th1, thd1, d1

    cols["M_u"] = cols["M_lift"] + cols["M_zero"]
    cols["M_w"] = mw[::2] * (1.0 if p.testbench else p.J)
    rec = SimRecord(cols, {}, act.omega_f_max, act.delta_f_max, scenario.fidelity, scenario.name)
    rec.metrics = compute_metrics(rec)
    return rec


def log_decrement(theta, t=None) -> float:
    """Mean logarithmic decrement between successive positive peaks."""
    x = np.asarray(theta, dtype=float)
    i = np.flatnonzero((x[1:-1] > x[:-2]) & (x[1:-1] >= x[2:]) & (x[1:-1] > 0)) + 1
    if len(i) < 3:
        return math.nan
    # parabolic refinement of the sampled peaks
    y0, y1, y2 = x[i - 1], x[i], x[i + 1]
    den = y0 - 2 * y1 + y2
    peaks = y1 - 0.125 * (y2 - y0) ** 2 / np.where(den == 0, -1e-300, den)
    peaks = peaks[peaks > 0]
    if len(peaks) < 3:
        return math.nan
    return float(np.mean(np.log(peaks[:-1] / peaks[1:])))


def damping_ratio_estimate(theta) -> float:
    dec = log_decrement(theta)
    if not math.isfinite(dec) or dec <= 0:
        return math.nan
    return dec / math.sqrt(4.0 * math.pi**2 + dec**2)


def _limit_fractions(rec: SimRecord):
    if len(rec) == 0:
        return 0.0, 0.0
    tol = 1.0 - 1e-9
    rate = float(np.mean(np.abs(rec.data["omega_f"]) >= rec.omega_f_max * tol))
    angle = float(np.mean(np.abs(rec.data["delta_f"]) >= rec.delta_f_max * tol))
    return rate, angle


def compute_metrics(rec: SimRecord) -> dict:
    th = rec.data["theta"]
    rate, angle = _limit_fractions(rec)
    return {
        "roll_rms": float(np.sqrt(np.mean(th**2))),
        "roll_max": float(np.max(np.abs(th))),
        "damping_ratio": damping_ratio_estimate(th),
        "rate_saturation_fraction": rate,
        "angle_saturation_fraction": angle,
        "samples": len(th),
    }


@dataclass(frozen=True)
class AuditReport:
    rate_fraction: float
    angle_fraction: float
    threshold: float
    passed: bool

    def as_dict(self) -> dict:
        return {"rate_saturation_fraction": self.rate_fraction,
                "angle_saturation_fraction": self.angle_fraction,
                "threshold": self.threshold, "pass": self.passed}


def saturation_audit(record: SimRecord, threshold: float = 0.01) -> AuditReport:
    """Share of samples with fin rate or angle at its limit."""
    rate, angle = _limit_fractions(record)
    return AuditReport(rate, angle, threshold, rate < threshold and angle < threshold)
