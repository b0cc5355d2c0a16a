"""Linear roll-damping controller and its tuning."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .fins import SaturatedMomentCurve
from .stability import LoopTransfer, circle_criterion_check
from .vessel import LinearRollParams


class TuningError(ValueError):
    pass


@dataclass(frozen=True)
class ControllerGains:
    """Gains of ``u = (1 - T_delta c) delta_f - T_delta (k_p theta + k_d theta')``."""

    k_p: float
    k_d: float
    c: float
    T_delta: float

    def __post_init__(self):
        if not self.c > 0 or not self.T_delta > 0:
            raise ValueError("c and T_delta must be positive")
        if self.k_p < 0 or self.k_d < 0:
            raise ValueError("k_p and k_d must be non-negative")

    def scaled(self, factor: float) -> "ControllerGains":
        """Proportional and derivative gains multiplied by ``factor``."""
        return replace(self, k_p=self.k_p * factor, k_d=self.k_d * factor)


def command(theta, theta_dot, delta_f, g: ControllerGains):
    return (1.0 - g.T_delta * g.c) * delta_f - g.T_delta * (g.k_p * theta + g.k_d * theta_dot)


def desired_rate(theta, theta_dot, g: ControllerGains):
    return -g.k_p * theta - g.k_d * theta_dot


def harmonic_gain_of_h(amplitude: float, curve: SaturatedMomentCurve) -> float:
    """Describing-function gain of the saturated curve for ``A sin(wt)``.

    Closed form; above ``omega_f_max`` the input spends the arc beyond
    ``asin(omega_f_max / A)`` on the plateau ``h_max``.
    """
    A = amplitude
    if not A > 0:
        raise ValueError("amplitude must be positive")
    k, wm = curve.k_02, curve.omega_f_max
    if A <= wm:
        return 8.0 / (3.0 * math.pi) * k * A
    cos1 = math.sqrt(1.0 - (wm / A) ** 2)
    quad_arc = k * A * A * (2.0 / 3.0 - cos1 + cos1**3 / 3.0)
    return 4.0 / (math.pi * A) * (quad_arc + curve.h_max * cos1)


def closed_loop_polynomial(g: ControllerGains, lin: LinearRollParams, k_eq: float) -> np.ndarray:
    """Characteristic polynomial with ``h`` replaced by the gain ``k_eq``."""
    n, w0 = lin.n_theta, lin.omega0
    return np.array([
        1.0,
        2.0 * n + g.c + k_eq * g.k_d,
        w0**2 + 2.0 * n * g.c + k_eq * g.k_p,
        g.c * w0**2,
    ])


def tune_by_pole_placement(lin: LinearRollParams, curve: SaturatedMomentCurve,
                           design_amplitude: float, target_poles, T_delta: float) -> ControllerGains:
    """Match the harmonically linearized cubic to ``target_poles``.

    The closed-loop polynomial is
    ``s^3 + (2n + c + k k_d) s^2 + (w0^2 + 2nc + k k_p) s + c w0^2``,
    which is triangular in ``(c, k_d, k_p)``.
    """
    poles = np.asarray(target_poles, dtype=complex)
    if poles.shape != (3,):
        raise TuningError("expected three target poles")
    if np.any(poles.real >= 0):
        raise TuningError(f"target poles must lie in the open left half-plane: {poles}")
    coeffs = np.poly(poles)
    if np.max(np.abs(coeffs.imag)) > 1e-9 * np.max(np.abs(coeffs)):
        raise TuningError("target poles must be closed under conjugation")
    _, a2, a1, a0 = coeffs.real
    k_eq = harmonic_gain_of_h(design_amplitude, curve)
    n, w0 = lin.n_theta, lin.omega0
    c = a0 / w0**2
    k_d = (a2 - 2.0 * n - c) / k_eq
    k_p = (a1 - w0**2 - 2.0 * n * c) / k_eq
    tol = 1e-9 * max(1.0, abs(k_p), abs(k_d))
    if k_d < -tol or k_p < -tol:
        raise TuningError(
            f"targets need negative gains (k_p={k_p:.4g}, k_d={k_d:.4g}) at k_eq={k_eq:.4g}")
    return ControllerGains(k_p=max(k_p, 0.0), k_d=max(k_d, 0.0), c=c, T_delta=T_delta)


@dataclass(frozen=True)
class TuningReport:
    gains: ControllerGains
    steps: int
    margin: float
    k_eq: float | None = None
    design_amplitude: float | None = None

    def as_dict(self) -> dict:
        g = self.gains
        return {"k_p": g.k_p, "k_d": g.k_d, "c": g.c, "T_delta": g.T_delta,
                "shrink_steps": self.steps, "criterion_margin": self.margin,
                "k_eq": self.k_eq, "design_amplitude": self.design_amplitude}


def shrink_until_pass(g: ControllerGains, lin: LinearRollParams, curve: SaturatedMomentCurve,
                      shrink: float = 0.9, max_iter: int = 200, grid=None) -> TuningReport:
    if not 0 < shrink < 1:
        raise ValueError("shrink must lie in (0, 1)")
    base = LoopTransfer.from_parts(g, lin)
    for n in range(max_iter + 1):
        factor = shrink**n
        rep = circle_criterion_check(base.scaled(factor), curve.k_f, grid)
        if rep.passed:
            out = g if n == 0 else g.scaled(factor)
            return TuningReport(gains=out, steps=n, margin=rep.margin)
    raise TuningError(f"criterion still violated after {max_iter} reductions")


def enforce_criterion(g: ControllerGains, lin: LinearRollParams, curve: SaturatedMomentCurve,
                      shrink: float = 0.9, max_iter: int = 200, grid=None) -> ControllerGains:
    """Reduce ``k_p`` and ``k_d`` geometrically until the circle criterion holds."""
    return shrink_until_pass(g, lin, curve, shrink, max_iter, grid).gains


def design_amplitude_from_rates(omega_f_star) -> float:
    """Amplitude of the sinusoid with the same RMS as ``omega_f_star``."""
    w = np.asarray(omega_f_star, dtype=float)
    return float(math.sqrt(2.0 * np.mean(w**2)))
