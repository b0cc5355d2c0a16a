"""Roll-motion models of the vessel.

Nonlinear single-DOF roll equation with quadratic damping, its linearized
damped-pendulum form, and the describing-function gain that links the two.
All angles are in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

G = 9.81


@dataclass(frozen=True)
class VesselParams:
    """Physical roll coefficients.

    Parameters
    ----------
    J_xx : float
        Roll moment of inertia including added mass [kg m^2].
    m : float
        Displacement mass [kg].
    h_theta : float
        Transverse metacentric height [m].
    N1, N2 : float
        Linear [N m s/rad] and quadratic [N m s^2/rad^2] damping
        coefficients of ``f_d = 2 N1 x + N2 |x| x``.
    g : float
        Gravity [m/s^2].
    V : float
        Forward speed [m/s]; also used as fin inflow speed.
    """

    J_xx: float
    m: float
    h_theta: float
    N1: float = 0.0
    N2: float = 0.0
    g: float = G
    V: float = 0.0

    def __post_init__(self):
        for name in ("J_xx", "m", "g", "h_theta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("N1", "N2", "V"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")

    @property
    def restoring(self) -> float:
        """Restoring stiffness ``m g h_theta`` [N m/rad]."""
        return self.m * self.g * self.h_theta

    @property
    def omega0(self) -> float:
        return math.sqrt(self.restoring / self.J_xx)

    @classmethod
    def from_linear(cls, omega0, nu_theta, m, h_theta, quadratic_share=0.0,
                    reference_rate=1.0, g=G, V=0.0):
        """Build physical coefficients reproducing a linear model.

        ``quadratic_share`` of the equivalent damping at roll-rate amplitude
        ``reference_rate`` is carried by the quadratic term.
        """
        if not 0.0 <= quadratic_share < 1.0:
            raise ValueError("quadratic_share must lie in [0, 1)")
        J_xx = m * g * h_theta / omega0**2
        N_theta = 2.0 * nu_theta * omega0 * J_xx
        N1 = 0.5 * (1.0 - quadratic_share) * N_theta
        N2 = quadratic_share * N_theta / (8.0 / (3.0 * math.pi) * reference_rate)
        return cls(J_xx=J_xx, m=m, h_theta=h_theta, N1=N1, N2=N2, g=g, V=V)


@dataclass(frozen=True)
class LinearRollParams:
    """Coefficients of ``theta'' + 2 n_theta theta' + omega0^2 theta = m``.

    ``n_theta`` and ``T0`` are derived when omitted and checked for
    consistency with ``nu_theta`` and ``omega0`` when given.
    """

    omega0: float
    nu_theta: float
    n_theta: float | None = None
    T0: float | None = field(default=None)

    def __post_init__(self):
        if not self.omega0 > 0 or not math.isfinite(self.omega0):
            raise ValueError(f"omega0 must be positive and finite, got {self.omega0}")
        if not self.nu_theta >= 0:
            raise ValueError(f"nu_theta must be non-negative, got {self.nu_theta}")
        n = self.nu_theta * self.omega0
        T0 = 2.0 * math.pi / self.omega0
        if self.n_theta is None:
            object.__setattr__(self, "n_theta", n)
        elif not math.isclose(self.n_theta, n, rel_tol=1e-12, abs_tol=1e-15):
            raise ValueError(f"n_theta={self.n_theta} inconsistent with nu_theta*omega0={n}")
        if self.T0 is None:
            object.__setattr__(self, "T0", T0)
        elif not math.isclose(self.T0, T0, rel_tol=1e-12):
            raise ValueError(f"T0={self.T0} inconsistent with 2*pi/omega0={T0}")

    @classmethod
    def from_period(cls, T0: float, nu_theta: float) -> "LinearRollParams":
        return cls(omega0=2.0 * math.pi / T0, nu_theta=nu_theta)

    @classmethod
    def from_vessel(cls, params: VesselParams, amplitude=None, omega=None):
        """Linearize the vessel model.

        Without an operating point only the linear damping term is kept;
        with ``(amplitude, omega)`` the quadratic term enters through its
        describing-function gain. The damping ratio follows from matching
        ``N_theta theta'`` to ``2 nu_theta omega0 J_xx theta'``.
        """
        if amplitude is None:
            N_theta = 2.0 * params.N1
        else:
            N_theta = equivalent_damping(amplitude, omega, params)
        w0 = params.omega0
        return cls(omega0=w0, nu_theta=N_theta / (2.0 * params.J_xx * w0))


def damping_moment(theta_dot, params: VesselParams):
    """Hydrodynamic roll damping ``2 N1 x + N2 |x| x`` [N m]."""
    x = np.asarray(theta_dot, dtype=float)
    out = 2.0 * params.N1 * x + params.N2 * np.abs(x) * x
    return float(out) if out.ndim == 0 else out


def equivalent_damping(amplitude: float, omega: float, params: VesselParams) -> float:
    """First-harmonic equivalent of the damping moment.

    For ``theta = A sin(omega t)`` the quadratic term is replaced by the
    gain ``8/(3 pi) N2 A omega``.
    """
    if not amplitude > 0 or not omega > 0:
        raise ValueError("amplitude and omega must be positive")
    return 2.0 * params.N1 + 8.0 / (3.0 * math.pi) * params.N2 * amplitude * omega


def nonlinear_roll_accel(theta, theta_dot, M_u, M_w, params: VesselParams):
    return (M_w + M_u - damping_moment(theta_dot, params) - params.restoring * theta) / params.J_xx


def linear_roll_accel(theta, theta_dot, m_u, m_w, lin: LinearRollParams):
    return m_u + m_w - 2.0 * lin.n_theta * theta_dot - lin.omega0**2 * theta
