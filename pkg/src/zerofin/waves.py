"""Polyharmonic wave-induced roll disturbance.

Sea elevation follows a two-parameter Pierson-Moskowitz spectrum (optionally
JONSWAP-enhanced), discretized into ``N`` harmonics with random phases and
mapped to effective sea-slope amplitudes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate

from .vessel import G, VesselParams

SPECTRA = ("pierson-moskowitz", "jonswap")


@dataclass(frozen=True)
class SeaStateSpec:
    """Parametric sea state.

    ``attenuation_depth`` is the effective depth [m] at which the wave
    pressure acts on the hull; slope amplitudes are scaled by
    ``exp(-k_i d)`` (Smith correction). Zero gives the raw surface slope.
    """

    Hs: float
    Tz: float
    spectrum_kind: str = "pierson-moskowitz"
    gamma: float = 3.3
    encounter_angle: float = 90.0
    seed: int = 0
    attenuation_depth: float = 0.0

    def __post_init__(self):
        if not self.Hs > 0 or not self.Tz > 0:
            raise ValueError("Hs and Tz must be positive")
        if not self.gamma >= 1:
            raise ValueError("gamma must be >= 1")
        if self.spectrum_kind not in SPECTRA:
            raise ValueError(f"unknown spectrum {self.spectrum_kind!r}, expected one of {SPECTRA}")
        if self.attenuation_depth < 0:
            raise ValueError("attenuation_depth must be non-negative")

    @property
    def pm_coefficients(self) -> tuple[float, float]:
        A = 4.0 * math.pi**3 * self.Hs**2 / self.Tz**4
        B = 16.0 * math.pi**3 / self.Tz**4
        return A, B

    @property
    def peak_frequency(self) -> float:
        _, B = self.pm_coefficients
        return (0.8 * B) ** 0.25


@dataclass(frozen=True)
class WaveRealization:
    """Harmonics of the effective sea slope ``sum b_i sin(omega_i t + phi_i)``."""

    b: np.ndarray
    omega: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        b, w, p = (np.asarray(x, dtype=float).ravel() for x in (self.b, self.omega, self.phi))
        if not (len(b) == len(w) == len(p)) or len(b) == 0:
            raise ValueError("b, omega and phi must be non-empty and of equal length")
        if np.any(np.diff(w) <= 0):
            raise ValueError("omega must be strictly increasing")
        p = np.mod(p, 2.0 * np.pi)
        for name, arr in (("b", b), ("omega", w), ("phi", p)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def N(self) -> int:
        return len(self.b)

    def slope(self, t):
        """Effective wave slope ``theta_e(t)`` [rad]; ``t`` may be an array."""
        t = np.asarray(t, dtype=float)
        out = np.sin(np.multiply.outer(t, self.omega) + self.phi) @ self.b
        return float(out) if out.ndim == 0 else out

    @property
    def variance(self) -> float:
        return float(np.sum(self.b**2) / 2.0)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["b", "omega", "phi"])
            for row in zip(self.b, self.omega, self.phi):
                w.writerow([repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path) -> "WaveRealization":
        data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        return cls(b=data[:, 0], omega=data[:, 1], phi=data[:, 2])


def spectrum_density(omega, spec: SeaStateSpec):
    """Elevation spectrum ``S(omega)`` [m^2 s]."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("spectrum is defined for omega > 0 only")
    A, B = spec.pm_coefficients
    S = A / w**5 * np.exp(-B / w**4)
    if spec.spectrum_kind == "jonswap":
        wp = spec.peak_frequency
        sigma = np.where(w <= wp, 0.07, 0.09)
        r = np.exp(-((w - wp) ** 2) / (2.0 * sigma**2 * wp**2))
        S = (1.0 - 0.287 * math.log(spec.gamma)) * S * spec.gamma**r
    return float(S) if S.ndim == 0 else S


def default_band(spec: SeaStateSpec) -> tuple[float, float]:
    wp = spec.peak_frequency
    return 0.4 * wp, 3.0 * wp


def band_energy(spec: SeaStateSpec, band) -> float:
    lo, hi = band
    val, _ = integrate.quad(spectrum_density, lo, hi, args=(spec,), limit=200)
    return val


def discretize(spec: SeaStateSpec, N: int = 10, band=None, grid: str = "equal-dw",
               g: float = G) -> WaveRealization:
    """Sample ``spec`` into ``N`` harmonics with seeded uniform phases.

    ``grid`` is ``"equal-dw"`` (bin midpoints, ``a_i = sqrt(2 S dw)``) or
    ``"equal-energy"`` (each bin holds the same share of the band energy).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    lo, hi = default_band(spec) if band is None else band
    if not 0 < lo < hi:
        raise ValueError(f"invalid band ({lo}, {hi})")
    total = spec.Hs**2 / 16.0
    if band_energy(spec, (lo, hi)) < 1e-6 * total:
        raise ValueError(f"band ({lo}, {hi}) lies outside the spectrum support")

    if grid == "equal-dw":
        dw = (hi - lo) / N
        w = lo + (np.arange(N) + 0.5) * dw
        a = np.sqrt(2.0 * spectrum_density(w, spec) * dw)
    elif grid == "equal-energy":
        fine = np.linspace(lo, hi, 200 * N + 1)
        cum = integrate.cumulative_trapezoid(spectrum_density(fine, spec), fine, initial=0.0)
        E = cum[-1]
        # frequency at the energy midpoint of each bin
        w = np.interp((np.arange(N) + 0.5) * E / N, cum, fine)
        a = np.full(N, math.sqrt(2.0 * E / N))
    else:
        raise ValueError(f"unknown grid {grid!r}")

    k = w**2 / g
    b = a * k * np.exp(-k * spec.attenuation_depth) * math.sin(math.radians(spec.encounter_angle))
    rng = np.random.default_rng(spec.seed)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=N)
    return WaveRealization(b=b, omega=w, phi=phi)


def disturbance_moment(t, real: WaveRealization, vessel: VesselParams):
    """Roll moment ``m g h_theta theta_e(t)`` and its ``1/J_xx``-scaled form."""
    theta_e = real.slope(t)
    M_w = vessel.restoring * theta_e
    return M_w, M_w / vessel.J_xx
