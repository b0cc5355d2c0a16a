"""Frequency-domain incremental-stability check of the closed roll loop.

The loop is a Lur'e system: the linear part maps the fin moment ``h`` to the
fin rate ``omega_f``,

    W(s) = -s (k_d s + k_p) / ((s + c)(s^2 + 2 n_theta s + omega0^2)),

and ``h`` is slope-restricted to ``[0, k_f]``. The sufficient condition is
``Re W~(jw) + 1/k_f > 0`` for all real ``w`` with ``W~ = -W``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize


class StabilityError(ValueError):
    pass


@dataclass(frozen=True)
class LoopTransfer:
    k_p: float
    k_d: float
    c: float
    n_theta: float
    omega0: float

    @classmethod
    def from_parts(cls, gains, lin) -> "LoopTransfer":
        return cls(k_p=gains.k_p, k_d=gains.k_d, c=gains.c,
                   n_theta=lin.n_theta, omega0=lin.omega0)

    def scaled(self, factor: float) -> "LoopTransfer":
        return LoopTransfer(self.k_p * factor, self.k_d * factor, self.c,
                            self.n_theta, self.omega0)

    def denominator(self) -> np.ndarray:
        return np.polymul([1.0, self.c], [1.0, 2.0 * self.n_theta, self.omega0**2])

    def is_hurwitz(self) -> bool:
        if not (self.c > 0 and self.n_theta > 0 and self.omega0 > 0):
            return False
        return bool(np.all(np.roots(self.denominator()).real < 0))


def w_tilde(omega, lt: LoopTransfer):
    """``W~(j omega)`` by direct complex evaluation."""
    s = 1j * np.asarray(omega, dtype=float)
    out = s * (lt.k_d * s + lt.k_p) / ((s + lt.c) * (2.0 * lt.n_theta * s + lt.omega0**2 + s * s))
    return complex(out) if out.ndim == 0 else out


def state_space(lt: LoopTransfer):
    """Realization ``(A, B, C)`` of the loop with state ``(theta, theta', delta_f)``.

    ``B`` injects ``h`` into the roll acceleration and ``C`` reads the fin
    rate, so ``C (sI - A)^-1 B = W(s)``.
    """
    A = np.array([
        [0.0, 1.0, 0.0],
        [-lt.omega0**2, -2.0 * lt.n_theta, 0.0],
        [-lt.k_p, -lt.k_d, -lt.c],
    ])
    B = np.array([[0.0], [1.0], [0.0]])
    C = np.array([[-lt.k_p, -lt.k_d, -lt.c]])
    return A, B, C


@dataclass(frozen=True)
class CriterionReport:
    passed: bool
    margin: float
    omega_argmin: float
    critical: float
    min_real: float

    def as_dict(self) -> dict:
        return {"pass": self.passed, "margin": self.margin, "omega_argmin": self.omega_argmin,
                "critical_abscissa": self.critical, "min_re_w_tilde": self.min_real}


def sweep_grid(n_points: int = 10_000, w_min: float = 1e-3, w_max: float = 1e3) -> np.ndarray:
    if n_points < 3 or not 0 < w_min < w_max:
        raise ValueError("invalid sweep specification")
    return np.logspace(math.log10(w_min), math.log10(w_max), n_points)


def min_real_part(lt: LoopTransfer, grid=None, xtol: float = 1e-10):
    """Infimum of ``Re W~(jw)`` over ``w >= 0`` and the frequency attaining it.

    ``W~(0) = 0``, so the result is never positive; a zero minimum is
    reported at ``w = 0``.
    """
    w = sweep_grid() if grid is None else np.asarray(grid, dtype=float)
    re = w_tilde(w, lt).real
    i = int(np.argmin(re))
    best_w, best = float(w[i]), float(re[i])
    if 0 < i < len(w) - 1:
        f = lambda x: w_tilde(x, lt).real  # noqa: E731
        try:
            res = optimize.minimize_scalar(f, bracket=(w[i - 1], w[i], w[i + 1]),
                                           method="golden", tol=xtol)
            if res.fun < best:
                best_w, best = float(res.x), float(res.fun)
        except ValueError:
            pass
    if best >= 0.0:
        return 0.0, 0.0
    return best, best_w


def circle_criterion_check(lt: LoopTransfer, k_f: float, grid=None) -> CriterionReport:
    """Dense logarithmic sweep with golden-section refinement at the minimizer."""
    if not k_f > 0:
        raise StabilityError("k_f must be positive")
    if not lt.is_hurwitz():
        raise StabilityError(
            f"linear part is not Hurwitz (c={lt.c}, n_theta={lt.n_theta}, omega0={lt.omega0})")
    re_min, w_min = min_real_part(lt, grid)
    margin = re_min + 1.0 / k_f
    return CriterionReport(passed=margin > 0, margin=margin, omega_argmin=w_min,
                           critical=-1.0 / k_f, min_real=re_min)


@dataclass(frozen=True)
class NyquistTable:
    omega: np.ndarray
    re: np.ndarray
    im: np.ndarray
    critical: float

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# critical_abscissa={self.critical!r}\n")
            w = csv.writer(fh)
            w.writerow(["omega", "re", "im"])
            for row in zip(self.omega, self.re, self.im):
                w.writerow([repr(float(x)) for x in row])


def nyquist_export(lt: LoopTransfer, k_f: float, grid=None) -> NyquistTable:
    w = sweep_grid() if grid is None else np.asarray(grid, dtype=float)
    z = w_tilde(w, lt)
    return NyquistTable(omega=w, re=z.real, im=z.imag, critical=-1.0 / k_f)


@dataclass(frozen=True)
class IssProbe:
    """Empirical surrogate of the incremental ISS estimate.

    ``||dx(t)|| <= C1 exp(-eps t) ||dx(0)|| + C2 sup||dw||`` fitted on one
    pair of runs. Diagnostic only.
    """

    C1: float
    eps: float
    C2: float
    holds: bool


def _decay_fit(t, dn, floor):
    d0 = dn[0]
    keep = dn > max(floor, 1e-12 * d0)
    # only the leading decaying stretch before hitting the numerical floor
    stop = int(np.argmin(keep)) if not keep.all() else len(keep)
    if stop < 20:
        raise StabilityError("decay phase too short to fit a rate")
    tt, ll = t[:stop], np.log(dn[:stop] / d0)
    slope, _ = np.polyfit(tt, ll, 1)
    eps = -slope
    C1 = float(np.max(dn[:stop] / d0 * np.exp(eps * tt)))
    return C1, float(eps)


def iss_bound_probe(t, x_a, x_b, w_a=None, w_b=None, rate=None, floor: float = 1e-13) -> IssProbe:
    """Fit ``(C1, eps)`` and the gain ``C2`` from two trajectories.

    With identical disturbances the decay rate is fitted from this pair.
    When the disturbances differ, ``rate=(C1, eps)`` from a homogeneous pair
    must be supplied and only ``C2`` is fitted.
    """
    t = np.asarray(t, dtype=float)
    dx = np.asarray(x_a, dtype=float) - np.asarray(x_b, dtype=float)
    if dx.ndim == 1:
        dx = dx[:, None]
    if len(t) < 50 or len(t) != len(dx):
        raise StabilityError("run too short for an ISS probe (need >= 50 samples)")
    dn = np.linalg.norm(dx, axis=1)
    if w_a is None or w_b is None:
        dw = np.zeros_like(t)
    else:
        dw = np.abs(np.asarray(w_a, dtype=float) - np.asarray(w_b, dtype=float))
    sup_dw = np.maximum.accumulate(dw)
    if dn[0] == 0.0 and sup_dw[-1] == 0.0:
        return IssProbe(C1=0.0, eps=math.inf, C2=0.0, holds=bool(np.all(dn == 0.0)))

    if rate is None:
        if sup_dw[-1] > 0:
            raise StabilityError("differing disturbances need a rate fitted from a homogeneous pair")
        C1, eps = _decay_fit(t - t[0], dn, floor)
    else:
        C1, eps = rate
    transient = C1 * np.exp(-eps * (t - t[0])) * dn[0]
    excess = dn - transient
    active = sup_dw > 0
    if np.any(active):
        C2 = float(max(0.0, np.max(excess[active] / sup_dw[active])))
    else:
        C2 = 0.0
    bound = transient + C2 * sup_dw
    holds = bool(eps > 0 and np.all(dn <= bound * (1 + 1e-9) + floor))
    return IssProbe(C1=float(C1), eps=float(eps), C2=C2, holds=holds)
