import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from zerofin import sim
from zerofin.control import ControllerGains
from zerofin.stability import (LoopTransfer, StabilityError, circle_criterion_check,
                               iss_bound_probe, nyquist_export, state_space, sweep_grid, w_tilde)

K_F = 2 * 0.1078 * math.radians(35)


def ref_loop(scale=1.0, c=0.14):
    return LoopTransfer(k_p=2.3 * scale, k_d=15.1 * scale, c=c, n_theta=0.073 * 0.698,
                        omega0=0.698)


def re_oracle(w, lt):
    """Real part of W~ expanded by hand over the squared denominator modulus."""
    n2, w2 = 2 * lt.n_theta, lt.omega0**2
    num = w**2 * (w2 * (lt.k_p - lt.k_d * lt.c) + n2 * lt.k_p * lt.c
                  + w**2 * (n2 * lt.k_d - (lt.k_p - lt.k_d * lt.c)))
    den = (w**2 + lt.c**2) * ((w2 - w**2) ** 2 + (n2 * w) ** 2)
    return num / den


def test_w_tilde_examples():
    lt = ref_loop()
    assert w_tilde(0.0, lt) == 0
    zero = LoopTransfer(0.0, 0.0, 0.14, 0.05, 0.698)
    assert np.all(w_tilde(np.logspace(-3, 3, 50), zero) == 0)
    # strictly proper: the tail is -j k_d / w
    w = 1e6
    assert abs(w_tilde(w, lt)) < 1e-4
    assert abs(w * w_tilde(w, lt) + 1j * lt.k_d) < 1e-3 * lt.k_d


@pytest.mark.xfail(strict=True, reason="W~ is strictly proper, so it tends to 0, not to k_d")
def test_w_tilde_tail_equals_k_d():
    lt = ref_loop()
    assert abs(w_tilde(1e6, lt) - lt.k_d) < 1e-3 * lt.k_d


def test_w_tilde_matches_state_space():
    rng = np.random.default_rng(3)
    for _ in range(5):
        lt = LoopTransfer(*rng.uniform(0.1, 20, 2), *rng.uniform(0.05, 2, 2), rng.uniform(0.3, 2))
        A, B, C = state_space(lt)
        for w in 10 ** rng.uniform(-3, 3, 100):
            ss = C @ np.linalg.solve(1j * w * np.eye(3) - A, B)
            # the realization gives W; W~ = -W
            ref = -complex(np.ravel(ss)[0])
            got = w_tilde(w, lt)
            assert abs(got - ref) <= 1e-10 * max(1.0, abs(ref))


def test_real_part_matches_expansion():
    lt = ref_loop(c=1.0)
    w = sweep_grid()
    np.testing.assert_allclose(w_tilde(w, lt).real, re_oracle(w, lt), rtol=1e-10, atol=1e-15)


def test_zero_gains_margin():
    rep = circle_criterion_check(ref_loop(scale=0.0), K_F)
    assert rep.passed
    assert rep.margin == pytest.approx(1 / K_F, rel=1e-15)


def test_ref_gains_pass():
    rep = circle_criterion_check(ref_loop(), K_F)
    assert rep.passed
    assert rep.critical == -1 / K_F
    # Re W~ stays non-negative for this loop, so nothing eats into 1/k_f
    assert re_oracle(sweep_grid(), ref_loop()).min() >= 0
    assert rep.margin == pytest.approx(1 / K_F, rel=1e-12)


@pytest.mark.xfail(strict=True, reason="Re W~ >= 0 for the reference loop and is linear in the "
                                       "gains, so no scaling of (k_p, k_d) can violate the check")
def test_ref_gains_times_100_fail():
    assert not circle_criterion_check(ref_loop(scale=100), K_F).passed


def test_violating_loop_detected_and_refined():
    lt = ref_loop(c=1.0)
    rep = circle_criterion_check(lt, K_F)
    res = optimize.minimize_scalar(lambda w: re_oracle(w, lt), bounds=(0.3, 1.0),
                                   method="bounded", options={"xatol": 1e-12})
    assert not rep.passed
    assert rep.min_real == pytest.approx(res.fun, rel=1e-10)
    assert rep.omega_argmin == pytest.approx(res.x, abs=1e-6)
    assert rep.margin == pytest.approx(res.fun + 1 / K_F, rel=1e-9)
    assert rep.margin < 0


def test_non_hurwitz_rejected():
    for bad in (dict(c=-0.1), dict(n_theta=0.0), dict(omega0=0.0)):
        kw = dict(k_p=1.0, k_d=1.0, c=0.14, n_theta=0.05, omega0=0.698) | bad
        with pytest.raises(StabilityError):
            circle_criterion_check(LoopTransfer(**kw), K_F)
    with pytest.raises(StabilityError):
        circle_criterion_check(ref_loop(), 0.0)


@given(st.floats(0, 50), st.floats(0, 50), st.floats(0.01, 3.0), st.floats(0.01, 1.0))
@settings(max_examples=60, deadline=None)
def test_halving_gains_never_lowers_margin(kp, kd, c, lam):
    lt = LoopTransfer(kp, kd, c, 0.05, 0.698)
    grid = sweep_grid(2000)
    full = circle_criterion_check(lt, K_F, grid)
    part = circle_criterion_check(lt.scaled(lam), K_F, grid)
    assert part.margin >= full.margin - 1e-9
    # linearity of Re W~ in the gains
    assert part.min_real == pytest.approx(lam * full.min_real, rel=1e-6, abs=1e-12)


def test_nyquist_export(tmp_path):
    tab = nyquist_export(ref_loop(), K_F)
    # the curve leaves the origin along the imaginary axis
    w0 = tab.omega[0]
    assert abs(tab.re[0] + 1j * tab.im[0]) < 0.01 * np.max(np.hypot(tab.re, tab.im))
    assert tab.im[0] == pytest.approx(w0 * 2.3 / (0.14 * 0.698**2), rel=1e-2)
    assert tab.critical == -1 / K_F
    z = w_tilde(-tab.omega[:5], ref_loop())
    np.testing.assert_allclose(z, np.conj(tab.re[:5] + 1j * tab.im[:5]), rtol=1e-14)
    path = tmp_path / "n.csv"
    tab.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# critical_abscissa=")
    assert lines[1] == "omega,re,im"
    assert len(lines) == 2 + len(tab.omega)


def _pair(load, *overrides, x0=(0.2, 0.0, 0.0)):
    sc = load("reference-stability", "duration=400", *overrides)
    a = sim.run(sc)
    b = sim.run(sc.with_(initial=x0))
    return a, b


def test_iss_probe_homogeneous_decay(load):
    a, b = _pair(load)
    probe = iss_bound_probe(a.t, a.states, b.states)
    assert probe.eps > 0
    assert probe.holds
    assert probe.C1 >= 1.0


def test_iss_probe_trivial():
    t = np.linspace(0, 10, 100)
    x = np.ones((100, 3))
    p = iss_bound_probe(t, x, x)
    assert p.C1 == 0 and p.C2 == 0 and p.holds


def test_iss_probe_errors():
    t = np.linspace(0, 1, 10)
    with pytest.raises(StabilityError):
        iss_bound_probe(t, np.ones(10), np.zeros(10))
    t = np.linspace(0, 1, 100)
    with pytest.raises(StabilityError):
        iss_bound_probe(t, np.ones(100), np.zeros(100), np.ones(100), np.zeros(100))


def test_iss_probe_with_disturbance_gap(load):
    a, b = _pair(load)
    rate = (iss_bound_probe(a.t, a.states, b.states).C1, iss_bound_probe(a.t, a.states, b.states).eps)
    sc = load("reference-stability", "duration=400", "sea_state=sea-state-5")
    c = sim.run(sc)
    d = sim.run(sc.with_(sea=None, initial=(0.2, 0.0, 0.0)))
    probe = iss_bound_probe(c.t, c.states, d.states, c.M_w, d.M_w, rate=rate)
    assert probe.holds and probe.C2 > 0


def test_controller_gains_carry_into_loop(ref_gains, lin_model):
    lt = LoopTransfer.from_parts(ref_gains, lin_model)
    assert (lt.k_p, lt.k_d, lt.c) == (2.3, 15.1, 0.14)
    assert lt.n_theta == lin_model.n_theta
    assert isinstance(ref_gains.scaled(2), ControllerGains)
