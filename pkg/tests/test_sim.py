import math

import numpy as np
import pytest

from zerofin import sim
from zerofin.waves import WaveRealization


def test_origin_is_equilibrium(load):
    r = sim.run(load("reference-stability"))
    assert np.all(r.states == 0.0)
    assert r.metrics["roll_rms"] == 0.0


def test_free_decay_log_decrement(load):
    r = sim.run(load("reference-stability", "controller=off", "duration=120",
                     "initial.theta_deg=5"))
    nu = 0.073
    expected = 2 * math.pi * nu / math.sqrt(1 - nu**2)
    assert sim.log_decrement(r.theta) == pytest.approx(expected, rel=0.01)
    assert r.metrics["damping_ratio"] == pytest.approx(nu, rel=0.01)


def test_rk4_order(load):
    # uncontrolled roll under a single smooth harmonic: no switching anywhere
    wave = WaveRealization([0.02], [0.9], [0.3])
    finals = []
    for dt in (0.2, 0.1, 0.05):
        sc = load("reference-stability", "controller=off", "duration=40", f"dt={dt}",
                  "initial.theta=0.1").with_(waves=wave)
        finals.append(sim.run(sc).states[-1])
    ratio = np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2])
    assert ratio == pytest.approx(16, abs=2)


def test_empty_run(load):
    r = sim.run(load("reference-stability", "duration=0"))
    assert len(r) == 0 and r.metrics == {}
    assert sim.saturation_audit(r).passed


def test_step_matches_run(load):
    sc = load("sea-state-5", "duration=5")
    r = sim.run(sc)
    s = sim.initial_state(sc)
    for k in range(len(r) - 1):
        s = sim.step(s, sc)
    np.testing.assert_allclose(s.x, r.states[-1], rtol=1e-13, atol=1e-15)
    assert s.t == pytest.approx(5.0)


def test_deterministic(load):
    a = sim.run(load("sea-state-5", "duration=60"))
    b = sim.run(load("sea-state-5", "duration=60"))
    for c in sim.COLUMNS:
        assert np.array_equal(a.data[c], b.data[c])


def test_seed_changes_run(load):
    a = sim.run(load("sea-state-5", "duration=30"))
    b = sim.run(load("sea-state-5", "duration=30", "sea_state.seed=4"))
    assert not np.array_equal(a.theta, b.theta)


def test_numerical_abort(load):
    with pytest.raises(sim.SimulationError):
        sim.run(load("sea-state-5", "dt=1e6", "duration=1e7"))


def test_scenario_validation(load):
    sc = load("reference-stability")
    with pytest.raises(ValueError):
        sc.with_(dt=0.0)
    with pytest.raises(ValueError):
        sc.with_(duration=0.05)
    with pytest.raises(ValueError):
        sc.with_(fidelity="hil")
    with pytest.raises(ValueError):
        sc.with_(control_period=0.001)
    with pytest.raises(ValueError):
        sc.with_(linear=type(sc.linear)(omega0=0.5, nu_theta=0.07))


def test_record_columns_and_csv(load, tmp_path):
    r = sim.run(load("sea-state-5", "duration=10"))
    assert len(r) == 1001
    np.testing.assert_allclose(r.M_u, r.M_lift + r.M_zero)
    assert np.all(r.M_lift == 0.0)  # zero speed
    assert r.metrics["roll_max"] >= r.metrics["roll_rms"] > 0
    path = tmp_path / "traj.csv"
    r.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert path.read_text().splitlines()[0] == ",".join(sim.COLUMNS)
    np.testing.assert_array_equal(data[:, 1], r.theta)


def test_testbench_fin_angle_bounded(load):
    r = sim.run(load("sea-state-5", "duration=120", "controller.k_p=200", "controller.k_d=1500"))
    assert np.max(np.abs(r.delta_f)) <= r.delta_f_max
    assert np.max(np.abs(r.omega_f)) <= r.omega_f_max * (1 + 1e-12)


def test_audit_flags_aggressive_gains(load):
    r = sim.run(load("sea-state-5", "controller.k_p=115", "controller.k_d=755"))
    audit = sim.saturation_audit(r)
    assert audit.rate_fraction > 0.01 and not audit.passed


def test_audit_controller_off(load):
    r = sim.run(load("sea-state-5-off"))
    audit = sim.saturation_audit(r)
    assert audit.rate_fraction == 0.0 and audit.angle_fraction == 0.0 and audit.passed


@pytest.mark.xfail(strict=True, reason="seed 0 of the sea-state-5 preset puts 2.3% of samples "
                                       "at the fin-rate limit with the preset gains")
def test_audit_passes_with_preset_gains(load):
    assert sim.saturation_audit(sim.run(load("sea-state-5"))).passed


def test_audit_threshold_is_configurable(load):
    r = sim.run(load("sea-state-5"))
    assert sim.saturation_audit(r, threshold=0.05).passed


def test_controller_reduces_roll(load):
    on = sim.run(load("sea-state-5", "duration=300"))
    off = sim.run(load("sea-state-5-off", "duration=300"))
    assert on.metrics["roll_rms"] < off.metrics["roll_rms"]


def _harmonic(load, x0, *overrides):
    wave = WaveRealization([0.03], [0.8], [0.0])
    sc = load("reference-stability", "duration=455", *overrides).with_(waves=wave, initial=x0)
    return sim.run(sc)


def test_entrainment_to_forcing_period(load):
    a = _harmonic(load, (0.0, 0.0, 0.0))
    b = _harmonic(load, (0.3, -0.1, 0.2))
    assert 455 >= 50 * 2 * math.pi / 0.698
    assert np.linalg.norm(a.states[-1] - b.states[-1]) < 1e-6
    # steady orbit repeats with the forcing period
    tail = a.theta[-20000:] - a.theta[-20000:].mean()
    lags = np.arange(200, 1500)
    ac = np.array([np.dot(tail[:-L], tail[L:]) for L in lags])
    assert lags[np.argmax(ac)] * 0.01 == pytest.approx(2 * math.pi / 0.8, abs=0.02)


@pytest.mark.parametrize("share", [0.0, 0.5, 1.0])
def test_entrainment_for_slope_restricted_ramps(load, share):
    k_f = 2 * 0.1078 * math.radians(35)
    ramp = lambda w: share * k_f * w  # noqa: E731
    sc_a = load("reference-stability", "duration=455").with_(waves=WaveRealization([0.03], [0.8], [0.0]),
                                                        nonlinearity=ramp)
    a, b = sim.run(sc_a), sim.run(sc_a.with_(initial=(0.3, -0.1, 0.2)))
    assert np.linalg.norm(a.states[-1] - b.states[-1]) < 1e-6


def test_bounded_response(load):
    from zerofin.waves import SeaStateSpec

    sc = load("reference-stability", "duration=300")
    sea = SeaStateSpec(2.2, 5.4, attenuation_depth=3.0)
    forced = sim.run(sc.with_(sea=sea))
    free = sim.run(sc.with_(initial=(0.2, 0.0, 0.0)))
    norm = lambda r: np.max(np.linalg.norm(r.states, axis=1))  # noqa: E731
    C = norm(forced) / np.max(np.abs(forced.M_w))
    Cp = norm(free) / 0.2
    both = sim.run(sc.with_(sea=sea, initial=(0.2, 0.0, 0.0)))
    assert norm(both) <= C * np.max(np.abs(both.M_w)) + Cp * 0.2


def test_design_and_testbench_agree_at_small_amplitude(load):
    ov = ["duration=600", "sea_state.Hs=0.5", "actuator.tau=0", "actuator.deadband=0"]
    d = sim.run(load("sea-state-5", "fidelity=design", *ov))
    t = sim.run(load("sea-state-5", *ov))
    assert t.metrics["rate_saturation_fraction"] == 0.0
    assert t.metrics["roll_rms"] == pytest.approx(d.metrics["roll_rms"], rel=0.10)


def test_sample_and_hold_controller(load):
    cont = sim.run(load("sea-state-5", "duration=120", "fidelity=design"))
    held = sim.run(load("sea-state-5", "duration=120", "fidelity=design", "control_period=0.01"))
    slow = sim.run(load("sea-state-5", "duration=120", "fidelity=design", "control_period=0.2"))
    assert held.metrics["roll_rms"] == pytest.approx(cont.metrics["roll_rms"], rel=0.05)
    assert not np.array_equal(slow.theta, cont.theta)


def test_moment_comparison(load):
    amp = {}
    for kn in (0, 3, 15):
        r = sim.run(load("moment-comparison", f"vessel.V_kn={kn}"))
        tail = slice(len(r) // 3, None)
        amp[kn] = (np.max(np.abs(r.M_lift[tail])), np.max(np.abs(r.M_zero[tail])))
    assert amp[0][0] == 0.0
    assert amp[3][0] / amp[15][0] == pytest.approx(0.04, rel=1e-6)
    zs = [amp[k][1] for k in amp]
    assert (max(zs) - min(zs)) / max(zs) < 0.05
