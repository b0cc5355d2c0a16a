"""Command-line front end.

Exit codes: 0 success, 1 criterion failed or invalid fit, 2 configuration
error, 3 numerical abort, 4 rank-deficient identification.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import config, control, ident, presets, sim, stability, waves

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC, EXIT_RANK = 0, 1, 2, 3, 4


def _scenario(args):
    overrides = list(args.set or [])
    if getattr(args, "fidelity", None):
        overrides.append(f"fidelity={args.fidelity}")
    if getattr(args, "seed", None) is not None:
        overrides.append(f"sea_state.seed={args.seed}")
    return config.load(args.scenario, overrides)


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def cmd_simulate(args) -> int:
    sc, _ = _scenario(args)
    rec = sim.run(sc)
    out = _out(args)
    rec.to_csv(out / "trajectory.csv")
    report = {"scenario": sc.name, "fidelity": sc.fidelity, "metrics": rec.metrics,
              "audit": sim.saturation_audit(rec, args.threshold).as_dict() if len(rec) else None}
    print(_dump(report, out / "metrics.json"))
    return EXIT_OK


def _loop(sc):
    if sc.gains is None:
        raise config.ConfigError("scenario has no controller gains")
    return stability.LoopTransfer.from_parts(sc.gains, sc.linear), sc.curve


def cmd_check_stability(args) -> int:
    sc, _ = _scenario(args)
    lt, curve = _loop(sc)
    if args.scale != 1.0:
        lt = lt.scaled(args.scale)
    rep = stability.circle_criterion_check(lt, curve.k_f)
    print(("PASS" if rep.passed else "FAIL")
          + f" margin={rep.margin:.6g} omega_argmin={rep.omega_argmin:.6g} "
            f"critical={rep.critical:.6g}")
    if args.nyquist_csv:
        stability.nyquist_export(lt, curve.k_f).to_csv(args.nyquist_csv)
    if args.out:
        _dump(rep.as_dict(), _out(args) / "stability.json")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_nyquist(args) -> int:
    sc, _ = _scenario(args)
    lt, curve = _loop(sc)
    grid = stability.sweep_grid(args.points, args.omega_min, args.omega_max)
    path = _out(args) / "nyquist.csv"
    stability.nyquist_export(lt, curve.k_f, grid).to_csv(path)
    print(f"wrote {path} (critical abscissa {-1.0 / curve.k_f:.6g})")
    return EXIT_OK


def _parse_poles(text):
    try:
        return [complex(p.replace(" ", "")) for p in text.split(",")]
    except ValueError as exc:
        raise config.ConfigError(f"cannot parse poles {text!r}") from exc


def design_amplitude(sc, gains) -> float:
    """Equivalent amplitude of the desired fin rate on an uncontrolled run."""
    rec = sim.run(sc.with_(gains=None, command=None))
    return control.design_amplitude_from_rates(
        control.desired_rate(rec.theta, rec.theta_dot, gains))


def cmd_tune(args) -> int:
    sc, _ = _scenario(args)
    lin, curve = sc.linear, sc.curve
    if args.poles:
        poles = _parse_poles(args.poles)
    else:
        w0, z = lin.omega0, args.zeta
        pair = complex(-z * w0, w0 * math.sqrt(1.0 - z * z))
        poles = [pair, pair.conjugate(), -args.real_pole]
    T = sc.actuator.T_delta
    if args.design_amplitude is not None:
        A = args.design_amplitude
        gains = control.tune_by_pole_placement(lin, curve, A, poles, T)
    else:
        # fixed point: amplitude depends on the gains it produces
        A = curve.omega_f_max
        for _ in range(args.iterations):
            gains = control.tune_by_pole_placement(lin, curve, A, poles, T)
            A_new = design_amplitude(sc, gains)
            if not A_new > 0:
                raise config.ConfigError("uncontrolled run has no roll motion to size the design")
            # A_new ~ 1/A below saturation, so plain substitution cycles;
            # the geometric mean lands on that fixed point directly
            A_new = math.sqrt(A * A_new)
            done = abs(A_new - A) <= 1e-3 * A
            A = A_new
            if done:
                break
        gains = control.tune_by_pole_placement(lin, curve, A, poles, T)
    rep = control.shrink_until_pass(gains, lin, curve, args.shrink, args.max_iter)
    report = control.TuningReport(rep.gains, rep.steps, rep.margin,
                                  k_eq=control.harmonic_gain_of_h(A, curve), design_amplitude=A)
    text = _dump(report.as_dict(), (_out(args) / "tune.json") if args.out else None)
    print(text)
    return EXIT_OK


def _read_series(path):
    path = Path(path)
    if not path.is_file():
        raise config.ConfigError(f"data file not found: {path}")
    import csv

    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise config.ConfigError(f"{path}: no data rows")
    missing = {"t", "theta", "delta_f"} - set(rows[0])
    if missing:
        raise config.ConfigError(f"{path}: missing columns {sorted(missing)}")
    cols = {k: np.array([float(r[k]) for r in rows]) for k in rows[0] if k}
    return cols


def cmd_identify(args) -> int:
    truth = None
    if args.data:
        cols = _read_series(args.data)
        prior = args.omega0_prior
        t, th, d, V = cols["t"], cols["theta"], cols["delta_f"], cols.get("V_f")
    else:
        sc, cfg = _scenario(args)
        if sc.command is None:
            sc = sc.with_(command=ident.Maneuver(ident.calibration_maneuver()), gains=None)
        rec = sim.run(sc)
        t, th, d = rec.t, rec.theta, rec.delta_f
        V = np.full(len(t), sc.vessel.V)
        prior = args.omega0_prior
        truth = {"omega0": sc.linear.omega0, "nu_theta": sc.linear.nu_theta,
                 "k_02": sc.curve.k_02}
        if args.out:
            rec.to_csv(_out(args) / "identification_run.csv")
    try:
        res = ident.identify_series(t, th, d, V, omega0_prior=prior)
    except ident.RankDeficientError as exc:
        print(f"identification failed: {exc}", file=sys.stderr)
        if args.out:
            _dump({"error": str(exc), "condition_number": exc.condition_number},
                  _out(args) / "ident.json")
        return EXIT_RANK
    report = {"result": res.as_dict()}
    if truth is not None:
        est = {"omega0": res.omega0_hat, "nu_theta": res.nu_theta_hat, "k_02": res.k02_hat}
        report["truth"] = truth
        report["relative_error"] = {k: abs(est[k] - v) / abs(v) for k, v in truth.items()}
    print(_dump(report, (_out(args) / "ident.json") if args.out else None))
    return EXIT_OK if res.valid else EXIT_FAIL


def cmd_spectrum(args) -> int:
    sc, _ = _scenario(args)
    if sc.sea is None:
        raise config.ConfigError("scenario has no sea_state")
    out = _out(args)
    lo, hi = waves.default_band(sc.sea)
    w = np.linspace(0.2 * lo, 1.5 * hi, args.points)
    S = waves.spectrum_density(w, sc.sea)
    np.savetxt(out / "spectrum.csv", np.column_stack([w, S]), delimiter=",",
               header="omega,S", comments="")
    real = sc.realization()
    real.to_csv(out / "realization.csv")
    print(_dump({"Hs": sc.sea.Hs, "Tz": sc.sea.Tz, "peak_frequency": sc.sea.peak_frequency,
                 "band": [lo, hi], "m0_band": waves.band_energy(sc.sea, (lo, hi)),
                 "harmonics": real.N, "slope_std": math.sqrt(real.variance)}))
    return EXIT_OK


def cmd_presets(args) -> int:
    print(_dump(presets.catalog()))
    return EXIT_OK


def _common(p, scenario_required=True):
    p.add_argument("--scenario", required=scenario_required,
                   help="scenario YAML file or built-in scenario name")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a scenario field (dotted path), repeatable")
    p.add_argument("--seed", type=int, help="sea-state phase seed")
    p.add_argument("--fidelity", choices=sim.FIDELITIES, help="simulation fidelity")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zerofin", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario, write trajectory CSV and metrics")
    _common(p)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threshold", type=float, default=0.01, help="saturation audit threshold")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tune", help="pole-placement tuning followed by criterion enforcement")
    _common(p)
    p.add_argument("--out", help="output directory for tune.json")
    p.add_argument("--poles", help="comma-separated target poles, e.g. '-0.2+0.6j,-0.2-0.6j,-0.14'")
    p.add_argument("--zeta", type=float, default=0.3, help="damping ratio of the default roll pair")
    p.add_argument("--real-pole", type=float, default=0.14, help="magnitude of the default real pole")
    p.add_argument("--design-amplitude", type=float, help="fin-rate amplitude for harmonic linearization [rad/s]")
    p.add_argument("--iterations", type=int, default=20, help="fixed-point iterations for the design amplitude")
    p.add_argument("--shrink", type=float, default=0.9, help="gain reduction factor per step")
    p.add_argument("--max-iter", type=int, default=200, help="maximum gain reductions")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("check-stability", help="circle-criterion check of the scenario gains")
    _common(p)
    p.add_argument("--scale", type=float, default=1.0, help="multiply k_p and k_d by this factor")
    p.add_argument("--nyquist-csv", help="also write the Nyquist table to this file")
    p.add_argument("--out", help="output directory for stability.json")
    p.set_defaults(func=cmd_check_stability)

    p = sub.add_parser("nyquist", help="export the Nyquist curve of W~(jw)")
    _common(p)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--points", type=int, default=10_000, help="number of sweep frequencies")
    p.add_argument("--omega-min", type=float, default=1e-3, help="lowest frequency [rad/s]")
    p.add_argument("--omega-max", type=float, default=1e3, help="highest frequency [rad/s]")
    p.set_defaults(func=cmd_nyquist)

    p = sub.add_parser("identify", help="least-squares identification from data or a scenario run")
    _common(p, scenario_required=False)
    p.add_argument("--data", help="CSV with columns t, theta, delta_f[, u, V_f]")
    p.add_argument("--omega0-prior", type=float, default=2 * math.pi / 11.0,
                   help="a-priori natural frequency for the smoothing cutoff [rad/s]")
    p.add_argument("--out", help="output directory for ident.json")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("spectrum", help="write the sea spectrum and its realization")
    _common(p)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--points", type=int, default=400, help="spectrum samples")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("presets", help="list built-in presets")
    p.set_defaults(func=cmd_presets)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "identify" and not (args.data or args.scenario):
        ap.error("identify needs --data or --scenario")
    try:
        return args.func(args)
    except config.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except sim.SimulationError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (stability.StabilityError, control.TuningError, ident.IdentificationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
