"""Roll phase portraits at sea state 5 with the controller off and on."""

import argparse
from pathlib import Path

import numpy as np

from zerofin import config, sim


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/phase", help="output directory")
    ap.add_argument("--seeds", type=int, default=5, help="number of phase seeds")
    ap.add_argument("--fidelity", default="testbench", choices=sim.FIDELITIES)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for seed in range(args.seeds):
        rms = {}
        for name in ("sea-state-5-off", "sea-state-5"):
            sc, _ = config.load(name, [f"sea_state.seed={seed}", f"fidelity={args.fidelity}"])
            r = sim.run(sc)
            rms[name] = r.metrics
            np.savetxt(out / f"{name}_seed{seed}.csv",
                       np.column_stack([r.t, np.degrees(r.theta), np.degrees(r.theta_dot)]),
                       delimiter=",", header="t,theta_deg,theta_dot_deg", comments="")
        on, off = rms["sea-state-5"], rms["sea-state-5-off"]
        print(f"seed {seed}: rms off {np.degrees(off['roll_rms']):.2f} deg, "
              f"on {np.degrees(on['roll_rms']):.2f} deg, "
              f"ratio {on['roll_rms'] / off['roll_rms']:.3f}, "
              f"rate at limit {100 * on['rate_saturation_fraction']:.2f}%")


if __name__ == "__main__":
    main()
