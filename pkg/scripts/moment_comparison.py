"""Lift and zero-speed fin moments under u = 20 deg sin(2 pi t / 5) at 0, 3 and 15 kn.

Writes ``moments_<kn>kn.csv`` (t, M_lift, M_zero) and prints steady amplitudes.
"""

import argparse
from pathlib import Path

import numpy as np

from zerofin import config, sim


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/moments", help="output directory")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for kn in (0, 3, 15):
        sc, _ = config.load("moment-comparison", [f"vessel.V_kn={kn}"])
        r = sim.run(sc)
        np.savetxt(out / f"moments_{kn}kn.csv", np.column_stack([r.t, r.M_lift, r.M_zero]),
                   delimiter=",", header="t,M_lift,M_zero", comments="")
        tail = slice(len(r) // 3, None)
        print(f"{kn:>3} kn  |M_lift| = {np.max(np.abs(r.M_lift[tail])):10.1f} N m"
              f"   |M_zero| = {np.max(np.abs(r.M_zero[tail])):10.1f} N m")


if __name__ == "__main__":
    main()
