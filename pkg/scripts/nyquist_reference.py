"""Nyquist curve of the preset loop and the circle-criterion margin over model variants."""

import argparse
import itertools
import math
from pathlib import Path

from zerofin.fins import SaturatedMomentCurve
from zerofin.stability import LoopTransfer, circle_criterion_check, nyquist_export


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/nyquist", help="output directory")
    ap.add_argument("--k-p", type=float, default=2.3)
    ap.add_argument("--k-d", type=float, default=15.1)
    ap.add_argument("--c", type=float, default=0.14)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    wmax = math.radians(35.0)
    print(f"{'omega0':>8} {'nu':>6} {'k_02':>7} {'min Re':>10} {'margin':>9} {'1/k_f':>8}")
    for w0, nu, k02 in itertools.product((2 * math.pi / 11, 0.698, 0.729), (0.073, 0.060),
                                         (0.1078, 0.1188)):
        curve = SaturatedMomentCurve(k02, wmax)
        lt = LoopTransfer(args.k_p, args.k_d, args.c, nu * w0, w0)
        rep = circle_criterion_check(lt, curve.k_f)
        print(f"{w0:8.4f} {nu:6.3f} {k02:7.4f} {rep.min_real:10.4f} {rep.margin:9.4f} "
              f"{1 / curve.k_f:8.4f}  {'PASS' if rep.passed else 'FAIL'}")

    curve = SaturatedMomentCurve(0.1078, wmax)
    lt = LoopTransfer(args.k_p, args.k_d, args.c, 0.073 * 0.698, 0.698)
    path = out / "nyquist.csv"
    nyquist_export(lt, curve.k_f).to_csv(path)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
