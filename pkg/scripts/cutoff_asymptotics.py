"""Sharp-cutoff log-determinant and its c log c fit for a few connections and lengths."""
import argparse
import csv
import math

import numpy as np

from fermion_statesum import spectral


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--a", type=float, nargs="+", default=[0.5, 0.2])
    p.add_argument("--l", type=float, nargs="+", default=[2 * math.pi, 3.0])
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--out", default="cutoff_asymptotics.csv")
    args = p.parse_args()

    grid = np.geomspace(1e2, 1e4, args.points)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["a", "l", "kappa", "l_over_pi", "rel_error"])
        for a in args.a:
            for l in args.l:
                rep = spectral.cutoff_report(a, l, grid)
                target = l / math.pi
                w.writerow([a, format(l, ".17g"), format(rep.kappa, ".17g"), format(target, ".17g"),
                            format(abs(rep.kappa / target - 1), ".17g")])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
