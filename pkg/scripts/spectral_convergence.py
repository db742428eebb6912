"""Deviation between discrete and continuum eigenvalues as N doubles (l = N)."""
import argparse
import csv

from fermion_statesum import spectral


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--k", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--powers", type=int, nargs=2, default=[5, 12], metavar=("LO", "HI"))
    p.add_argument("--out", default="spectral_convergence.csv")
    args = p.parse_args()

    k_max = max(abs(k) for k in args.k)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["N", "k", "abs_dev", "ratio_to_previous"])
        prev = {}
        for p2 in range(args.powers[0], args.powers[1] + 1):
            N = 2 ** p2
            rep = spectral.compare_spectra(args.theta, N, k_max)
            for k in args.k:
                dev = float(rep.deviation[rep.k == k][0])
                ratio = prev[k] / dev if k in prev else float("nan")
                w.writerow([N, k, format(dev, ".17g"), format(ratio, ".17g")])
                prev[k] = dev
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
