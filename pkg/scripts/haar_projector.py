"""Haar averages of det(I - Q) over U(n): the count of gauge-invariant states."""
import argparse
import csv

from fermion_statesum import statesum as ss


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, nargs="+", default=[1, 2, 3, 4])
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="haar_projector.csv")
    args = p.parse_args()

    rep = ss.haar_projector_check()
    print(f"n=1 symbolic projector check: |TT - T| = {rep.deviation:.3g}")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "method", "value_re", "value_im", "stderr", "samples"])
        for n in args.n:
            r = ss.haar_average_circle(n, args.samples, args.seed, workers=args.workers)
            w.writerow([n, r.method, format(r.value.real, ".17g"), format(r.value.imag, ".17g"),
                        format(r.stderr, ".17g"), r.samples])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
