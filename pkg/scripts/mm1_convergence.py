"""Relative error of the simulated M/M/1 mean sojourn against 1/(mu - lambda).

One row per (customers, seed); the error should shrink roughly as
1/sqrt(customers).
"""

import argparse
import csv
import sys

from xrpm.simoracle import simulate_mm1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--arrival", type=float, default=50.0)
    ap.add_argument("--service", type=float, default=100.0)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--sizes", default="1000,10000,100000,1000000")
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    ref = 1.0 / (args.service - args.arrival)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh)
    w.writerow(["customers", "seed", "mean_sojourn_s", "analytic_s", "rel_err"])
    for n in (int(x) for x in args.sizes.split(",")):
        for seed in range(args.seeds):
            m = simulate_mm1(args.arrival, args.service, n, seed).mean_sojourn
            w.writerow([n, seed, f"{m:.9g}", f"{ref:.9g}", f"{(m - ref) / ref:.9g}"])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
