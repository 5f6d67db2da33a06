"""Latency and energy of a scenario over a CPU/GPU clock grid.

Emits a long-format CSV (f_c, f_g, cpu_share, L_tot_ms, E_tot_mJ, warnings)
for heat maps or line plots.
"""

import argparse
import csv
import sys
from dataclasses import replace

import numpy as np

from xrpm.evaluate import evaluate_frame
from xrpm.scenario import load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scenario")
    ap.add_argument("--cpu", default="1.0:3.2:0.2", help="start:stop:step in GHz")
    ap.add_argument("--gpu", default="0.5:0.65:0.05", help="start:stop:step in GHz")
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    spec = load_scenario(args.scenario)

    def grid(text):
        a, b, s = (float(x) for x in text.split(":"))
        return np.round(np.arange(a, b + s / 2, s), 10)

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh)
    w.writerow(["f_c", "f_g", "cpu_share", "c_client", "L_tot_ms", "E_tot_mJ", "warnings"])
    for f_c in grid(args.cpu):
        for f_g in grid(args.gpu):
            alloc = replace(spec.device.allocation, cpu_clock=float(f_c), gpu_clock=float(f_g))
            s = replace(spec, device=replace(spec.device, allocation=alloc))
            r = evaluate_frame(s, 1)
            warns = "; ".join(dict.fromkeys(r.latency.warnings + r.energy.warnings))
            w.writerow([f"{f_c:g}", f"{f_g:g}", f"{alloc.cpu_share:g}", f"{r.latency.c_client:.9g}",
                        f"{r.latency.total * 1e3:.9g}", f"{r.energy.total * 1e3:.9g}", warns])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
