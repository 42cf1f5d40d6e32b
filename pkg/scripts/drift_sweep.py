"""Invariant drift of the Koenigs flow against integrator tolerance and horizon.

    python3 scripts/drift_sweep.py [--out drift.csv]
"""

import argparse
import csv
import sys
import time

from sirev.dynamics import integrate_geodesic
from sirev.model import make_model
from sirev.phase import PhasePoint

START = PhasePoint(0.5, 0.0, 0.3, 0.7)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", help="CSV path (default: stdout)")
    ap.add_argument("--horizons", type=float, nargs="+", default=[10.0, 100.0, 1000.0])
    ap.add_argument("--tols", type=float, nargs="+", default=[1e-6, 1e-8, 1e-10, 1e-12])
    args = ap.parse_args(argv)

    model = make_model("even", [1], [1.0], eps=[-1])
    rows = [["T", "tol", "H", "P_y", "S1", "S2", "n_steps", "seconds"]]
    for T in args.horizons:
        for tol in args.tols:
            t0 = time.perf_counter()
            _, rep = integrate_geodesic(model, START, T, tol)
            d = rep.max_rel_drift
            rows.append([T, tol] + [f"{d[k]:.3e}" for k in ("H", "P_y", "S1", "S2")]
                        + [rep.n_steps, f"{time.perf_counter() - t0:.3f}"])
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    csv.writer(fh).writerows(rows)
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
