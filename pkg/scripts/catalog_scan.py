"""Validity summary for every catalog example, with a curvature table per example.

    python3 scripts/catalog_scan.py [--out DIR]
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from sirev.catalog import CATALOG, build_catalog
from sirev.geometry import curvature_scan
from sirev.model import sampling_interval

COLS = ["monotone_coordinate_change", "conformal_factor_nonvanishing", "curvature_bounded",
        "R_spread", "min_abs_conformal_factor", "verdict"]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, help="write <id>_curvature.csv files here")
    args = ap.parse_args(argv)

    print(f"{'id':12s} " + " ".join(f"{c[:14]:>14s}" for c in COLS))
    for ex_id in CATALOG:
        model, _, rep = build_catalog(ex_id)
        if ex_id == "NOGO":
            ratios = ", ".join(f"{r:.2f}" for r in rep["curvature_blowup"]["ratios"])
            print(f"{ex_id:12s} max|R| refinement ratios {ratios}  verdict {rep['verdict']}")
            continue
        cells = [rep[c] for c in COLS]
        print(f"{ex_id:12s} " + " ".join(
            f"{c:>14.3e}" if isinstance(c, float) else f"{str(c):>14s}" for c in cells))
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            grid = np.linspace(*sampling_interval(model.domain, inner=0.98), 400)
            with open(args.out / f"{ex_id}_curvature.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["a", "R"])
                w.writerows(curvature_scan(model, grid).tolist())


if __name__ == "__main__":
    main()
