"""Residuals of the numeric cascade limit for n = 2..5 across a range of eps.

    python3 scripts/cascade_table.py
"""

import argparse

from sirev.cascade import cascade_check, exact_cascade, lower_model, runaway_example
from sirev.phase import PhasePoint


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-3, 1e-4, 1e-5, 1e-6])
    ap.add_argument("--point", type=float, nargs=4, default=[0.5, 0.2, 0.3, 0.7])
    args = ap.parse_args(argv)
    point = PhasePoint(*args.point)

    for n in (2, 3, 4, 5):
        ex = exact_cascade(n)
        rep = cascade_check(lower_model(n), point, args.eps)
        print(f"n={n}  exact path {'ok' if ex['passed'] else 'MISMATCH'}")
        print(f"  {'eps':>8s} {'Q1 rel':>10s} {'Q2 rel':>10s} {'b1':>11s} {'c1':>11s}")
        for r in rep["rows"]:
            print(f"  {r['eps']:8.0e} {r['Q1_relative']:10.2e} {r['Q2_relative']:10.2e} "
                  f"{r['b1']:11.3e} {r['c1']:11.3e}")
        print(f"  orders Q1 {[round(o, 3) for o in rep['Q1_order']]}  "
              f"Q2 {[round(o, 3) for o in rep['Q2_order']]}")
    run = runaway_example()
    print(f"runaway eps*r: {run['lhs']}  -> {run['limit_estimate']:.10f}")


if __name__ == "__main__":
    main()
