"""Degree reduction ``A_n -> 0, xi_n -> 0`` from a degree-2n even system to degree 2(n-1).

The upper structure polynomial is ``F^(n)(a) = A_n a^n + F^(n-1)(a)``. As ``A_n -> 0`` one
root runs off to infinity (``~ -A_{n-1}/A_n``) while the others converge to the lower roots.

Two independent checks:

* exact: with ``A_n = 0`` substituted into the expansion
  ``A_n sigma^i_l = (-1)^l sum_{s=0}^{l} a_i^{l-s} A_{n-s}`` (and its two-index analogue
  obtained by divided differences), every coefficient of the upper integrals collapses onto
  the shifted lower coefficient, in rational arithmetic;
* numeric: a sequence ``A_n = xi_n = eps -> 0`` with the runaway root kept explicitly, where
  ``|Q^(n) - p_y^2 Q^(n-1)|`` must decay linearly in ``eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .integrals import build_system
from .model import ModelSpec, make_model
from .phase import PhasePoint
from .symfun import as_fraction, build_table, poly_from_roots

__all__ = [
    "DEFAULT_EPS",
    "CascadePair",
    "lower_model",
    "make_pair",
    "upper_roots",
    "exact_limit_terms",
    "exact_cascade",
    "sigma_limit_check",
    "cascade_check",
    "runaway_example",
]

DEFAULT_EPS = (1e-3, 1e-4, 1e-5)


def _default_roots(m: int) -> list:
    return [Fraction(-k) for k in range(1, m + 1)]


def _default_xi(m: int) -> list:
    return [1.0 / k for k in range(1, m + 1)]


def lower_model(n: int, roots=None, xi=None) -> ModelSpec:
    """Even model of degree 2(n-1) with monic F; all roots must be negative."""
    if n < 2:
        raise ValueError("cascading needs n >= 2")
    roots = [as_fraction(r) for r in (roots if roots is not None else _default_roots(n - 1))]
    xi = list(xi) if xi is not None else _default_xi(n - 1)
    if len(roots) != n - 1:
        raise ValueError(f"the lower model for n={n} has {n - 1} roots, got {len(roots)}")
    if any(r >= 0 for r in roots):
        raise ValueError("lower roots must be negative so that a > 0 stays admissible")
    return make_model("even", roots, xi, eps=[1] * len(roots))


def _horner(coeffs, a):
    """Value and derivative of ``sum coeffs[k] a^k``."""
    v, d = 0.0, 0.0
    for c in reversed(coeffs):
        d = d * a + v
        v = v * a + c
    return v, d


def upper_roots(lower_coeffs, eps: float, seeds) -> tuple:
    """Roots of ``eps a^n + F^(n-1)(a)``: Newton-polished survivors, runaway from the root sum."""
    coeffs = [float(c) for c in lower_coeffs] + [eps]
    surv = []
    for r in seeds:
        x = float(r)
        for _ in range(100):
            v, d = _horner(coeffs, x)
            step = v / d
            x -= step
            if abs(step) <= 1e-16 * max(1.0, abs(x)):
                break
        surv.append(x)
    if len(set(surv)) < len(surv):
        raise ValueError(f"eps={eps:g} is too large: roots of the upper F left the real line "
                         "(Newton from distinct seeds met the same root)")
    # sum of all roots is -A_{n-1}/A_n
    runaway = -coeffs[-2] / eps - sum(surv)
    return surv, runaway


@dataclass(frozen=True)
class CascadePair:
    """Upper model at ``A_n = xi_n = eps`` together with its limit model."""

    upper: ModelSpec
    lower: ModelSpec
    eps: float
    runaway: float

    @property
    def n(self) -> int:
        return self.upper.n


def make_pair(lower: ModelSpec, eps: float) -> CascadePair:
    if eps <= 0:
        raise ValueError("eps must be positive (a negative eps sends the runaway root into a > 0)")
    lroots = [r.a for r in lower.F.simple_roots]
    surv, run = upper_roots(lower.F.coeffs, eps, lroots)
    roots = surv + [run]
    xi = [r.xi for r in lower.F.simple_roots] + [eps]
    # every upper root lies left of the admissible interval
    upper = make_model("even", roots, xi, eps=[1] * len(roots), leading=eps, domain=lower.domain)
    return CascadePair(upper, lower, eps, run)


# ---- exact path ---------------------------------------------------------------------------

def _upper_single(A, n, ai, l):
    """``A_n sigma^i(n)_l`` from the coefficient expansion (A_n may be zero)."""
    if l < 0:
        return Fraction(0)
    return (-1) ** l * sum(ai ** (l - s) * A[n - s] for s in range(0, l + 1) if n - s >= 0)


def _upper_pair(A, n, ai, aj, l):
    if l < -1:
        return Fraction(0)
    return -(_upper_single(A, n, ai, l + 1) - _upper_single(A, n, aj, l + 1)) / (ai - aj)


def exact_limit_terms(lower: ModelSpec) -> list:
    """Per-root and per-pair coefficient comparisons at ``A_n = 0`` (all rational).

    Each row is ``(kind, l, index, upper_value, lower_value)``; ``kind`` is ``"b"`` (the
    ``xi_i/sqrt(Delta_i)`` coefficient of ``b~``), ``"c_i"`` (the ``xi_i^2/Delta_i`` coefficient
    of ``c~``), ``"c_ij0"`` / ``"c_ij1"`` (``a^0``/``a^1`` parts of the pair coefficient of ``c~``).
    Upper rows at ``k = l+1`` are compared with lower rows at ``k = l``; ``l = 0`` compares the
    first upper coefficient with 0.
    """
    m = lower.n
    n = m + 1
    lead = lower.F.leading
    roots = [r.a for r in lower.F.simple_roots]
    A = list(lower.F.coeffs) + [Fraction(0)]  # A_n = 0 exactly
    tab = build_table(roots)

    def low_single(i, k):  # A_{n-1} sigma^i(n-1)_k
        return lead * tab.si(i, k) if -1 <= k <= m else Fraction(0)

    def low_pair(i, j, k):
        return lead * tab.sij(i, j, k) if -2 <= k <= m else Fraction(0)

    rows = []
    for l in range(0, n):
        k = l + 1  # upper index; lower index is l
        for i, ai in enumerate(roots):
            up = (-1) ** k * _upper_single(A, n, ai, k - 1)
            lo = (-1) ** l * low_single(i, l - 1) if l >= 1 else Fraction(0)
            rows.append(("b", l, (i,), up, lo))
            up = Fraction((-1) ** (k + 1), 2) * _upper_single(A, n, ai, k - 1)
            lo = Fraction((-1) ** (l + 1), 2) * low_single(i, l - 1) if l >= 1 else Fraction(0)
            rows.append(("c_i", l, (i,), up, lo))
            for j, aj in enumerate(roots):
                if j == i:
                    continue
                for part, off in (("c_ij0", 1), ("c_ij1", 2)):
                    up = Fraction((-1) ** (k + 1), 2) * _upper_pair(A, n, ai, aj, k - off)
                    lo = (Fraction((-1) ** (l + 1), 2) * low_pair(i, j, l - off)
                          if l >= 1 else Fraction(0))
                    rows.append((part, l, (i, j), up, lo))
    return rows


def exact_cascade(n: int, roots=None) -> dict:
    """Exact-path report for ``n -> n-1``; ``passed`` iff every row matches with zero residual."""
    lower = lower_model(n, roots)
    rows = exact_limit_terms(lower)
    # the siik-based sigma relation itself, per surviving root and 1 <= l <= n-1
    roots_l = [r.a for r in lower.F.simple_roots]
    A = list(lower.F.coeffs) + [Fraction(0)]
    tab = build_table(roots_l)
    rel = []
    for i, ai in enumerate(roots_l):
        for l in range(1, n):
            lhs = _upper_single(A, n, ai, l)
            rhs = -lower.F.leading * tab.si(i, l - 1)
            rel.append((i, l, lhs, rhs))
    bad = [r for r in rows if r[3] != r[4]] + [r for r in rel if r[2] != r[3]]
    return {
        "n": n,
        "lower_roots": [str(r) for r in roots_l],
        "coefficient_rows": len(rows),
        "sigma_relations": len(rel),
        "mismatches": [tuple(str(x) for x in r) for r in bad],
        "passed": not bad,
    }


# ---- numeric path -------------------------------------------------------------------------

def _order(eps_seq, res):
    out = []
    for k in range(len(eps_seq) - 1):
        if res[k] > 0 and res[k + 1] > 0:
            out.append(math.log(res[k] / res[k + 1]) / math.log(eps_seq[k] / eps_seq[k + 1]))
        else:
            out.append(float("nan"))
    return out


def _ratio_ok(eps_seq, res):
    """Each consecutive residual ratio lies within a factor 2 of the eps ratio."""
    ok = []
    for k in range(len(eps_seq) - 1):
        if res[k + 1] <= 0:
            ok.append(False)
            continue
        q = (res[k] / res[k + 1]) / (eps_seq[k] / eps_seq[k + 1])
        ok.append(0.5 <= q <= 2.0)
    return ok


def sigma_limit_check(lower_coeffs, i: int, l: int, eps_sequence=DEFAULT_EPS, seeds=None) -> dict:
    """``A_n sigma^i(n)_l`` at ``A_n = eps`` (roots solved numerically) against
    ``-A_{n-1} sigma^i(n-1)_{l-1}``; the residual should shrink linearly in ``eps``.

    ``lower_coeffs`` are the ascending coefficients of ``F^(n-1)``; ``seeds`` (default: its
    roots from numpy) start the Newton polish of the surviving roots.
    """
    coeffs = [as_fraction(c) for c in lower_coeffs]
    m = len(coeffs) - 1
    n = m + 1
    if seeds is None:
        seeds = sorted(np.roots([float(c) for c in reversed(coeffs)]).real)
    seeds = [float(s) for s in seeds]
    tab = build_table([Fraction(s).limit_denominator(10**9) for s in seeds])
    rhs = -float(coeffs[-1]) * float(tab.si(i, l - 1)) if 0 <= l - 1 <= m else 0.0
    lhs, res = [], []
    for e in eps_sequence:
        surv, run = upper_roots(coeffs, e, seeds)
        others = [r for k, r in enumerate(surv) if k != i] + [run]
        # sigma_l of the n-1 roots other than a_i
        sig = np.poly(others)  # monic, descending: (-1)^l sigma_l at index l
        val = e * (-1) ** l * sig[l] if 0 <= l <= n - 1 else 0.0
        lhs.append(float(val))
        res.append(abs(val - rhs))
    return {"i": i, "l": l, "eps": list(eps_sequence), "lhs": lhs, "rhs": rhs,
            "residual": res, "order": _order(list(eps_sequence), res)}


def cascade_check(lower: ModelSpec, point: PhasePoint, eps_sequence=DEFAULT_EPS) -> dict:
    """Numeric limit at one phase point: residuals of ``Q1, Q2`` against ``p_y^2`` times the
    lower integrals, their empirical order in ``eps`` and the vanishing first coefficients."""
    lower.check(point.a)
    lsys = build_system(lower)
    q1_low = lsys.Q1(point)
    q2_low = lsys.Q2(point)
    py2 = point.p_y**2
    rows = []
    for e in eps_sequence:
        pair = make_pair(lower, e)
        usys = build_system(pair.upper)
        bt, _ = usys.btilde(point.a)
        ct, _ = usys.ctilde(point.a)
        rows.append({
            "eps": e,
            "runaway_root": pair.runaway,
            "Q1_residual": abs(usys.Q1(point) - py2 * q1_low),
            "Q2_residual": abs(usys.Q2(point) - py2 * q2_low),
            "Q1_relative": abs(usys.Q1(point) - py2 * q1_low) / abs(py2 * q1_low),
            "Q2_relative": abs(usys.Q2(point) - py2 * q2_low) / abs(py2 * q2_low),
            "b1": float(bt[1]),
            "c1": float(ct[1]),
        })
    eps = [r["eps"] for r in rows]
    out = {"n": lower.n + 1, "point": point.as_array().tolist(), "rows": rows}
    for key in ("Q1_residual", "Q2_residual"):
        res = [r[key] for r in rows]
        out[key.replace("residual", "order")] = _order(eps, res)
        out[key.replace("residual", "ratio_ok")] = _ratio_ok(eps, res)
    out["passed"] = all(out["Q1_ratio_ok"]) and all(out["Q2_ratio_ok"])
    return out


def runaway_example(eps_sequence=(1e-3, 1e-4, 1e-5, 1e-6, 1e-7)) -> dict:
    """``F = eps a^2 + a - 2``: the survivor tends to 2 and ``eps * r_runaway -> -1``.

    ``eps * sigma^1(2)_1 = eps * r_runaway`` is the left side of the sigma relation with
    ``A_1 sigma^1(1)_0 = 1``. The limit estimate uses one Richardson step on the last two
    levels (the error is linear in eps).
    """
    chk = sigma_limit_check(poly_from_roots([2]), 0, 1, eps_sequence, seeds=[2.0])
    e, v = chk["eps"], chk["lhs"]
    rich = (e[-2] * v[-1] - e[-1] * v[-2]) / (e[-2] - e[-1])
    chk["limit_estimate"] = rich
    chk["smallest_eps_value"] = v[-1]
    chk["passed"] = abs(rich - (-1.0)) < 1e-6 and abs(v[-1] + 1.0) < 1e-6
    return chk
