"""Globally defined examples on H^2 and R^2, their validity constraints and grid checks.

Every example is a simple-F model with all roots nonzero. For such models the
coordinate ``t`` defined by ``dt = dx / sqrt(a)`` with ``t -> 0`` as ``a -> 0`` has the closed form

    t = sqrt(a) * (nu + sum_i xi_i / (a_i sqrt(Delta_i)))

(``xi_i`` the profile amplitudes). Three chart families appear:

* ``h2_even``: ``u = sqrt(a/(1-a))``; ``g = (1+u^2) Omega(u)^2 (dt^2+dy^2)/t^2`` with ``t = u Omega(u)``;
* ``h2_odd``: ``u = sqrt(a)``; ``g = Omega(u)^2 (dt^2+dy^2)/t^2`` with ``t = u Omega(u)``;
* ``r2``: ``a = a1 + (a2-a1) sin^2(theta)``; ``g = (dt^2+dy^2)/a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import ConstraintViolated, InversionFailure
from .geometry import metric_a, scalar_curvature
from .model import ModelSpec, make_model
from .profile import POLE_GUARD
from .symfun import as_fraction

__all__ = [
    "CATALOG",
    "CatalogExample",
    "Chart",
    "MetricChart",
    "build_catalog",
    "conformal_factor",
    "catalog_ids",
]


@dataclass(frozen=True)
class Chart:
    """One coordinate ``c`` on the radial direction, with its map to ``a``."""

    name: str
    to_a: Callable[[float], float]
    da_dc: Callable[[float], float]
    metric: Callable[[float], tuple]  # direct (g_cc, g_yy), independent of the a-chart
    interval: tuple

    def pulled_back(self, model: ModelSpec, c: float) -> tuple:
        """``(g_cc, g_yy)`` obtained by transporting the a-chart metric."""
        a = self.to_a(c)
        gaa, gyy = metric_a(model, a)
        return gaa * self.da_dc(c) ** 2, gyy


@dataclass(frozen=True)
class MetricChart:
    """Radial charts of one example plus its conformal coordinate ``t``.

    ``base`` is the chart in which ``t(c)`` is explicit; ``factor(c)`` is the conformal
    factor against the reference metric (Poincare half plane for H2, flat for R2).
    """

    kind: str
    base: Chart
    t_of: Callable[[float], float]
    dt_dc: Callable[[float], float]
    factor: Callable[[float], float]
    reference: str  # "H2" or "R2"

    def c_of_t(self, t: float) -> float:
        return _invert(self, t)

    def conformal_factor(self, t: float) -> float:
        return self.factor(self.c_of_t(t))


def _invert(chart: MetricChart, t: float) -> float:
    lo, hi = chart.base.interval
    f = lambda c: chart.t_of(c) - t
    # walk toward each end until the sign changes
    a_, b_ = _interior(lo, hi)
    fa, fb = f(a_), f(b_)
    for _ in range(400):
        if fa * fb <= 0:
            break
        if abs(fa) < abs(fb):
            a_ = _toward(a_, lo)
            fa = f(a_)
        else:
            b_ = _toward(b_, hi)
            fb = f(b_)
    else:
        raise InversionFailure(f"could not bracket t = {t}")
    if fa * fb > 0:
        raise InversionFailure(f"could not bracket t = {t}")
    return brentq(f, a_, b_, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def _interior(lo, hi):
    if math.isinf(hi):
        return (lo + 1e-3 if lo == 0 else lo + 1e-3 * abs(lo)), max(lo + 1.0, 2.0 * abs(lo))
    span = hi - lo
    return lo + 0.25 * span, lo + 0.75 * span


def _toward(c, end):
    if math.isinf(end):
        return 2.0 * c if c > 0 else c + 1.0
    return end + 0.5 * (c - end)


@dataclass
class CatalogExample:
    id: str
    title: str
    manifold: str  # "H2", "R2" or "NONE"
    parity: str
    chart_kind: str
    defaults: dict
    constraints: Callable[[dict], list]
    builder: Callable[[dict], ModelSpec]
    notes: str = ""

    def check_constraints(self, params: dict) -> list:
        return self.constraints(params)


def _q(v):
    return as_fraction(v) if isinstance(v, (str, Fraction, int)) else Fraction(v).limit_denominator(10**12)


def _floats(seq):
    return [float(_q(v)) for v in seq]


# ---- model builders ---------------------------------------------------------------------

def _koenigs(p):
    return make_model("even", [1], [1.0], eps=[-1])


def _h2_even(p):
    c = float(p["c"])
    roots = [_q(r) for r in p["roots"]]
    xi = _floats(p["xi"])
    eps = [1 if r < 0 else -1 for r in roots]
    amps = [-e * abs(float(r)) ** 1.5 * x for r, e, x in zip(roots, eps, xi)]
    return make_model("even", [1] + roots, [c] + amps, eps=[-1] + eps)


def _r2(parity):
    def build(p):
        a1, a2 = _q(p["a1"]), _q(p["a2"])
        roots = [_q(r) for r in p.get("roots", [])]
        xi = _floats(p["xi"])
        w = math.sqrt(float(a2 - a1))
        eps = [1, -1] + [1 if r < a1 else -1 for r in roots]
        amps = [-float(a1) * w * xi[0], float(a2) * w * xi[1]]
        amps += [-e * float(r) * w * x for r, e, x in zip(roots, eps[2:], xi[2:])]
        nu = float(_q(p["nu"])) if parity == "odd" else None
        return make_model(parity, [a1, a2] + roots, amps, eps=eps, nu=nu)

    return build


_CUBIC_SIGNS = {"PP": (1, 1.0), "PM": (1, -1.0), "MP": (-1, -1.0), "MM": (-1, 1.0)}


def _cubic(tag):
    e, amp = _CUBIC_SIGNS[tag]

    def build(p):
        return make_model("odd", [_q(p["a1"])], [amp], eps=[e], nu=1.0)

    return build


def _odd_h2(tag):
    e, sign = _CUBIC_SIGNS[tag]

    def build(p):
        roots = [_q(p["a1"])] + [_q(r) for r in p["roots"]]
        amps = [sign] + [sign * x for x in _floats(p["xi"])]
        return make_model("odd", roots, amps, eps=[e] * len(roots), nu=1.0)

    return build


def _nogo(p):
    return make_model("even", pairs=[(1, (float(p["mu_plus"]),), (float(p["mu_minus"]),))])


# ---- constraint predicates --------------------------------------------------------------

def _c(ok, text):
    return (text, bool(ok))


def _distinct(values):
    return len(set(values)) == len(values)


def _cons_koenigs(p):
    return []


def _cons_h2_even(p):
    roots = [_q(r) for r in p["roots"]]
    xi = _floats(p["xi"])
    out = [
        _c(len(roots) >= 1, "n >= 2"),
        _c(len(xi) == len(roots), "one xi_i per extra root"),
        _c(float(p["c"]) > 0, "c > 0"),
        _c(all(x > 0 for x in xi), "xi_i > 0"),
        _c(all(r < 0 or r > 1 for r in roots), "a_i < 0 or a_i > 1"),
        _c(_distinct(roots), "a_i pairwise distinct"),
    ]
    return out


def _cons_r2(parity):
    def cons(p):
        a1, a2 = _q(p["a1"]), _q(p["a2"])
        roots = [_q(r) for r in p.get("roots", [])]
        xi = _floats(p["xi"])
        out = [
            _c(len(xi) == len(roots) + 2, "one xi_i per root"),
            _c(0 < a1 < a2, "0 < a1 < a2"),
            _c(all(r < a1 or r > a2 for r in roots), "a_i < a1 or a_i > a2"),
            _c(_distinct(roots) and 0 not in roots, "a_i distinct and nonzero"),
            _c(len(xi) >= 2 and xi[0] > 0 and xi[1] > 0, "xi_1 > 0, xi_2 > 0"),
            _c(all(float(r) * x > 0 for r, x in zip(roots, xi[2:])), "a_i xi_i > 0"),
        ]
        if parity == "odd":
            out.append(_c(float(_q(p["nu"])) > 0, "nu > 0"))
        return out

    return cons


_CUBIC_RANGES = {
    "PP": (lambda a: a < -1, "a1 in (-inf, -1)"),
    "PM": (lambda a: a < 0, "a1 in (-inf, 0)"),
    "MP": (lambda a: 0 < a < 1, "a1 in (0, 1)"),
    "MM": (lambda a: a > 0, "a1 in (0, +inf)"),
}


def _cons_cubic(tag):
    pred, text = _CUBIC_RANGES[tag]
    return lambda p: [_c(pred(_q(p["a1"])), text)]


def _cons_odd_h2(tag):
    def cons(p):
        a1 = _q(p["a1"])
        roots = [_q(r) for r in p["roots"]]
        xi = _floats(p["xi"])
        total = abs(float(a1)) ** -1.5 + sum(x * abs(float(r)) ** -1.5 for r, x in zip(roots, xi))
        out = [
            _c(len(roots) >= 1 and len(xi) == len(roots), "n >= 2 with one xi_i per extra root"),
            _c(all(x > 0 for x in xi), "xi_i > 0"),
            _c(_distinct(roots), "a_i pairwise distinct"),
        ]
        if tag == "PP":
            out.append(_c(all(r < a1 for r in roots) and a1 < -1, "-inf < a_i < a1 < -1"))
            out.append(_c(total < 1, "1/|a1|^(3/2) + sum xi_i/|a_i|^(3/2) < 1"))
        elif tag == "PM":
            out.append(_c(all(r < a1 for r in roots) and a1 < 0, "-inf < a_i < a1 < 0"))
        elif tag == "MP":
            out.append(_c(0 < a1 < 1 and all(r > 1 for r in roots), "0 < a1 < 1, a_i > 1"))
            out.append(_c(total > 1, "1/|a1|^(3/2) + sum xi_i/|a_i|^(3/2) > 1"))
        else:
            out.append(_c(0 < a1 < 1 and all(r > 1 for r in roots), "0 < a1 < 1, a_i > 1"))
        return out

    return cons


def _cons_nogo(p):
    return [_c(float(p["mu_plus"]) != 0 or float(p["mu_minus"]) != 0, "mu+ or mu- nonzero")]


def _reg(ex_id, title, manifold, parity, kind, defaults, cons, builder, notes=""):
    return ex_id, CatalogExample(ex_id, title, manifold, parity, kind, defaults, cons, builder, notes)


CATALOG: dict = dict([
    _reg("KOENIGS3", "n=1 even: Koenigs metric of type 3 on H2", "H2", "even", "h2_even",
         {}, _cons_koenigs, _koenigs),
    _reg("H2_EVEN", "even degree 2n on H2: F = (a-1) prod (a-a_i), 0 < a < 1", "H2", "even", "h2_even",
         {"c": 1, "roots": ["-1", "2"], "xi": [1, 0.5]}, _cons_h2_even, _h2_even),
    _reg("R2_EVEN", "even degree 2n on R2: a1 < a < a2", "R2", "even", "r2",
         {"a1": "1", "a2": "2", "roots": ["3"], "xi": [1, 1, 1]}, _cons_r2("even"), _r2("even")),
    _reg("CUBIC_PP", "cubic, eps=+, mu = 1 - (u^2-a1)^(-3/2)", "H2", "odd", "h2_odd",
         {"a1": "-2"}, _cons_cubic("PP"), _cubic("PP")),
    _reg("CUBIC_PM", "cubic, eps=+, mu = 1 + (u^2-a1)^(-3/2)", "H2", "odd", "h2_odd",
         {"a1": "-1"}, _cons_cubic("PM"), _cubic("PM")),
    _reg("CUBIC_MP", "cubic, eps=-, mu = 1 - (a1-u^2)^(-3/2)", "H2", "odd", "h2_odd",
         {"a1": "1/2"}, _cons_cubic("MP"), _cubic("MP")),
    _reg("CUBIC_MM", "cubic, eps=-, mu = 1 + (a1-u^2)^(-3/2)", "H2", "odd", "h2_odd",
         {"a1": "2"}, _cons_cubic("MM"), _cubic("MM")),
    _reg("ODD_H2_PP", "odd degree 2n+1 on H2, all eps=+, mu increasing", "H2", "odd", "h2_odd",
         {"a1": "-2", "roots": ["-4"], "xi": [1]}, _cons_odd_h2("PP"), _odd_h2("PP")),
    _reg("ODD_H2_PM", "odd degree 2n+1 on H2, all eps=+, mu decreasing", "H2", "odd", "h2_odd",
         {"a1": "-1", "roots": ["-2"], "xi": [1]}, _cons_odd_h2("PM"), _odd_h2("PM")),
    _reg("ODD_H2_MP", "odd degree 2n+1 on H2, all eps=-, Omega negative", "H2", "odd", "h2_odd",
         {"a1": "1/2", "roots": ["2"], "xi": [1]}, _cons_odd_h2("MP"), _odd_h2("MP")),
    _reg("ODD_H2_MM", "odd degree 2n+1 on H2, all eps=-, Omega positive", "H2", "odd", "h2_odd",
         {"a1": "1/2", "roots": ["2"], "xi": [1]}, _cons_odd_h2("MM"), _odd_h2("MM")),
    _reg("R2_ODD", "odd degree 2n+1 on R2: a1 < a < a2", "R2", "odd", "r2",
         {"a1": "1", "a2": "2", "roots": ["3"], "xi": [1, 1, 1], "nu": 1}, _cons_r2("odd"), _r2("odd")),
    _reg("NOGO", "F = (a^2+1): curvature blows up, no global manifold", "NONE", "even", "nogo",
         {"mu_plus": 1, "mu_minus": 0}, _cons_nogo, _nogo),
])


def catalog_ids() -> list:
    return list(CATALOG)


# ---- charts ----------------------------------------------------------------------------

def _omega_terms(model: ModelSpec):
    roots = np.array([float(r.a) for r in model.F.simple_roots])
    eps = np.array([float(r.eps) for r in model.F.simple_roots])
    xi = np.array([r.xi for r in model.F.simple_roots])
    nu = model.nu if model.parity == "odd" else 0.0
    return roots, eps, xi, nu


def _t_of_a(model):
    """``t(a)`` and ``dt/da = x'(a)/sqrt(a)`` in closed form."""
    roots, eps, xi, nu = _omega_terms(model)

    def omega(a):
        return nu + float(np.sum(xi / (roots * np.sqrt(eps * (a - roots)))))

    return omega


def _build_chart(ex: CatalogExample, model: ModelSpec, params: dict) -> MetricChart | None:
    omega_a = _t_of_a(model)
    if ex.chart_kind == "h2_even":
        to_a = lambda u: u * u / (1 + u * u)
        da = lambda u: 2 * u / (1 + u * u) ** 2
        c0, rho, xs = _h2_even_closed(ex, params)
        Omega = lambda u: omega_a(to_a(u)) / math.sqrt(1 + u * u)
        mu_closed = lambda u: c0 + sum(x * (1 + r * u * u) ** -1.5 for r, x in zip(rho, xs))
        base = Chart("u", to_a, da,
                     lambda u: ((1 + u * u) * mu_closed(u) ** 2 / (u * u), (1 + u * u) / (u * u)),
                     (0.0, math.inf))
        dt = lambda u: model.profile(to_a(u), 1) * da(u) / math.sqrt(to_a(u))
        factor = lambda u: (1 + u * u) * Omega(u) ** 2
        return MetricChart(ex.chart_kind, base, lambda u: u * Omega(u), dt, factor, "H2")
    if ex.chart_kind == "h2_odd":
        hi = math.sqrt(model.domain[1]) if math.isfinite(model.domain[1]) else math.inf
        roots, eps, xi, nu = _omega_terms(model)
        to_a = lambda u: u * u
        da = lambda u: 2 * u
        Omega = lambda u: omega_a(u * u)
        mu_closed = lambda u: nu - float(np.sum(eps * xi * (eps * (u * u - roots)) ** -1.5))
        base = Chart("u", to_a, da, lambda u: (mu_closed(u) ** 2 / (u * u), 1 / (u * u)), (0.0, hi))
        dt = lambda u: 2 * model.profile(u * u, 1)
        return MetricChart(ex.chart_kind, base, lambda u: u * Omega(u), dt,
                           lambda u: Omega(u) ** 2, "H2")
    if ex.chart_kind == "r2":
        a1, a2 = model.domain
        w = a2 - a1
        to_a = lambda th: a1 + w * math.sin(th) ** 2
        da = lambda th: 2 * w * math.sin(th) * math.cos(th)
        dx_closed = _r2_closed(params, model.parity)
        base = Chart("theta", to_a, da,
                     lambda th: (dx_closed(th) ** 2 / to_a(th) ** 2, 1 / to_a(th)),
                     (0.0, math.pi / 2))
        t_of = lambda th: math.sqrt(to_a(th)) * omega_a(to_a(th))
        dt = lambda th: model.profile(to_a(th), 1) * da(th) / math.sqrt(to_a(th))
        return MetricChart(ex.chart_kind, base, t_of, dt, lambda th: 1.0 / to_a(th), "R2")
    return None


def _h2_even_closed(ex, p):
    """``mu(u) = c + sum xi_i (1 + rho_i u^2)^{-3/2}``, ``rho_i = 1 - 1/a_i``."""
    if ex.id == "KOENIGS3":
        return 1.0, [], []
    rho = [1.0 - 1.0 / float(_q(r)) for r in p["roots"]]
    return float(p["c"]), rho, _floats(p["xi"])


def _r2_closed(p, parity):
    """``dx/dtheta`` written with the user amplitudes ``xi`` (no profile evaluation)."""
    a1, a2 = float(_q(p["a1"])), float(_q(p["a2"]))
    w = a2 - a1
    roots = [float(_q(r)) for r in p.get("roots", [])]
    xi = _floats(p["xi"])
    nu = float(_q(p["nu"])) if parity == "odd" else 0.0
    rest = [((a1 - r) / w, 1.0 if r < a1 else -1.0, r, x) for r, x in zip(roots, xi[2:])]

    def dx(th):
        s, c = math.sin(th), math.cos(th)
        val = nu * w * s * c + xi[0] * a1 * c / (s * s) + xi[1] * a2 * s / (c * c)
        return val + sum(r * x * s * c / (e * (rho + s * s)) ** 1.5 for rho, e, r, x in rest)

    return dx


def conformal_factor(chart: MetricChart, t: float) -> float:
    """Conformal factor at conformal coordinate ``t`` (inverts ``t(c)`` first)."""
    return chart.conformal_factor(t)


# ---- grid checks ---------------------------------------------------------------------

def _grid(chart: MetricChart, model: ModelSpec, size: int) -> np.ndarray:
    lo, hi = chart.base.interval
    if math.isinf(hi):
        grid = np.logspace(-4, 4, size)
    else:
        span = hi - lo
        core = np.linspace(lo, hi, size - 38)[1:-1]
        tails = span * np.logspace(-6, -2, 20)
        grid = np.unique(np.concatenate([lo + tails, core, hi - tails]))
    # keep the grid 1e-7 (relative) clear of finite ends of the a-interval
    alo, ahi = model.domain
    scale = max(1.0, abs(alo), abs(ahi) if math.isfinite(ahi) else 1.0)
    a = np.array([chart.base.to_a(float(c)) for c in grid])
    keep = a > alo
    if alo > 0:
        keep &= a - alo > 1e-7 * scale
    if math.isfinite(ahi):
        keep &= ahi - a > 1e-7 * scale
    return grid[keep]


def _approach(model: ModelSpec, levels=range(2, 13)):
    """Points of the a-interval approaching each end geometrically."""
    lo, hi = model.domain
    out = {}
    if lo == 0:
        out["lower"] = [10.0**-k for k in levels]
    else:
        span = (hi - lo) if math.isfinite(hi) else max(1.0, abs(lo))
        out["lower"] = [lo + span * 10.0**-k for k in levels if span * 10.0**-k > 10 * POLE_GUARD]
    if math.isinf(hi):
        out["upper"] = [max(1.0, lo) * 10.0**k for k in levels]
    else:
        span = hi - lo
        out["upper"] = [hi - span * 10.0**-k for k in levels if span * 10.0**-k > 10 * POLE_GUARD]
    return out


def _validity(ex: CatalogExample, model: ModelSpec, chart: MetricChart, grid_size: int) -> dict:
    grid = _grid(chart, model, grid_size)
    dts = np.array([chart.dt_dc(c) for c in grid])
    ts = np.array([chart.t_of(c) for c in grid])
    sign = np.sign(dts[0])
    monotone = bool(np.all(np.sign(dts) == sign) and sign != 0
                    and np.all(np.sign(np.diff(ts)) == sign))
    factors = np.array([chart.factor(c) for c in grid])
    # the factor is a square; the sign of t/c records the sign of Omega
    omega_sign = int(np.sign(ts[0] / grid[0])) if chart.kind != "r2" else None
    min_factor = float(np.min(np.abs(factors)))
    factor_ok = bool(np.all(factors > 0) and min_factor > 1e-6)
    interior = np.linspace(*_inner(model), 200)
    R_int = np.array([scalar_curvature(model, float(a)) for a in interior])
    R_bdry = []
    for pts in _approach(model).values():
        R_bdry += [scalar_curvature(model, float(a)) for a in pts]
    R_bdry = np.array(R_bdry)
    max_int = float(np.max(np.abs(R_int)))
    max_bdry = float(np.max(np.abs(R_bdry))) if len(R_bdry) else 0.0
    bounded = bool(np.all(np.isfinite(R_bdry)) and max_bdry <= 100.0 * (1.0 + max_int))
    spread = float(np.ptp(R_int))
    coeff = _coefficient_boundedness(model)
    passed = monotone and factor_ok and bounded and spread > 1e-6 and coeff["bounded"]
    return {
        "id": ex.id,
        "manifold_claim": ex.manifold,
        "monotone_coordinate_change": monotone,
        "t_orientation": int(sign),
        "omega_sign": omega_sign,
        "min_abs_conformal_factor": min_factor,
        "conformal_factor_nonvanishing": factor_ok,
        "max_abs_R_interior": max_int,
        "max_abs_R_boundary": max_bdry,
        "curvature_bounded": bounded,
        "R_spread": spread,
        "coefficients_bounded_at_t0": coeff["bounded"],
        "max_abs_coefficient_near_t0": coeff["max"],
        "grid_points": int(len(grid)),
        "passed": bool(passed),
        "verdict": ex.manifold if passed else "UNVERIFIED",
    }


def _inner(model):
    from .model import sampling_interval

    return sampling_interval(model.domain, inner=0.98)


def _coefficient_boundedness(model: ModelSpec) -> dict:
    """Integral coefficients along the approach to the t = 0 boundary (a -> 0 on H2 charts)."""
    from .integrals import build_system

    lo, hi = model.domain
    if lo != 0:
        return {"bounded": True, "max": 0.0}
    sysm = build_system(model)
    vals = []
    for k in range(2, 13):
        a = 10.0**-k
        bt, _ = sysm.btilde(a)
        ct, _ = sysm.ctilde(a)
        vals.append(max(np.max(np.abs(bt)), np.max(np.abs(ct))))
    vals = np.array(vals)
    ok = bool(np.all(np.isfinite(vals)) and vals[-1] <= 10.0 * max(vals[0], 1e-300) + 1e-12)
    return {"bounded": ok, "max": float(vals.max())}


def nogo_blowup(model: ModelSpec, levels: int = 5, points: int = 400) -> dict:
    """max |R| over theta-grids (a = tan theta) whose right edge halves its distance to pi/2."""
    maxima = []
    for ell in range(levels):
        gap = 0.1 * 0.5**ell
        th = np.linspace(math.pi / 4, math.pi / 2 - gap, points)
        maxima.append(float(max(abs(scalar_curvature(model, math.tan(t))) for t in th)))
    ratios = [maxima[i + 1] / maxima[i] for i in range(len(maxima) - 1)]
    return {"max_abs_R": maxima, "ratios": ratios, "doubles": all(r >= 2.0 for r in ratios)}


def build_catalog(ex_id: str, params: dict | None = None, grid_size: int = 10_000):
    """``(model, chart, report)`` for one catalog example.

    Raises ConstraintViolated when ``params`` break the example's inequalities.
    """
    if ex_id not in CATALOG:
        raise KeyError(f"unknown catalog id {ex_id!r}; known: {', '.join(CATALOG)}")
    ex = CATALOG[ex_id]
    p = dict(ex.defaults)
    if params:
        p.update(params)
    for text, ok in ex.check_constraints(p):
        if not ok:
            raise ConstraintViolated(ex_id, text, f"params={p}")
    model = ex.builder(p)
    chart = _build_chart(ex, model, p)
    if ex.chart_kind == "nogo":
        blow = nogo_blowup(model)
        report = {"id": ex_id, "manifold_claim": "NONE", "curvature_blowup": blow,
                  "passed": blow["doubles"], "verdict": "NONE" if blow["doubles"] else "UNVERIFIED"}
    else:
        report = _validity(ex, model, chart, grid_size)
    report["params"] = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in p.items()}
    return model, chart, report
