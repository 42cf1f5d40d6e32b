"""Metric, curvature, the R^{2,1} embedding and endpoint classification.

The surface metric in the (a, y) chart is ``g = (x'/a)^2 da^2 + dy^2 / a`` and its
scalar curvature is ``R = -(2 a x'' + x') / (2 x'^3)``.
"""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy.integrate import quad

from .errors import FitFailure
from .model import ModelSpec, sampling_interval

__all__ = [
    "metric_a",
    "scalar_curvature",
    "curvature_scan",
    "embed_R21",
    "embedding_pullback_residual",
    "EndpointClass",
    "fit_exponent",
    "classify_endpoint",
]


def _profile(obj):
    return obj.profile if isinstance(obj, ModelSpec) else obj


def metric_a(model, a: float) -> tuple:
    """Diagonal ``(g_aa, g_yy)``."""
    model.check(a)
    xd = _profile(model)(a, 1)
    return (xd / a) ** 2, 1.0 / a


def scalar_curvature(model, a: float) -> float:
    """Works for a ModelSpec or a bare RadialProfile."""
    model.check(a)
    d = _profile(model).derivatives(a, 2)
    return -(2 * a * d[2] + d[1]) / (2 * d[1] ** 3)


def curvature_scan(model, grid) -> np.ndarray:
    """Rows ``(a, R)`` over the grid (CSV-ready)."""
    return np.array([(a, scalar_curvature(model, float(a))) for a in grid])


def _reference_point(model: ModelSpec) -> float:
    lo, hi = sampling_interval(model.domain, inner=1.0)
    return 0.5 * (lo + hi)


def embed_R21(model: ModelSpec, a: float, y: float, a_ref: float | None = None) -> tuple:
    """``(X, Y, Z)`` with ``X = y/sqrt(a)``, ``Y - Z = -1/sqrt(a)``,
    ``Y + Z = y^2/sqrt(a) + 2 int_{a_ref}^a x'^2/sqrt(s) ds``."""
    model.check(a)
    a_ref = _reference_point(model) if a_ref is None else a_ref
    integral, _ = quad(lambda s: model.profile(s, 1) ** 2 / math.sqrt(s), a_ref, a,
                       epsabs=1e-13, epsrel=1e-13, limit=200)
    ra = math.sqrt(a)
    u = -1.0 / ra
    v = y * y / ra + 2.0 * integral
    return y / ra, 0.5 * (u + v), 0.5 * (v - u)


def embedding_pullback_residual(model: ModelSpec, a: float, y: float, h: float | None = None) -> float:
    """Relative mismatch between ``g`` and the pullback of ``dX^2 + dY^2 - dZ^2``.

    The Jacobian is taken by central differences (the oracle side of the check).
    """
    h = h if h is not None else 1e-5 * max(abs(a), 1e-3)
    hy = 1e-5 * max(1.0, abs(y))
    a_ref = _reference_point(model)
    cols = []
    for (da, dy, step) in ((h, 0.0, h), (0.0, hy, hy)):
        p = np.array(embed_R21(model, a + da, y + dy, a_ref))
        m = np.array(embed_R21(model, a - da, y - dy, a_ref))
        cols.append((p - m) / (2 * step))
    J = np.column_stack(cols)
    eta = np.diag([1.0, 1.0, -1.0])
    pull = J.T @ eta @ J
    gaa, gyy = metric_a(model, a)
    g = np.diag([gaa, gyy])
    return float(np.max(np.abs(pull - g)) / max(gaa, gyy))


class EndpointClass(str, enum.Enum):
    CURVATURE_SINGULAR = "CurvatureSingular"
    REMOVABLE = "Removable"
    INCONCLUSIVE = "Inconclusive"


def fit_exponent(xdot, endpoint, a1: float | None = None, decade_start: float | None = None):
    """Least-squares slope of ``log|x'|`` against ``log(distance)`` on 20 log-spaced samples.

    ``endpoint`` is ``"finite_above"``/``"finite_below"`` (needs ``a1``; distance
    ``|a - a1|``), ``"zero"`` or ``"infinity"`` (distance ``a``). Returns ``(alpha, r_squared)``.
    """
    if endpoint == "infinity":
        start = decade_start or 1e6
        dist = np.logspace(math.log10(start), math.log10(start) + 1, 20)
        pts = dist
    elif endpoint == "zero":
        start = decade_start or 1e-7
        dist = np.logspace(math.log10(start), math.log10(start) + 1, 20)
        pts = dist
    elif endpoint in ("finite_above", "finite_below"):
        if a1 is None:
            raise ValueError("finite endpoints need a1")
        start = decade_start or 1e-6 * max(1.0, abs(a1))
        dist = np.logspace(math.log10(start), math.log10(start) + 1, 20)
        pts = a1 + dist if endpoint == "finite_above" else a1 - dist
    else:
        raise ValueError(f"unknown endpoint kind {endpoint!r}")
    vals = np.array([xdot(float(p)) for p in pts])
    if np.any(vals == 0) or not np.all(np.isfinite(vals)) or len(set(np.sign(vals))) > 1:
        raise FitFailure("x' vanishes or changes sign near the endpoint")
    X = np.log(dist)
    Y = np.log(np.abs(vals))
    if np.ptp(Y) < 1e-3:
        # x' tends to a nonzero constant; what variation there is comes from the
        # analytic correction, not a power law
        return 0.0, 1.0
    slope, icpt = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + icpt)
    r2 = 1.0 - np.sum(resid**2) / np.sum((Y - Y.mean()) ** 2)
    if r2 < 0.999:
        raise FitFailure(f"power-law fit unstable (R^2 = {r2:.6f})")
    return float(slope), float(r2)


def classify_endpoint(model, endpoint: str, half_tol: float = 0.05):
    """Classify one end of the a-interval from the power law of ``x'`` there.

    ``model`` may be a ModelSpec (``endpoint`` = ``"lower"`` or ``"upper"``) or a callable
    ``x'(a)`` paired with ``endpoint`` in ``{"zero", "infinity", ("finite", a1, side)}``.
    Rules: finite ``a1 != 0`` with alpha > 1, ``0+`` with alpha > 0, and ``infinity`` with
    alpha < 0, alpha != -1/2 are curvature singularities; everything else is Inconclusive.
    Each threshold is widened by ``half_tol`` so that a fitted exponent sitting on a
    boundary value stays Inconclusive. Returns ``(EndpointClass, alpha)``.
    """
    if isinstance(model, ModelSpec):
        lo, hi = model.domain
        xdot = lambda a: model.profile(a, 1)
        if endpoint == "lower":
            kind, a1 = ("zero", 0.0) if lo == 0 else ("finite_above", lo)
        elif endpoint == "upper":
            kind, a1 = ("infinity", None) if math.isinf(hi) else ("finite_below", hi)
        else:
            raise ValueError("endpoint must be 'lower' or 'upper' for a ModelSpec")
    else:
        xdot = model
        if isinstance(endpoint, tuple):
            _, a1, side = endpoint
            kind = "finite_above" if side == "above" else "finite_below"
        else:
            kind, a1 = endpoint, None
    alpha, _ = fit_exponent(xdot, kind, a1)
    if kind.startswith("finite"):
        singular = a1 != 0 and alpha > 1 + half_tol
    elif kind == "zero":
        singular = alpha > half_tol
    else:
        singular = alpha < -half_tol and abs(alpha + 0.5) > half_tol
    return (EndpointClass.CURVATURE_SINGULAR if singular else EndpointClass.INCONCLUSIVE), alpha



_CATALOG_NAMES = ("CATALOG", "build_catalog", "conformal_factor")
__all__ += list(_CATALOG_NAMES)


def __getattr__(name):
    # the global examples live in their own module (which imports this one)
    if name in _CATALOG_NAMES:
        from . import catalog

        return getattr(catalog, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
