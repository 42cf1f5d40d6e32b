"""ModelSpec: parity, structure polynomial, radial profile and a-interval of one system."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpec, OutOfDomain
from .phase import PhasePoint
from .profile import (
    AffineTerm,
    ComplexPair,
    MultipleRoot,
    RadialProfile,
    SimpleRoot,
    StructurePoly,
    build_profile,
    ode_terms,
)

__all__ = [
    "ModelSpec",
    "make_model",
    "sampling_interval",
    "sample_a",
    "random_phase_point",
    "pi_value",
    "hamiltonian",
]


@dataclass(frozen=True)
class ModelSpec:
    parity: str
    F: StructurePoly
    profile: RadialProfile
    domain: tuple

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        lo, hi = self.domain
        plo, phi = self.profile.domain
        if not (lo >= 0 and lo < hi):
            raise ValueError(f"domain {self.domain} must be a nonempty interval of a > 0")
        if lo < plo or hi > phi:
            raise ValueError(f"domain {self.domain} leaves the profile interval {self.profile.domain}")
        has_affine = any(isinstance(t, AffineTerm) for t in self.profile.terms)
        if has_affine != (self.parity == "odd"):
            raise ValueError("odd models carry the affine term nu*a/2, even models must not")

    @property
    def n(self) -> int:
        return self.F.n

    @property
    def lead(self) -> float:
        return float(self.F.leading)

    @property
    def nu(self) -> float:
        return self.profile.nu

    @property
    def nu_n(self) -> float:
        """Constant top coefficient ``b_n`` of the odd first integral: ``A_n * nu``."""
        return self.lead * self.nu

    @property
    def degree(self) -> int:
        return 2 * self.n + (1 if self.parity == "odd" else 0)

    def check(self, a: float):
        lo, hi = self.domain
        if not lo < a < hi:
            raise OutOfDomain(f"a={a!r} outside the model domain ({lo}, {hi})")
        self.profile.check(a)


def make_model(parity="even", roots=(), xi=(), eps=None, leading=1, nu=None,
               multiple=None, pairs=(), domain=None, check_ode=True) -> ModelSpec:
    """Convenience constructor.

    ``roots``/``xi``/``eps`` describe the simple zeros (eps defaults to +1);
    ``multiple`` is ``(a1, eps, mu_tuple)`` and ``pairs`` a list of
    ``(scale, mu_plus, mu_minus)``.
    """
    roots = list(roots)
    xi = list(xi)
    if len(xi) != len(roots):
        raise ValueError(f"{len(roots)} simple roots but {len(xi)} amplitudes xi")
    eps = [1] * len(roots) if eps is None else list(eps)
    if len(eps) != len(roots):
        raise ValueError(f"{len(roots)} simple roots but {len(eps)} signs eps")
    simple = tuple(SimpleRoot(r, e, x) for r, e, x in zip(roots, eps, xi))
    mult = MultipleRoot(*multiple) if multiple is not None else None
    prs = tuple(ComplexPair(*p) for p in pairs)
    F = StructurePoly(simple, mult, prs, leading)
    profile = build_profile(F, parity, nu)
    lo, hi = profile.domain
    lo = max(lo, 0.0)
    if domain is not None:
        lo, hi = max(lo, float(domain[0])), min(hi, float(domain[1]))
    if not lo < hi:
        raise ValueError(f"no admissible a-interval: ({lo}, {hi})")
    model = ModelSpec(parity, F, profile, (lo, hi))
    if check_ode:
        _check_ode(model)
    return model


def _check_ode(model: ModelSpec, tol: float = 1e-8):
    pts = np.linspace(*sampling_interval(model.domain, inner=0.8), 5)
    res = []
    for a in pts:
        t = ode_terms(model, float(a))
        res.append((t.sum(), np.abs(t).max()))
    if model.parity == "even":
        bad = [r for r, s in res if abs(r) > tol * max(s, 1e-300)]
    else:
        ref = res[0][0]
        bad = [r for r, s in res if abs(r - ref) > tol * max(s, res[0][1], 1e-300)]
    if bad:
        raise DegenerateSpec(f"profile does not solve the linearizing ODE (residuals {bad})")


def sampling_interval(domain, inner: float = 0.8) -> tuple:
    """Central fraction ``inner`` of the domain; an infinite end is replaced by a finite cap."""
    lo, hi = domain
    if math.isinf(hi):
        hi = lo + max(10.0, 10.0 * abs(lo))
    pad = 0.5 * (1.0 - inner) * (hi - lo)
    return lo + pad, hi - pad


def sample_a(model: ModelSpec, rng: np.random.Generator, size=None):
    lo, hi = sampling_interval(model.domain)
    return rng.uniform(lo, hi, size)


def pi_value(model: ModelSpec, a: float, p_a: float) -> float:
    return a * p_a / model.profile(a, 1)


def hamiltonian(model: ModelSpec, point: PhasePoint) -> float:
    """``Pi^2 + a p_y^2`` with ``Pi = a p_a / x'(a)``."""
    model.check(point.a)
    pi = pi_value(model, point.a, point.p_a)
    return pi * pi + point.a * point.p_y**2


def random_phase_point(model: ModelSpec, rng: np.random.Generator,
                       h_range=(0.1, 10.0)) -> PhasePoint:
    """a uniform in the central 80%, momenta normal and rescaled so H lands in ``h_range``."""
    a = float(sample_a(model, rng))
    y = float(rng.normal())
    pa, py = rng.normal(size=2)
    h = hamiltonian(model, PhasePoint(a, y, pa, py))
    target = math.exp(rng.uniform(math.log(h_range[0]), math.log(h_range[1])))
    k = math.sqrt(target / h) if h > 0 else 1.0
    return PhasePoint(a, y, float(pa * k), float(py * k))
