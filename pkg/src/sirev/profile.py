"""Radial profiles x(a) and the linear operator that linearizes the integrability conditions.

The operator of order k attached to a polynomial F acts on x as

    Op_k[F] x = sum_{s=0}^{k} F^{(k-s)} / (k-s)! * D^s x / (1/2)_s

and the radial profile of an even system satisfies ``Op_n[F] x = 0``; for odd
systems ``Op_n[F] x - (n + 1/2) nu_n a`` is a constant. Every profile is a
finite sum of basis terms whose derivatives of any order are available in
closed form (no numerical differentiation anywhere in this module).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegenerateSpec, OutOfDomain
from .symfun import as_fraction, poly_from_roots

__all__ = [
    "POLE_GUARD",
    "pochhammer",
    "half_pochhammer",
    "chebyshev_u",
    "SimpleRoot",
    "MultipleRoot",
    "ComplexPair",
    "StructurePoly",
    "PoleTerm",
    "PairTerm",
    "AffineTerm",
    "RadialProfile",
    "build_profile",
    "eval_profile",
    "apply_opn",
    "opn_terms",
    "ode_terms",
    "ode_residual",
]

# evaluation closer than this to a pole raises OutOfDomain
POLE_GUARD = 1e-8


def pochhammer(z, s: int):
    """Rising factorial ``z (z+1) ... (z+s-1)``; exact for Fraction input."""
    out = Fraction(1) if isinstance(z, Fraction) else 1.0
    for t in range(s):
        out *= z + t
    return out


def half_pochhammer(s: int) -> float:
    return float(pochhammer(Fraction(1, 2), s))


def chebyshev_u(k: int, z: float) -> float:
    """Chebyshev polynomial of the second kind, with the convention ``U_{-1} = 0``."""
    if k < -1:
        raise ValueError(f"U_k defined for k >= -1, got {k}")
    if k == -1:
        return 0.0
    prev, cur = 0.0, 1.0
    for _ in range(k):
        prev, cur = cur, 2.0 * z * cur - prev
    return cur


@dataclass(frozen=True)
class SimpleRoot:
    a: Fraction
    eps: int
    xi: float

    def __post_init__(self):
        object.__setattr__(self, "a", as_fraction(self.a))
        if self.eps not in (1, -1):
            raise ValueError(f"eps must be +1 or -1, got {self.eps}")
        object.__setattr__(self, "xi", float(self.xi))


@dataclass(frozen=True)
class MultipleRoot:
    a: Fraction
    eps: int
    mu: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", as_fraction(self.a))
        if self.eps not in (1, -1):
            raise ValueError(f"eps must be +1 or -1, got {self.eps}")
        mu = tuple(float(m) for m in self.mu)
        if len(mu) < 2:
            raise ValueError("a multiple real zero needs multiplicity r >= 2")
        object.__setattr__(self, "mu", mu)

    @property
    def r(self) -> int:
        return len(self.mu)


@dataclass(frozen=True)
class ComplexPair:
    """Factor ``(a^2 + scale^2)^r`` with amplitudes for the two real basis families."""

    scale: Fraction
    mu_plus: tuple
    mu_minus: tuple

    def __post_init__(self):
        object.__setattr__(self, "scale", as_fraction(self.scale))
        if self.scale <= 0:
            raise ValueError("complex pair scale must be positive")
        mp = tuple(float(m) for m in self.mu_plus)
        mm = tuple(float(m) for m in self.mu_minus)
        if len(mp) != len(mm) or not mp:
            raise ValueError("mu_plus and mu_minus must have the same positive length r")
        object.__setattr__(self, "mu_plus", mp)
        object.__setattr__(self, "mu_minus", mm)

    @property
    def r(self) -> int:
        return len(self.mu_plus)


@dataclass(frozen=True)
class StructurePoly:
    """The polynomial F fixing G and the linearizing ODE, with its zero structure."""

    simple_roots: tuple = ()
    multiple: MultipleRoot | None = None
    pairs: tuple = ()
    leading: Fraction = Fraction(1)
    coeffs: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "simple_roots", tuple(self.simple_roots))
        object.__setattr__(self, "pairs", tuple(self.pairs))
        object.__setattr__(self, "leading", as_fraction(self.leading))
        if self.leading == 0:
            raise ValueError("leading coefficient A_n must be nonzero")
        real = [r.a for r in self.simple_roots]
        if len(set(real)) != len(real):
            raise ValueError("simple roots must be pairwise distinct")
        if self.multiple is not None and self.multiple.a in real:
            raise ValueError("the multiple zero coincides with a simple root")
        roots = list(real)
        if self.multiple is not None:
            roots += [self.multiple.a] * self.multiple.r
        coeffs = list(poly_from_roots(roots))
        for p in self.pairs:
            quad = (p.scale**2, Fraction(0), Fraction(1))
            for _ in range(p.r):
                coeffs = _poly_mul(coeffs, quad)
        coeffs = tuple(self.leading * c for c in coeffs)
        if len(coeffs) < 2:
            raise ValueError("F must have degree n >= 1")
        object.__setattr__(self, "coeffs", coeffs)
        # F^{(k)}/k! as ascending float coefficient arrays
        n = len(coeffs) - 1
        taylor = []
        for k in range(n + 1):
            taylor.append(
                np.array([float(math.comb(m, k) * coeffs[m]) for m in range(k, n + 1)])
            )
        object.__setattr__(self, "_taylor", tuple(taylor))

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_simple(self) -> bool:
        return self.multiple is None and not self.pairs

    @property
    def extended(self) -> bool:
        """Mixed non-simple structure; its profile basis is the union of the separate bases."""
        kinds = (self.multiple is not None) + len(self.pairs)
        return kinds > 1

    def taylor(self, a: float, k: int) -> float:
        """``F^{(k)}(a) / k!``; zero for k > n."""
        if k > self.n:
            return 0.0
        c = self._taylor[k]
        return float(np.polynomial.polynomial.polyval(a, c))

    def __call__(self, a: float) -> float:
        return self.taylor(a, 0)


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(q):
            out[i + j] += x * y
    return out


@dataclass(frozen=True)
class PoleTerm:
    """``coef * Delta^(-m)`` with ``Delta = eps (a - root)`` and half-integer ``m``."""

    root: float
    eps: int
    coef: float
    m: float = 0.5

    def delta(self, a: float) -> float:
        return self.eps * (a - self.root)

    def derivative(self, a: float, s: int) -> float:
        d = self.delta(a)
        return self.coef * (-self.eps) ** s * pochhammer(self.m, s) * d ** (-self.m - s)


@dataclass(frozen=True)
class PairTerm:
    """Amplitudes on the k-th real basis pair attached to ``(a^2 + scale^2)``.

    ``P_k = sqrt(2) Re (scale + i a)^(1/2 - k)`` and ``Q_k = -sqrt(2) Im (...)``; with
    ``a = scale tan(theta)`` these are ``r^(1/2-k)`` times ``cos(theta/2) [U_{k-1} - U_{k-2}]``
    and ``sin(theta/2) [U_{k-1} + U_{k-2}]`` evaluated at ``cos(theta)``. The normalization
    makes ``P_1 = sqrt(sqrt(a^2+s^2) + s) / sqrt(a^2+s^2)``.
    """

    scale: float
    k: int
    mu_plus: float
    mu_minus: float

    def basis(self, a: float, s: int = 0) -> tuple:
        """``(D^s P_k, D^s Q_k)`` at ``a``."""
        theta = math.atan2(a, self.scale)
        r = math.hypot(a, self.scale)
        c = math.cos(theta)
        j = self.k + s
        big_m = j - 0.5
        u1 = chebyshev_u(j - 1, c)
        u2 = chebyshev_u(j - 2, c) if j >= 1 else 0.0
        cos_m = math.cos(theta / 2) * (u1 - u2)
        sin_m = math.sin(theta / 2) * (u1 + u2)
        # (-i)^s (cos - i sin)
        re, im = [(cos_m, -sin_m), (-sin_m, -cos_m), (-cos_m, sin_m), (sin_m, cos_m)][s % 4]
        pref = math.sqrt(2.0) * pochhammer(self.k - 0.5, s) * r ** (-big_m)
        return pref * re, -pref * im

    def derivative(self, a: float, s: int) -> float:
        p, q = self.basis(a, s)
        return self.mu_plus * p + self.mu_minus * q


@dataclass(frozen=True)
class AffineTerm:
    """``nu a / 2``: the extra linear piece of odd-degree profiles."""

    nu: float

    def derivative(self, a: float, s: int) -> float:
        if s == 0:
            return 0.5 * self.nu * a
        if s == 1:
            return 0.5 * self.nu
        return 0.0


@dataclass(frozen=True)
class RadialProfile:
    terms: tuple
    domain: tuple = (-math.inf, math.inf)
    poles: tuple = ()

    @property
    def nu(self) -> float:
        return sum(t.nu for t in self.terms if isinstance(t, AffineTerm))

    def check(self, a: float):
        lo, hi = self.domain
        if not lo < a < hi:
            raise OutOfDomain(f"a={a!r} outside the profile domain ({lo}, {hi})")
        for p in self.poles:
            if abs(a - p) < POLE_GUARD:
                raise OutOfDomain(f"a={a!r} within {POLE_GUARD} of the pole at {p}")

    def __call__(self, a: float, order: int = 0) -> float:
        return eval_profile(self, a, order)

    def derivatives(self, a: float, max_order: int) -> np.ndarray:
        """``[x(a), x'(a), ..., x^{(max_order)}(a)]``."""
        self.check(a)
        out = np.zeros(max_order + 1)
        for t in self.terms:
            for s in range(max_order + 1):
                out[s] += t.derivative(a, s)
        return out


def eval_profile(profile: RadialProfile, a: float, order: int = 0) -> float:
    if order < 0:
        raise ValueError("derivative order must be nonnegative")
    profile.check(a)
    return float(sum(t.derivative(a, order) for t in profile.terms))


def _natural_domain(F: StructurePoly) -> tuple:
    lo, hi = -math.inf, math.inf
    signed = [(float(r.a), r.eps) for r in F.simple_roots]
    if F.multiple is not None:
        signed.append((float(F.multiple.a), F.multiple.eps))
    for a0, eps in signed:
        if eps > 0:
            lo = max(lo, a0)
        else:
            hi = min(hi, a0)
    if not lo < hi:
        raise ValueError(f"sign choices leave no interval where every Delta_i > 0 ({lo}, {hi})")
    return lo, hi


def build_profile(F: StructurePoly, parity: str = "even", nu: float | None = None,
                  domain: tuple | None = None) -> RadialProfile:
    """General closed-form solution of the linearizing ODE for the zero structure of F.

    Simple zeros contribute ``xi_i / sqrt(Delta_i)``, a multiple real zero of order r
    contributes ``mu_k Delta_1^(1/2-k)`` for k = 1..r, a complex pair contributes
    ``mu+_k P_k + mu-_k Q_k``. Odd parity adds ``nu a / 2``.
    """
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if parity == "odd" and nu is None:
        raise ValueError("odd parity needs nu")
    if parity == "even" and nu not in (None, 0, 0.0):
        raise ValueError("even parity has no affine term; nu must be omitted")
    terms = []
    amplitudes = []
    for r in F.simple_roots:
        terms.append(PoleTerm(float(r.a), r.eps, r.xi, 0.5))
        amplitudes.append(r.xi)
    if F.multiple is not None:
        m = F.multiple
        for k, mu in enumerate(m.mu, start=1):
            terms.append(PoleTerm(float(m.a), m.eps, mu, k - 0.5))
            amplitudes.append(mu)
    for p in F.pairs:
        for k in range(1, p.r + 1):
            terms.append(PairTerm(float(p.scale), k, p.mu_plus[k - 1], p.mu_minus[k - 1]))
            amplitudes += [p.mu_plus[k - 1], p.mu_minus[k - 1]]
    if not any(amplitudes):
        raise DegenerateSpec("all amplitude parameters vanish (constant-curvature case)")
    if parity == "odd":
        terms.append(AffineTerm(float(nu)))
    natural = _natural_domain(F)
    if domain is not None:
        lo, hi = max(natural[0], domain[0]), min(natural[1], domain[1])
        if not lo < hi:
            raise ValueError(f"requested domain {domain} misses the natural interval {natural}")
        natural = (lo, hi)
    poles = tuple(float(r.a) for r in F.simple_roots)
    if F.multiple is not None:
        poles += (float(F.multiple.a),)
    return RadialProfile(tuple(terms), natural, poles)


def opn_terms(F: StructurePoly, profile: RadialProfile, a: float, k: int) -> np.ndarray:
    """The k+1 summands of ``Op_k[F] x`` at ``a``."""
    if k < 0:
        raise ValueError("operator order must be nonnegative")
    ders = profile.derivatives(a, k)
    return np.array(
        [F.taylor(a, k - s) * ders[s] / half_pochhammer(s) for s in range(k + 1)]
    )


def apply_opn(F: StructurePoly, profile: RadialProfile, a: float, k: int) -> float:
    return float(opn_terms(F, profile, a, k).sum())


def ode_terms(model, a: float) -> np.ndarray:
    """Summands whose total is :func:`ode_residual`; their max magnitude sets the scale."""
    terms = opn_terms(model.F, model.profile, a, model.F.n)
    if model.parity == "odd":
        n = model.F.n
        terms = np.append(terms, -(n + 0.5) * model.nu_n * a)
    return terms


def ode_residual(model, a: float) -> float:
    """Even: ``Op_n[F] x`` (vanishes). Odd: ``Op_n[F] x - (n + 1/2) nu_n a`` (a constant).

    ``nu_n`` is the constant top coefficient ``b_n = A_n nu`` of the first integral.
    """
    return float(ode_terms(model, a).sum())
