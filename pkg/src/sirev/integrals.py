"""Closed-form first integrals for simple F and checks of their defining equations.

Conventions (0-based root index i, coefficient index k as written):

* even degree 2n: ``Q1 = sum_{k=1}^n bt_k H^(n-k) Pi p_y^(2k-1)``,
  ``Q2 = sum_{k=1}^n ct_k H^(n-k) p_y^(2k)``,
  ``G = sum_{k=0}^n A_k H^k p_y^(2(n-k))``;
* odd degree 2n+1: k runs over 0..n, the p_y powers are ``2k``, ``2k+1`` and
  ``2(n-k)+1``.

With ``w_i = xi_i / sqrt(Delta_i)`` the coefficients are

    bt_k = A_n (-1)^k (nu sigma_k + sum_i w_i sigma^i_{k-1})
    ct_k = A_n (-1)^(k+1)/2 [ nu^2 a sigma_k + 2 nu sum_i w_i (sigma^i_k + a sigma^i_{k-1})
                              + sum_i w_i^2 sigma^i_{k-1}
                              + sum_{i != j} w_i w_j (sigma^ij_{k-1} + a sigma^ij_{k-2}) ]

(nu = 0 for even parity). Arrays returned by the evaluators are indexed by k
directly and have length n+1; for even parity slot 0 is unused and zero.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import NotSimple
from .model import ModelSpec, make_model, sample_a
from .phase import Jet, Observable, PhasePoint, bracket_with_scale
from .profile import build_profile, half_pochhammer
from .symfun import SymTable, as_fraction, build_table

__all__ = [
    "ModelSpec",
    "make_model",
    "IntegralSystem",
    "build_system",
    "eval_G",
    "eval_S1",
    "eval_S2",
    "q_matrix",
    "algebraic_relation_residual",
    "check_defining_systems",
    "odd_from_even",
    "independence_rank",
    "conservation_residuals",
]


class IntegralSystem:
    """Evaluators for G, Q1, Q2, S1, S2 of one model with simple F."""

    def __init__(self, model: ModelSpec, table: SymTable, degenerate: bool = False):
        self.model = model
        self.table = table
        self.degenerate = degenerate
        F = model.F
        n = F.n
        self.n = n
        self.parity = model.parity
        self.lead = float(F.leading)
        self.A = tuple(float(c) for c in F.coeffs)
        self.nu = model.nu if model.parity == "odd" else 0.0
        self.roots = np.array([float(r.a) for r in F.simple_roots])
        self.eps = np.array([float(r.eps) for r in F.simple_roots])
        self.xi = np.array([r.xi for r in F.simple_roots])
        self.sig = np.array([float(s) for s in table.sigma])
        self.SI = np.array([[float(v) for v in row] for row in table.sigma_ex])
        sij = np.zeros((n, n, n + 3))
        for (i, j), row in table.sigma_ex2.items():
            sij[i, j] = [float(v) for v in row]
        self.SIJ = sij
        self.kmin = 1 if self.parity == "even" else 0
        self._jets = lru_cache(maxsize=256)(self._compute_jets)

    # ---- coefficient functions of a -------------------------------------------------

    def _w(self, a: float):
        # coefficients are algebraic in a: only the profile interval matters here
        self.model.profile.check(a)
        d = self.eps * (a - self.roots)
        w = self.xi / np.sqrt(d)
        wd = -0.5 * self.eps * self.xi * d**-1.5
        return w, wd

    def btilde(self, a: float):
        """``(bt, d bt/da)`` as arrays indexed by k."""
        n = self.n
        w, wd = self._w(a)
        bt = np.zeros(n + 1)
        bd = np.zeros(n + 1)
        for k in range(self.kmin, n + 1):
            s = (-1) ** k * self.lead
            bt[k] = s * (self.nu * self.sig[k] + w @ self.SI[:, k])
            bd[k] = s * (wd @ self.SI[:, k])
        return bt, bd

    def beta(self, a: float):
        """``beta_k = (-1)^k bt_k`` and its derivative."""
        bt, bd = self.btilde(a)
        sgn = np.array([(-1) ** k for k in range(self.n + 1)], dtype=float)
        return sgn * bt, sgn * bd

    def ctilde(self, a: float):
        """``(ct, d ct/da)`` as arrays indexed by k; the derivative is differentiated by hand."""
        n = self.n
        nu = self.nu
        w, wd = self._w(a)
        ww = np.outer(w, w)
        wwd = np.outer(wd, w) + np.outer(w, wd)
        ct = np.zeros(n + 1)
        cd = np.zeros(n + 1)
        for k in range(self.kmin, n + 1):
            s1 = self.SI[:, k]          # sigma^i_{k-1}
            pair = self.SIJ[:, :, k + 1] + a * self.SIJ[:, :, k]
            q = w**2 @ s1 + np.sum(ww * pair)
            qd = 2 * (w * wd) @ s1 + np.sum(wwd * pair) + np.sum(ww * self.SIJ[:, :, k])
            if nu:
                s0 = self.SI[:, k + 1]  # sigma^i_k
                q += nu * nu * a * self.sig[k] + 2 * nu * (w @ (s0 + a * s1))
                qd += nu * nu * self.sig[k] + 2 * nu * (wd @ (s0 + a * s1) + w @ s1)
            f = (-1) ** (k + 1) * self.lead / 2
            ct[k] = f * q
            cd[k] = f * qd
        return ct, cd

    # ---- generic b_k from F and derivatives of x ------------------------------------

    def _B(self, a: float, K: int, ders, magnitude: bool = False):
        F = self.model.F
        val = 0.0
        der = 0.0
        op = abs if magnitude else (lambda v: v)
        for s in range(1, K + 1):
            hp = half_pochhammer(s)
            val += op(F.taylor(a, K - s) * ders[s] / hp)
            der += (op((K - s + 1) * F.taylor(a, K - s + 1) * ders[s] / hp)
                    + op(F.taylor(a, K - s) * ders[s + 1] / hp))
        return val, der

    def bk_magnitude(self, a: float):
        """Sum of absolute summands behind each ``b_k`` and ``b_k'``.

        The Taylor sums cancel heavily near a pole; this is the scale their rounding
        error is proportional to.
        """
        n = self.n
        ders = self.model.profile.derivatives(a, n + 2)
        b = np.zeros(n + 1)
        bd = np.zeros(n + 1)
        shift = 0 if self.parity == "even" else 1
        for k in range(1 - shift, n + 1 - shift):
            b[k], bd[k] = self._B(a, k + shift, ders, magnitude=True)
        if self.parity == "odd":
            b[n] = abs(self.lead * self.nu)
        return b, bd

    def bk(self, a: float):
        """Coefficients of Q1 in the Pi^(odd) p_y basis, from F and x alone, with derivatives.

        Even: ``b_k = sum_{s=1}^k F^(k-s)/(k-s)! D^s x / (1/2)_s`` for k = 1..n.
        Odd: ``b_k`` uses ``K = k+1`` in the same sum for k < n and ``b_n = A_n nu``.
        """
        n = self.n
        ders = self.model.profile.derivatives(a, n + 2)
        b = np.zeros(n + 1)
        bd = np.zeros(n + 1)
        if self.parity == "even":
            for k in range(1, n + 1):
                b[k], bd[k] = self._B(a, k, ders)
        else:
            for k in range(n):
                b[k], bd[k] = self._B(a, k + 1, ders)
            b[n] = self.lead * self.nu
        return b, bd

    def bk_pole_form(self, a: float) -> np.ndarray:
        """Even parity only: ``b_k = -A_n sum_i eps_i xi_i Delta_i^(-1/2) D^(k-1)(Fhat/Delta_i)/(k-1)!``."""
        if self.parity != "even":
            raise ValueError("the pole form of b_k is stated for even parity")
        n = self.n
        w, _ = self._w(a)
        b = np.zeros(n + 1)
        for i in range(n):
            # Fhat/Delta_i = eps_i prod_{j != i}(a - a_j); the eps_i cancels against the prefactor
            desc = [(-1) ** m * self.SI[i, m + 1] for m in range(n)]
            asc = np.array(desc[::-1])
            for k in range(1, n + 1):
                tk = sum(math.comb(m, k - 1) * asc[m] * a ** (m - k + 1) for m in range(k - 1, n))
                b[k] += -self.lead * w[i] * tk
        return b

    def btilde_from_bk(self, a: float) -> np.ndarray:
        """Change of basis ``Pi^2 = H - a p_y^2`` applied to :meth:`bk`."""
        b, _ = self.bk(a)
        return _change_basis(b, self.n, self.parity, a)

    # ---- exact rational evaluation ---------------------------------------------------

    def exact_coefficients(self, a) -> tuple:
        """``(bt closed form, bt via change of basis)`` in Fractions.

        Requires every ``Delta_i`` at ``a`` to be the square of a rational; xi and nu enter
        through their exact binary values.
        """
        a = as_fraction(a)
        n = self.n
        F = self.model.F
        sq = []
        for r in F.simple_roots:
            d = r.eps * (a - r.a)
            root = _rational_sqrt(d)
            if root is None or d <= 0:
                raise ValueError(f"Delta at a={a} is not a positive rational square")
            sq.append((d, root))
        xi = [Fraction(r.xi) for r in F.simple_roots]
        nu = Fraction(self.nu)
        lead = F.leading
        t = self.table
        w = [xi[i] / sq[i][1] for i in range(n)]
        closed = [Fraction(0)] * (n + 1)
        for k in range(self.kmin, n + 1):
            s = sum(w[i] * t.si(i, k - 1) for i in range(n))
            closed[k] = (-1) ** k * lead * (nu * t.s(k) + s)
        # D^s x exactly: pole terms (-eps)^s (1/2)_s Delta^(-1/2-s), affine part nu/2 at s = 1
        ders = []
        for s in range(n + 2):
            acc = Fraction(0)
            for i, r in enumerate(F.simple_roots):
                d, root = sq[i]
                acc += xi[i] * (-r.eps) ** s * _poch_half(s) / (root * d**s)
            if s == 1:
                acc += nu / 2
            ders.append(acc)
        coeffs = F.coeffs

        def taylor(j):
            return sum(math.comb(m, j) * coeffs[m] * a ** (m - j) for m in range(j, n + 1)) if j <= n else 0

        def B(K):
            return sum(taylor(K - s) * ders[s] / _poch_half(s) for s in range(1, K + 1))

        b = [Fraction(0)] * (n + 1)
        if self.parity == "even":
            for k in range(1, n + 1):
                b[k] = B(k)
        else:
            for k in range(n):
                b[k] = B(k + 1)
            b[n] = lead * nu
        via = _change_basis(b, n, self.parity, a)
        return closed, list(via)

    # ---- phase-space observables ---------------------------------------------------

    def _compute_jets(self, point: PhasePoint) -> dict:
        n = self.n
        a = point.a
        self.model.check(a)
        ders = self.model.profile.derivatives(a, 2)
        ja = Jet.var(0, a)
        jy = Jet.var(1, point.y)
        jpa = Jet.var(2, point.p_a)
        jpy = Jet.var(3, point.p_y)
        xd = Jet.of_a(ders[1], ders[2])
        pi = ja * jpa / xd
        H = pi * pi + ja * jpy * jpy
        odd = self.parity == "odd"
        Hp = [Jet.const(1.0)]
        for _ in range(n):
            Hp.append(Hp[-1] * H)
        maxp = 2 * n + 2
        Pp = [Jet.const(1.0)]
        for _ in range(maxp):
            Pp.append(Pp[-1] * jpy)
        G = Jet.const(0.0)
        for k in range(n + 1):
            G = G + self.A[k] * Hp[k] * Pp[2 * (n - k) + (1 if odd else 0)]
        bt, bd = self.btilde(a)
        ct, cd = self.ctilde(a)
        Q1 = Jet.const(0.0)
        Q2 = Jet.const(0.0)
        for k in range(self.kmin, n + 1):
            e1 = 2 * k if odd else 2 * k - 1
            e2 = 2 * k + 1 if odd else 2 * k
            Q1 = Q1 + Jet.of_a(bt[k], bd[k]) * Hp[n - k] * pi * Pp[e1]
            Q2 = Q2 + Jet.of_a(ct[k], cd[k]) * Hp[n - k] * Pp[e2]
        S1 = Q1 + jy * G
        S2 = Q2 + jy * Q1 + 0.5 * (jy * jy) * G
        return {"H": H, "Pi": pi, "P_y": jpy, "y": jy, "G": G, "Q1": Q1, "Q2": Q2, "S1": S1, "S2": S2}

    def magnitudes(self, point: PhasePoint) -> dict:
        """Sum of absolute summands behind H, P_y, S1 and S2 at ``point``.

        An invariant can sit near zero as the difference of much larger terms; drift
        measured against this scale stays meaningful there.
        """
        n = self.n
        a, y, py = point.a, point.y, point.p_y
        odd = self.parity == "odd"
        pi = abs(a * point.p_a / self.model.profile(a, 1))
        H = pi * pi + abs(a) * py * py
        G = sum(abs(self.A[k]) * H**k * abs(py) ** (2 * (n - k) + (1 if odd else 0)) for k in range(n + 1))
        bt, _ = self.btilde(a)
        ct, _ = self.ctilde(a)
        Q1 = Q2 = 0.0
        for k in range(self.kmin, n + 1):
            e1 = 2 * k if odd else 2 * k - 1
            Q1 += abs(bt[k]) * H ** (n - k) * pi * abs(py) ** e1
            Q2 += abs(ct[k]) * H ** (n - k) * abs(py) ** (e1 + 1)
        return {"H": H, "P_y": abs(py), "S1": Q1 + abs(y) * G,
                "S2": Q2 + abs(y) * Q1 + 0.5 * y * y * G}

    def observable(self, name: str) -> Observable:
        return Observable(lambda p: self._jets(p)[name], name)

    @property
    def H(self) -> Observable:
        return self.observable("H")

    @property
    def P_y(self) -> Observable:
        return self.observable("P_y")

    @property
    def G(self) -> Observable:
        return self.observable("G")

    @property
    def Q1(self) -> Observable:
        return self.observable("Q1")

    @property
    def Q2(self) -> Observable:
        return self.observable("Q2")

    @property
    def S1(self) -> Observable:
        return self.observable("S1")

    @property
    def S2(self) -> Observable:
        return self.observable("S2")


def _rational_sqrt(q: Fraction):
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def _poch_half(s: int) -> Fraction:
    out = Fraction(1)
    for t in range(s):
        out *= Fraction(1, 2) + t
    return out


def _change_basis(b, n, parity, a):
    out = [0 * a] * (n + 1)
    if parity == "even":
        for k in range(1, n + 1):
            out[k] = sum(math.comb(n - s, k - s) * (-a) ** (k - s) * b[n - s + 1] for s in range(1, k + 1))
    else:
        for k in range(n + 1):
            out[k] = sum(math.comb(n - s, k - s) * (-a) ** (k - s) * b[n - s] for s in range(k + 1))
    return np.array(out) if not isinstance(a, Fraction) else out


def build_system(model: ModelSpec) -> IntegralSystem:
    if not model.F.is_simple:
        raise NotSimple(
            "closed-form integrals are only available when every zero of F is simple "
            "(multiple real zeros or complex pairs present)"
        )
    roots = [r.a for r in model.F.simple_roots]
    degenerate = model.parity == "odd" and model.nu == 0
    return IntegralSystem(model, build_table(roots), degenerate)


def eval_G(system: IntegralSystem, H: float, p_y: float) -> float:
    n = system.n
    extra = 1 if system.parity == "odd" else 0
    return float(sum(system.A[k] * H**k * p_y ** (2 * (n - k) + extra) for k in range(n + 1)))


def eval_S1(system: IntegralSystem, point: PhasePoint) -> float:
    return system.S1(point)


def eval_S2(system: IntegralSystem, point: PhasePoint) -> float:
    return system.S2(point)


def q_matrix(system: IntegralSystem) -> list:
    """``Q_kl = (-1)^(k+l+1) sum_i eps_i xi_i^2 sigma^i_{k-1} sigma^i_{l-1}``, k,l = 1..n, exact."""
    n = system.n
    t = system.table
    rs = system.model.F.simple_roots
    out = []
    for k in range(1, n + 1):
        row = []
        for l in range(1, n + 1):
            s = sum(r.eps * Fraction(r.xi) ** 2 * t.si(i, k - 1) * t.si(i, l - 1) for i, r in enumerate(rs))
            row.append((-1) ** (k + l + 1) * s)
        out.append(row)
    return out


def algebraic_relation_residual(system: IntegralSystem, point: PhasePoint, with_scale: bool = False):
    """``S1^2 - 2 G S2`` minus its closed-form polynomial in H and p_y."""
    n = system.n
    jets = system._jets(point)
    S1, S2, G, H = jets["S1"].val, jets["S2"].val, jets["G"].val, jets["H"].val
    py = point.p_y
    A2 = system.lead**2
    Q = q_matrix(system)
    extra = 2 if system.parity == "odd" else 0
    terms = [S1 * S1, -2 * G * S2]
    for k in range(1, n + 1):
        for l in range(1, n + 1):
            terms.append(-A2 * float(Q[k - 1][l - 1]) * H ** (2 * n - k - l) * py ** (2 * (k + l) + extra))
    if system.parity == "odd":
        nu2 = system.nu**2
        sig = system.sig
        for k in range(n + 1):
            for l in range(n + 1):
                terms.append(-A2 * nu2 * (-1) ** (k + l) * sig[k] * sig[l] * H ** (2 * n + 1 - k - l) * py ** (2 * (k + l)))
    res = float(sum(terms))
    if with_scale:
        return res, float(max(abs(t) for t in terms))
    return res


def _rel(res, scale):
    return abs(res) / scale if scale > 0 else abs(res)


def check_defining_systems(system: IntegralSystem, points=None, rng=None, n_points: int = 50,
                           fd_step: float = 1e-3) -> dict:
    """Max relative residual of every defining equation over sampled a.

    Keys name the equations: ``b_first``, ``b_chain``, ``b_last`` (the first-integral
    system in the b_k), ``beta_first``, ``beta_chain``, ``beta_last`` (the same in
    ``beta_k``), ``btilde_change_of_basis``, ``b_pole_form`` (even only),
    ``ctilde_derivative`` (``ct_k' = -bt_k x'``), and finite-difference checks
    ``fd_b``, ``fd_beta``, ``fd_ctilde`` of the hand-derived derivatives.

    Residuals involving ``b_k`` are measured against :meth:`IntegralSystem.bk_magnitude`,
    since the Taylor sums that define them lose digits near a pole.
    """
    model = system.model
    if points is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        points = sample_a(model, rng, n_points)
    n = system.n
    A = system.lead
    F = model.F
    sig = system.sig
    odd = system.parity == "odd"
    worst: dict = {}

    def note(key, res, scale):
        worst[key] = max(worst.get(key, 0.0), _rel(res, scale))

    for a in map(float, points):
        ders = model.profile.derivatives(a, 2)
        xd = ders[1]
        b, bd = system.bk(a)
        bmag, bdmag = system.bk_magnitude(a)
        via_mag = _change_basis(bmag, n, system.parity, abs(a))
        beta, betad = system.beta(a)
        bt, btd = system.btilde(a)
        ct, ctd = system.ctilde(a)
        first = 0 if odd else 1
        lhs = b[first]
        rhs = 2 * F(a) * xd
        note("b_first", lhs - rhs, max(abs(lhs), abs(rhs)))
        if odd:
            for k in range(1, n + 1):
                t = [bd[k - 1], -(k + 0.5) * b[k], F.taylor(a, k) * xd]
                note("b_chain", sum(t), max(max(map(abs, t)), bdmag[k - 1]))
            note("b_last", bd[n], max(abs(b[n]), bdmag[n], 1e-300))
        else:
            for k in range(1, n):
                t = [bd[k], -(k + 0.5) * b[k + 1], F.taylor(a, k) * xd]
                note("b_chain", sum(t), max(max(map(abs, t)), bdmag[k]))
            t = [bd[n], A * xd]
            note("b_last", sum(t), max(max(map(abs, t)), bdmag[n]))
        if odd:
            note("beta_first", betad[0], max(abs(beta[0]), 1e-300))
        else:
            t = [betad[1], -A * xd]
            note("beta_first", sum(t), max(map(abs, t)))
        for k in range(first, n):
            t = [betad[k + 1], a * betad[k], 0.5 * beta[k], -A * sig[k] * xd]
            note("beta_chain", sum(t), max(map(abs, t)))
        t = [a * betad[n], 0.5 * beta[n], -A * sig[n] * xd]
        note("beta_last", sum(t), max(map(abs, t)))
        via = system.btilde_from_bk(a)
        # norm-wise: a single coefficient may pass near zero
        bt_scale = max(np.abs(bt).max(), np.max(via_mag), 1e-300)
        for k in range(system.kmin, n + 1):
            note("btilde_change_of_basis", bt[k] - via[k], bt_scale)
            t = [ctd[k], bt[k] * xd]
            note("ctilde_derivative", sum(t), max(map(abs, t)))
        if not odd:
            pole = system.bk_pole_form(a)
            b_scale = max(np.abs(b).max(), bmag.max(), 1e-300)
            for k in range(1, n + 1):
                note("b_pole_form", b[k] - pole[k], b_scale)
        # five-point stencil; the step shrinks near a finite end so truncation stays
        # relative to the pole distance
        gap = min((abs(a - e) for e in model.domain if math.isfinite(e)), default=math.inf)
        h = fd_step * min(max(1.0, abs(a)), gap)
        ks = slice(system.kmin, n + 1)
        for key, fn, exact, mag in (("fd_b", system.bk, bd, bdmag[ks].max()),
                                    ("fd_beta", system.beta, betad, 0.0),
                                    ("fd_ctilde", system.ctilde, ctd, 0.0)):
            vals = [fn(a + m * h)[0] for m in (-2, -1, 1, 2)]
            fd = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
            scale = max(np.abs(exact[ks]).max(), np.abs(vals[2][ks]).max() / max(abs(a), 1.0), mag, 1e-300)
            note(key, np.abs(fd[ks] - exact[ks]).max(), scale)
    return worst


def odd_from_even(even: IntegralSystem, nu: float) -> IntegralSystem:
    """Odd system over the same F: ``x_odd = nu a / 2 + x_even``, ``beta_k_odd = A_n nu sigma_k + beta_k_even``."""
    if even.parity != "even":
        raise ValueError("odd_from_even expects an even system")
    m = even.model
    profile = build_profile(m.F, "odd", nu)
    model = ModelSpec("odd", m.F, profile, m.domain)
    return IntegralSystem(model, even.table, degenerate=(nu == 0))


def independence_rank(system: IntegralSystem, point: PhasePoint, rtol: float = 1e-10) -> int:
    """Rank of the Jacobian of ``(H, P_y, S1)`` with respect to ``(a, y, p_a, p_y)``."""
    jets = system._jets(point)
    J = np.vstack([jets["H"].grad, jets["P_y"].grad, jets["S1"].grad])
    sv = np.linalg.svd(J, compute_uv=False)
    return int(np.sum(sv > rtol * sv[0]))


def conservation_residuals(system: IntegralSystem, point: PhasePoint) -> dict:
    """Relative size of ``{H,S1}``, ``{H,S2}``, ``{S1,P_y} - G`` and ``{S2,P_y} - S1``.

    With the bracket normalized by ``{a, p_a} = 1`` the y-translation relations read
    ``{S1, P_y} = G`` and ``{S2, P_y} = S1``.
    """
    jets = system._jets(point)
    out = {}
    for key, (f, g) in {"H_S1": ("H", "S1"), "H_S2": ("H", "S2")}.items():
        val, scale = bracket_with_scale(system.observable(f), system.observable(g), point)
        out[key] = _rel(val, scale)
    for key, (f, target) in {"S1_Py": ("S1", "G"), "S2_Py": ("S2", "S1")}.items():
        val, scale = bracket_with_scale(system.observable(f), system.P_y, point)
        t = jets[target]
        out[key] = _rel(val - t.val, max(scale, t.vmag))
    return out
