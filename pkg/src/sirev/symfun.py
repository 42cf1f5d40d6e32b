"""Elementary symmetric functions of polynomial roots in exact rational arithmetic.

For roots ``a_1 .. a_n`` the monic polynomial is

    P(a) = prod (a - a_k) = sum_k (-1)^k sigma_k a^(n-k)

``sigma^i`` are the symmetric functions of the roots with ``a_i`` removed and
``sigma^ij`` those with both ``a_i`` and ``a_j`` removed. Boundary entries
(``sigma^i_{-1} = sigma^i_n = 0``, ``sigma^ij_{-2} = sigma^ij_{-1} =
sigma^ij_{n-1} = sigma^ij_n = 0``) are stored explicitly.

Root indices are 0-based in code; reports use 1-based labels (``label = i + 1``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .errors import DuplicateRoot, SameIndex

__all__ = [
    "RootSet",
    "SymTable",
    "as_fraction",
    "poly_from_roots",
    "elementary_sym",
    "elementary_sym_bruteforce",
    "excluded_sym",
    "excluded_sym_recurrence",
    "doubly_excluded_sym",
    "build_table",
    "verify_quadratic_identity",
    "check_identities",
]


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, floats and ``"p/q"`` strings to a Fraction.

    Floats are converted exactly (binary value), strings are parsed as written.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


@dataclass(frozen=True)
class RootSet:
    roots: tuple
    simple: bool = True

    def __post_init__(self):
        roots = tuple(as_fraction(r) for r in self.roots)
        if len(roots) < 1:
            raise ValueError("a RootSet needs at least one root")
        if self.simple and len(set(roots)) != len(roots):
            seen = set()
            for idx, r in enumerate(roots):
                if r in seen:
                    raise DuplicateRoot(f"root {idx + 1} ({r}) repeats")
                seen.add(r)
        object.__setattr__(self, "roots", roots)

    @property
    def n(self) -> int:
        return len(self.roots)


def poly_from_roots(roots: Iterable) -> tuple:
    """Ascending coefficients ``(A_0, .., A_n)`` of ``prod (a - r)``."""
    coeffs = [Fraction(1)]
    for r in roots:
        r = as_fraction(r)
        nxt = [Fraction(0)] * (len(coeffs) + 1)
        for k, c in enumerate(coeffs):
            nxt[k + 1] += c
            nxt[k] -= r * c
        coeffs = nxt
    return tuple(coeffs)


def elementary_sym(roots: RootSet | Sequence) -> tuple:
    """``(sigma_0, .., sigma_n)`` via ``(-1)^k sigma_k = A_{n-k}``."""
    rs = roots.roots if isinstance(roots, RootSet) else tuple(as_fraction(r) for r in roots)
    A = poly_from_roots(rs)
    n = len(rs)
    return tuple((-1) ** k * A[n - k] for k in range(n + 1))


def elementary_sym_bruteforce(roots: Sequence) -> tuple:
    # independent oracle: sum over k-subsets
    rs = [as_fraction(r) for r in roots]
    out = []
    for k in range(len(rs) + 1):
        total = Fraction(0)
        for combo in combinations(rs, k):
            prod = Fraction(1)
            for c in combo:
                prod *= c
            total += prod
        out.append(total)
    return tuple(out)


def _synthetic_division(desc_coeffs: Sequence, root: Fraction) -> tuple:
    """Divide a polynomial (descending coefficients) by ``(a - root)``; exact remainder 0 required."""
    out = []
    acc = Fraction(0)
    for c in desc_coeffs:
        acc = acc * root + c
        out.append(acc)
    remainder = out.pop()
    if remainder != 0:
        raise ArithmeticError("division by (a - root) left a remainder")
    return tuple(out)


def _check_simple(rs: Sequence, *indices):
    for i in indices:
        if not 0 <= i < len(rs):
            raise IndexError(f"root index {i} out of range for n={len(rs)}")
        if sum(1 for r in rs if r == rs[i]) > 1:
            raise DuplicateRoot(f"root {i + 1} ({rs[i]}) is not simple")


def _roots_of(roots) -> tuple:
    return roots.roots if isinstance(roots, RootSet) else tuple(as_fraction(r) for r in roots)


def excluded_sym(roots, i: int) -> tuple:
    """Row ``sigma^i_k`` for ``k = -1 .. n`` (index ``k + 1``), from polynomial division."""
    rs = _roots_of(roots)
    _check_simple(rs, i)
    n = len(rs)
    sigma = elementary_sym(rs)
    desc = [(-1) ** k * sigma[k] for k in range(n + 1)]
    quot = _synthetic_division(desc, rs[i])
    # P/(a - a_i) = sum_{k=1}^{n} (-1)^(k-1) sigma^i_{k-1} a^(n-k)
    row = [Fraction(0)] + [(-1) ** m * quot[m] for m in range(n)] + [Fraction(0)]
    return tuple(row)


def excluded_sym_recurrence(roots, i: int) -> tuple:
    """Same row as :func:`excluded_sym`, from ``sigma^i_{k-1} = sum_s (-a_i)^(k-1-s) sigma_s``."""
    rs = _roots_of(roots)
    _check_simple(rs, i)
    n = len(rs)
    sigma = elementary_sym(rs)
    ai = rs[i]
    row = [Fraction(0)]
    for k in range(1, n + 1):
        row.append(sum((-ai) ** (k - 1 - s) * sigma[s] for s in range(k)))
    row.append(Fraction(0))
    return tuple(row)


def doubly_excluded_sym(roots, i: int, j: int) -> tuple:
    """Row ``sigma^ij_k`` for ``k = -2 .. n`` (index ``k + 2``)."""
    rs = _roots_of(roots)
    if i == j:
        raise SameIndex(f"doubly excluded functions need i != j (got {i + 1} twice)")
    _check_simple(rs, i, j)
    n = len(rs)
    row_i = excluded_sym(rs, i)
    # descending coefficients of P/(a - a_i): (-1)^m sigma^i_m, m = 0..n-1
    desc = [(-1) ** m * row_i[m + 1] for m in range(n)]
    quot = _synthetic_division(desc, rs[j])
    # P/((a-a_i)(a-a_j)) = sum_{k=2}^{n} (-1)^(k-2) sigma^ij_{k-2} a^(n-k)
    row = [Fraction(0), Fraction(0)] + [(-1) ** m * quot[m] for m in range(n - 1)]
    row += [Fraction(0), Fraction(0)]
    return tuple(row)


@dataclass(frozen=True)
class SymTable:
    """All symmetric functions of a simple RootSet, with explicit boundary zeros."""

    roots: tuple
    sigma: tuple
    sigma_ex: tuple = field(repr=False)
    sigma_ex2: dict = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.roots)

    def s(self, k: int) -> Fraction:
        if not 0 <= k <= self.n:
            raise IndexError(f"sigma_{k} undefined for n={self.n}")
        return self.sigma[k]

    def si(self, i: int, k: int) -> Fraction:
        if not -1 <= k <= self.n:
            raise IndexError(f"sigma^i_{k} undefined for n={self.n}")
        return self.sigma_ex[i][k + 1]

    def sij(self, i: int, j: int, k: int) -> Fraction:
        if i == j:
            raise SameIndex(f"sigma^ij needs i != j (got {i + 1} twice)")
        if not -2 <= k <= self.n:
            raise IndexError(f"sigma^ij_{k} undefined for n={self.n}")
        return self.sigma_ex2[(i, j)][k + 2]

    def coefficients(self) -> tuple:
        """Ascending coefficients of the monic polynomial."""
        n = self.n
        return tuple((-1) ** (n - m) * self.sigma[n - m] for m in range(n + 1))


def build_table(roots) -> SymTable:
    rs = roots if isinstance(roots, RootSet) else RootSet(tuple(roots))
    n = rs.n
    ex = tuple(excluded_sym(rs, i) for i in range(n))
    ex2 = {}
    for i in range(n):
        for j in range(n):
            if i != j:
                ex2[(i, j)] = doubly_excluded_sym(rs, i, j)
    return SymTable(rs.roots, elementary_sym(rs), ex, ex2)


def verify_quadratic_identity(table: SymTable, i: int, j: int) -> list:
    """Check the quadratic relation between excluded functions for every ``s`` in ``2..2n``.

    Returns ``[(s, lhs, rhs, ok), ...]``; empty (vacuous pass) when ``n = 1``.
    """
    if i == j:
        raise SameIndex(f"quadratic identity needs i != j (got {i + 1} twice)")
    n = table.n
    out = []
    for s in range(2, n + 1):
        lhs = sum(table.si(i, k - 1) * table.si(j, s - k - 1) for k in range(1, s))
        rhs = sum(table.s(k) * table.sij(i, j, s - k - 2) for k in range(1, s))
        rhs += table.sij(i, j, s - 2)
        out.append((s, lhs, rhs, lhs == rhs))
    for s in range(n + 1, 2 * n + 1):
        lhs = sum(table.si(i, k - 1) * table.si(j, s - k - 1) for k in range(s - n, n + 1))
        rhs = sum(table.s(k) * table.sij(i, j, s - k - 2) for k in range(s - n, n + 1))
        out.append((s, lhs, rhs, lhs == rhs))
    return out


def check_identities(table: SymTable) -> dict:
    """Exact pass/fail for every root-function identity on one table.

    Keys: ``sik`` (coefficients vs brute-force expansion), ``id1sfr``, ``siik``,
    ``id2sfr``, ``id3sfr``, ``idQ``.
    """
    n = table.n
    rs = table.roots
    A = poly_from_roots(rs)
    brute = elementary_sym_bruteforce(rs)
    ok = {}
    ok["sik"] = all((-1) ** k * table.s(k) == A[n - k] for k in range(n + 1)) and tuple(
        table.sigma
    ) == brute
    ok["id1sfr"] = all(
        table.s(k) == table.si(i, k) + rs[i] * table.si(i, k - 1)
        for i in range(n)
        for k in range(n + 1)
    )
    ok["siik"] = all(excluded_sym_recurrence(rs, i) == table.sigma_ex[i] for i in range(n))
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    ok["id2sfr"] = all(
        table.si(i, k - 1) == table.sij(i, j, k - 1) + rs[j] * table.sij(i, j, k - 2)
        for i, j in pairs
        for k in range(n + 1)
    )
    ok["id3sfr"] = all(
        table.sij(i, j, k - 2) == -(table.si(i, k - 1) - table.si(j, k - 1)) / (rs[i] - rs[j])
        for i, j in pairs
        for k in range(n + 1)
    )
    ok["idQ"] = all(
        row[3] for i, j in pairs for row in verify_quadratic_identity(table, i, j)
    )
    return ok
