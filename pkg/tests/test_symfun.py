from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sirev.errors import DuplicateRoot, SameIndex
from sirev.symfun import (
    RootSet,
    as_fraction,
    build_table,
    check_identities,
    doubly_excluded_sym,
    elementary_sym,
    elementary_sym_bruteforce,
    excluded_sym,
    excluded_sym_recurrence,
    poly_from_roots,
    verify_quadratic_identity,
)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
root_sets = st.lists(rationals, min_size=1, max_size=6, unique=True)


def _expand(roots):
    """Ascending coefficients of prod (a - r) by direct multiplication of linear factors."""
    c = [Fraction(1)]
    for r in roots:
        c = [-r * c[0]] + [c[k - 1] - r * c[k] for k in range(1, len(c))] + [c[-1]]
    return c


def test_three_roots_example():
    assert elementary_sym([1, 2, 3]) == (1, 6, 11, 6)
    assert build_table([1, 2, 3]).si(0, 1) == 5


def test_quadratic_example():
    t = build_table([-1, -2])
    assert t.sigma == (1, -3, 2)
    assert [t.si(0, k) for k in range(-1, 3)] == [0, 1, -2, 0]


def test_strings_stay_exact():
    assert as_fraction("1/3") == Fraction(1, 3)
    assert elementary_sym(["1/3", "2/3"]) == (1, 1, Fraction(2, 9))


def test_duplicate_roots_rejected():
    with pytest.raises(DuplicateRoot):
        RootSet((Fraction(1), Fraction(1)))
    with pytest.raises(DuplicateRoot):
        excluded_sym([1, 1, 2], 0)


def test_same_index_rejected():
    with pytest.raises(SameIndex):
        doubly_excluded_sym([1, 2, 3], 1, 1)
    with pytest.raises(SameIndex):
        build_table([1, 2]).sij(0, 0, 0)


def test_boundary_entries_are_zero():
    t = build_table([1, 2, 3, 4])
    n = t.n
    for i in range(n):
        assert t.si(i, -1) == 0 and t.si(i, n) == 0
        for j in range(n):
            if i != j:
                assert t.sij(i, j, -2) == t.sij(i, j, -1) == 0
                assert t.sij(i, j, n - 1) == t.sij(i, j, n) == 0


def test_single_root_is_vacuous():
    t = build_table([5])
    assert all(check_identities(t).values())
    assert t.si(0, 0) == 1


@given(root_sets)
def test_sigma_matches_subset_sums(roots):
    assert elementary_sym(roots) == elementary_sym_bruteforce(roots)
    n = len(roots)
    assert poly_from_roots(roots) == tuple(_expand(roots))
    # (-1)^k sigma_k is the coefficient of a^(n-k)
    assert all((-1) ** k * s == c for k, (s, c) in enumerate(zip(elementary_sym(roots), reversed(_expand(roots)))))
    assert len(elementary_sym(roots)) == n + 1


@given(root_sets, st.data())
def test_excluded_rows_match_subset_oracle(roots, data):
    n = len(roots)
    i = data.draw(st.integers(0, n - 1))
    others = [r for k, r in enumerate(roots) if k != i]
    expect = (0,) + elementary_sym_bruteforce(others) + (0,)
    assert excluded_sym(roots, i) == expect
    assert excluded_sym_recurrence(roots, i) == expect
    if n >= 2:
        j = data.draw(st.integers(0, n - 1).filter(lambda j: j != i))
        rest = [r for k, r in enumerate(roots) if k not in (i, j)]
        assert doubly_excluded_sym(roots, i, j) == (0, 0) + elementary_sym_bruteforce(rest) + (0, 0)


@given(root_sets)
def test_all_identities_hold_exactly(roots):
    assert all(check_identities(build_table(roots)).values())


@given(st.lists(rationals, min_size=2, max_size=5, unique=True))
def test_quadratic_identity_rows(roots):
    t = build_table(roots)
    rows = verify_quadratic_identity(t, 0, 1)
    assert [r[0] for r in rows] == list(range(2, 2 * t.n + 1))
    assert all(r[3] for r in rows)


def test_identity_check_detects_corruption():
    t = build_table([1, 2, 4])
    bad_row = list(t.sigma_ex[0])
    bad_row[1] += 1
    corrupt = type(t)(t.roots, t.sigma, (tuple(bad_row),) + t.sigma_ex[1:], t.sigma_ex2)
    res = check_identities(corrupt)
    assert not res["id1sfr"]
