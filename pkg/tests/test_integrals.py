import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from _factories import natural_scales, random_simple_model
from sirev.errors import DegenerateSpec, NotSimple
from sirev.integrals import (
    algebraic_relation_residual,
    build_system,
    check_defining_systems,
    conservation_residuals,
    eval_G,
    eval_S1,
    eval_S2,
    independence_rank,
    odd_from_even,
    q_matrix,
)
from sirev.model import make_model, random_phase_point, sample_a
from sirev.phase import PhasePoint, bracket_with_scale, finite_difference_grad

models = st.tuples(st.integers(0, 2**32 - 1), st.integers(1, 5), st.sampled_from(["even", "odd"]))


def _sys(seed, n, parity):
    rng = np.random.default_rng(seed)
    return build_system(random_simple_model(rng, n, parity)), rng


def test_worked_coefficients_at_zero():
    s = build_system(make_model("even", [-1, -2], [1.0, 0.0]))
    bt, _ = s.btilde(0.0)
    assert bt[1] == pytest.approx(-1.0, abs=1e-15)
    assert bt[2] == pytest.approx(-2.0, abs=1e-15)
    b, _ = s.bk(0.0)
    assert b[1] == pytest.approx(-2.0, abs=1e-15)  # 2 F(0) x'(0) = 2 * 2 * (-1/2)


@given(models, st.floats(0.05, 0.95))
def test_first_ctilde_is_half_x_squared(m, frac):
    seed, n, _ = m
    s, rng = _sys(seed, n, "even")
    lo, hi = sample_a(s.model, rng, 2)
    a = float(lo + frac * (hi - lo))
    ct, _ = s.ctilde(a)
    x = s.model.profile(a, 0)
    assert ct[1] == pytest.approx(s.lead * x * x / 2, rel=1e-10)


def test_exact_closed_form_equals_change_of_basis():
    for parity, nu in (("even", None), ("odd", 0.75)):
        m = make_model(parity, [-1, -4, -9], [0.5, -1.25, 2.0], nu=nu, leading="3/2")
        closed, via = build_system(m).exact_coefficients(0)
        assert closed == via
        assert all(isinstance(v, Fraction) for v in closed)


def test_eval_G_example():
    s = build_system(make_model("even", [-1, -2], [1.0, 1.0]))
    assert s.A == (2.0, 3.0, 1.0)
    assert eval_G(s, 1.0, 1.0) == 6.0
    assert eval_G(s, 1.7, 0.0) == pytest.approx(1.7**2)
    odd = build_system(make_model("odd", [-1, -2], [1.0, 1.0], nu=1.0))
    assert eval_G(odd, 1.7, 0.0) == 0.0


def test_y_zero_reduces_to_q():
    s = build_system(make_model("even", [-1, -2], [1.0, 0.5]))
    p = PhasePoint(0.8, 0.0, 0.4, 0.9)
    assert eval_S1(s, p) == s.Q1(p)
    assert eval_S2(s, p) == s.Q2(p)


def test_q_matrix_example():
    s = build_system(make_model("even", [-1, -2], [1.0, 0.0]))
    assert q_matrix(s) == [[-1, -2], [-2, -4]]


def test_zero_q_reduces_relation():
    s = build_system(make_model("even", [-1, -2], [1.0, 0.0]))
    p = PhasePoint(0.8, 0.3, 0.4, 0.9)
    r, scale = algebraic_relation_residual(s, p, with_scale=True)
    assert abs(r) / scale < 1e-12


@given(models)
def test_defining_systems(m):
    s, rng = _sys(*m)
    res = check_defining_systems(s, rng=rng, n_points=10)
    assert max(res.values()) < 1e-6, res


def test_defining_keys_cover_both_parities():
    even, _ = _sys(1, 3, "even")
    odd, _ = _sys(1, 3, "odd")
    assert "b_pole_form" in check_defining_systems(even, n_points=3)
    assert "b_pole_form" not in check_defining_systems(odd, n_points=3)


def test_odd_beta0_is_constant():
    s, _ = _sys(3, 2, "odd")
    beta, betad = s.beta(s.model.domain[0] + 0.5)
    assert beta[0] == pytest.approx(s.lead * s.nu)
    assert betad[0] == 0.0


@given(models)
def test_conservation_and_translation(m):
    s, rng = _sys(*m)
    for _ in range(5):
        res = conservation_residuals(s, random_phase_point(s.model, rng))
        assert max(res.values()) < 1e-9, res


def test_gradients_agree_with_finite_differences():
    # 100 random points; the five-point stencil keeps the oracle's own error far below
    # the tolerance even where S1 and S2 are small results of large cancelling sums
    for seed in range(100):
        s, rng = _sys(seed, 1 + seed % 5, ("even", "odd")[seed % 2])
        p = random_phase_point(s.model, rng)
        for name in ("H", "P_y", "G", "Q1", "Q2", "S1", "S2"):
            obs = s.observable(name)
            _, grad = obs.value_and_grad(p)
            fd = finite_difference_grad(obs, p, h=1e-3, scheme="five", scales=natural_scales(s.model, p))
            assert np.max(np.abs(np.asarray(grad) - fd)) < 1e-6 * np.max(np.abs(grad)), (seed, name)


def test_bracket_by_finite_differences_vanishes():
    s, rng = _sys(11, 3, "even")
    p = random_phase_point(s.model, rng)
    sc = natural_scales(s.model, p)
    gH = finite_difference_grad(s.H, p, h=1e-3, scheme="five", scales=sc)
    gS = finite_difference_grad(s.S1, p, h=1e-3, scheme="five", scales=sc)
    br = gH[0] * gS[2] - gH[2] * gS[0] + gH[1] * gS[3] - gH[3] * gS[1]
    _, scale = bracket_with_scale(s.H, s.S1, p)
    assert abs(br) < 1e-6 * scale


@given(models)
def test_algebraic_relation(m):
    s, rng = _sys(*m)
    for _ in range(5):
        r, scale = algebraic_relation_residual(s, random_phase_point(s.model, rng), with_scale=True)
        assert abs(r) < 1e-9 * scale


def test_relation_detects_wrong_q(monkeypatch):
    import sirev.integrals as integrals

    s, rng = _sys(5, 2, "even")
    a = float(sample_a(s.model, rng))
    p = PhasePoint(a, 0.3, 0.4 * s.model.profile(a, 1) / a, 1.0)
    r, scale = algebraic_relation_residual(s, p, with_scale=True)
    assert abs(r) < 1e-9 * scale
    good = integrals.q_matrix

    def bumped(system):
        Q = [row[:] for row in good(system)]
        Q[0][0] += 1
        return Q

    monkeypatch.setattr(integrals, "q_matrix", bumped)
    r, scale = algebraic_relation_residual(s, p, with_scale=True)
    assert abs(r) > 1e-6 * scale


@pytest.mark.parametrize("n", [1, 2, 3])
def test_odd_from_even_matches_direct(n):
    rng = np.random.default_rng(n)
    even = random_simple_model(rng, n, "even")
    direct = build_system(make_model("odd", [r.a for r in even.F.simple_roots],
                                     [r.xi for r in even.F.simple_roots],
                                     eps=[r.eps for r in even.F.simple_roots],
                                     nu=0.8, leading=even.F.leading))
    mapped = odd_from_even(build_system(even), 0.8)
    for a in sample_a(even, rng, 10):
        for f in ("btilde", "ctilde", "beta"):
            x, _ = getattr(direct, f)(float(a))
            y, _ = getattr(mapped, f)(float(a))
            assert np.max(np.abs(x - y)) <= 1e-12 * max(1.0, np.max(np.abs(x)))


def test_odd_from_even_degree_one():
    a1 = -2.0
    even = build_system(make_model("even", [a1], [1.0]))
    odd = odd_from_even(even, 0.6)
    a = 0.7
    be, _ = even.beta(a)
    bo, _ = odd.beta(a)
    # sigma_1 carries the sign of the coefficient convention: sigma_1 = a1 here
    assert even.sig[1] == a1
    assert bo[1] == pytest.approx(0.6 * a1 + be[1], rel=1e-14)
    assert be[1] == pytest.approx(even.model.profile(a, 0), rel=1e-14)


def test_nu_zero_flagged_degenerate():
    even = build_system(make_model("even", [-1], [1.0]))
    assert odd_from_even(even, 0.0).degenerate


def test_not_simple_rejected():
    with pytest.raises(NotSimple):
        build_system(make_model("even", [-1], [1.0], multiple=(2, -1, (1.0, 0.5))))


def test_odd_all_xi_zero_is_degenerate():
    with pytest.raises(DegenerateSpec):
        make_model("odd", [-1, -2], [0.0, 0.0], nu=1.0)


def test_integrals_are_independent():
    s, rng = _sys(2, 2, "even")
    assert independence_rank(s, random_phase_point(s.model, rng)) == 3


def test_h_values():
    from sirev.model import hamiltonian

    m = make_model("even", [-1], [1.0])
    assert hamiltonian(m, PhasePoint(0.6, 0.0, 0.0, 1.5)) == pytest.approx(0.6 * 2.25)
    xd = m.profile(2.0, 1)
    assert hamiltonian(m, PhasePoint(2.0, 0.0, xd, 0.0)) == pytest.approx(4.0)
    assert math.isfinite(hamiltonian(m, PhasePoint(2.0, 0.0, 1.0, 1.0)))
