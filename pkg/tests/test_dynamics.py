import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _factories import koenigs, random_simple_model
from sirev.dynamics import integrate_geodesic, integrate_many, write_trajectory_csv
from sirev.integrals import build_system
from sirev.model import hamiltonian, make_model, random_phase_point
from sirev.phase import PhasePoint, constant, coordinate, poisson_bracket

START = PhasePoint(0.5, 0.0, 0.3, 0.7)


def test_zero_momenta_is_a_fixed_point():
    traj, rep = integrate_geodesic(koenigs(), PhasePoint(0.5, 0.2, 0.0, 0.0), 5.0)
    assert np.all(traj.states == traj.states[0])
    assert max(rep.max_rel_drift.values()) == 0.0
    assert not rep.domain_exit


def test_koenigs_against_tight_reintegration():
    m = koenigs()
    traj, rep = integrate_geodesic(m, START, 10.0, 1e-10)
    oracle, _ = integrate_geodesic(m, START, 10.0, 1e-13)
    assert max(rep.max_rel_drift.values()) < 1e-8
    assert rep.t_end == 10.0
    end, ref = traj.end.as_array(), oracle.end.as_array()
    assert np.max(np.abs(end - ref) / np.maximum(1.0, np.abs(ref))) < 1e-7


def test_reversed_momenta_retrace():
    m = koenigs()
    T = 3.0
    fwd, _ = integrate_geodesic(m, START, T, 1e-12)
    e = fwd.end
    back, _ = integrate_geodesic(m, PhasePoint(e.a, e.y, -e.p_a, -e.p_y), T, 1e-12)
    b = back.end
    got = np.array([b.a, b.y, -b.p_a, -b.p_y])
    assert np.max(np.abs(got - START.as_array())) < 1e-6


def test_drift_shrinks_with_tolerance():
    drifts = [max(integrate_geodesic(koenigs(), START, 10.0, tol)[1].max_rel_drift.values())
              for tol in (1e-8, 1e-10, 1e-12)]
    assert drifts[0] > drifts[1] > drifts[2]


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.sampled_from(["even", "odd"]))
def test_drift_bounded_by_tolerance(seed, n, parity):
    rng = np.random.default_rng(seed)
    m = random_simple_model(rng, n, parity)
    tol = 1e-10
    _, rep = integrate_geodesic(m, random_phase_point(m, rng), 2.0, tol)
    if not rep.domain_exit:
        assert max(rep.max_rel_drift.values()) < 100 * tol, rep.max_rel_drift


def test_hamiltonian_is_conserved_without_closed_forms():
    m = make_model("even", [-1], [0.5], multiple=(2, -1, (1.0, 0.4)))
    traj, rep = integrate_geodesic(m, PhasePoint(0.7, 0.0, 0.2, 0.5), 2.0)
    assert set(rep.max_rel_drift) == {"H", "P_y"}
    assert rep.max_rel_drift["H"] < 1e-8


def test_vanishing_x_prime_stops_the_run():
    # x' = 1/2 - 4 (a + 1)^(-3/2) vanishes at a = 3
    m = make_model("odd", [-1], [8.0], nu=1.0)
    traj, rep = integrate_geodesic(m, PhasePoint(5.0, 0.0, -1.0, 0.1), 50.0)
    assert rep.domain_exit and "x'" in rep.exit_reason
    assert rep.t_end < 50.0
    assert abs(traj.end.a - 3.0) < 1e-3


def test_bad_arguments():
    with pytest.raises(ValueError):
        integrate_geodesic(koenigs(), START, 0.0)
    with pytest.raises(ValueError):
        integrate_geodesic(koenigs(), START, 1.0, tol=-1)


def test_many_keeps_order():
    starts = [PhasePoint(0.3 + 0.1 * k, 0.0, 0.2, 0.5) for k in range(4)]
    runs = integrate_many(koenigs(), starts, 1.0)
    for s, (traj, _) in zip(starts, runs):
        assert traj.states[0, 0] == pytest.approx(s.a)


def test_csv_round_trip(tmp_path):
    traj, _ = integrate_geodesic(koenigs(), START, 1.0, samples=11)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "a", "y", "p_a", "p_y", "H", "P_y", "S1", "S2"]
    assert len(rows) - 1 == len(traj.t)
    assert float(rows[-1][1]) == traj.states[-1, 0]


def test_hamiltonian_examples():
    m = make_model("even", [-1], [1.0])
    assert hamiltonian(m, PhasePoint(0.6, 0.0, 0.0, 1.5)) == pytest.approx(0.6 * 2.25)
    a = 2.0
    xd = m.profile(a, 1)
    # Pi = a p_a / x' = 1 when p_a = x' / a
    assert hamiltonian(m, PhasePoint(a, 0.0, xd / a, 0.0)) == pytest.approx(1.0)


def test_bracket_basics():
    s = build_system(koenigs())
    p = PhasePoint(0.4, 0.3, 0.2, 0.9)
    assert poisson_bracket(coordinate("a"), coordinate("p_a"), p) == 1.0
    assert poisson_bracket(s.H, s.P_y, p) == 0.0
    assert poisson_bracket(s.H, constant(3.0), p) == 0.0


@given(st.integers(0, 2**32 - 1))
def test_bracket_antisymmetry_and_leibniz(seed):
    rng = np.random.default_rng(seed)
    s = build_system(random_simple_model(rng, 3, "even"))
    p = random_phase_point(s.model, rng)
    f, g, h = s.H, s.S1, s.S2
    assert poisson_bracket(f, g, p) + poisson_bracket(g, f, p) == 0.0
    lhs = poisson_bracket(s.Q1, g * h, p)
    rhs = poisson_bracket(s.Q1, g, p) * h(p) + g(p) * poisson_bracket(s.Q1, h, p)
    assert math.isclose(lhs, rhs, rel_tol=1e-10, abs_tol=1e-10 * (abs(lhs) + abs(rhs) + 1e-300))
