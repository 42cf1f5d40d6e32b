import math

import numpy as np
import pytest
from scipy.integrate import quad

from sirev.catalog import CATALOG, build_catalog, catalog_ids, conformal_factor
from sirev.errors import ConstraintViolated
from sirev.geometry import embedding_pullback_residual
from sirev.model import hamiltonian, sample_a
from sirev.phase import PhasePoint

GLOBAL = [i for i in catalog_ids() if i != "NOGO"]


@pytest.fixture(scope="module")
def built():
    return {i: build_catalog(i, grid_size=2000) for i in catalog_ids()}


def _samples(chart, k=25):
    lo, hi = chart.base.interval
    if math.isinf(hi):
        # beyond u ~ 1e2 the value 1 - a is itself only good to eps/(1 - a)
        return np.logspace(-3, 2, k)
    return np.linspace(lo, hi, k + 2)[1:-1]


def test_ids_and_claims():
    assert len(GLOBAL) == 12
    assert {CATALOG[i].manifold for i in GLOBAL} == {"H2", "R2"}
    assert CATALOG["NOGO"].manifold == "NONE"
    with pytest.raises(KeyError):
        build_catalog("NOPE")


@pytest.mark.parametrize("ex_id", GLOBAL)
def test_default_examples_verify(built, ex_id):
    _, _, rep = built[ex_id]
    assert rep["passed"], rep
    assert rep["verdict"] == CATALOG[ex_id].manifold
    assert rep["R_spread"] > 1e-6


@pytest.mark.parametrize("ex_id", GLOBAL)
def test_charts_agree(built, ex_id):
    model, chart, _ = built[ex_id]
    for c in _samples(chart):
        direct = np.array(chart.base.metric(float(c)))
        pulled = np.array(chart.base.pulled_back(model, float(c)))
        assert np.max(np.abs(direct - pulled) / np.abs(pulled)) < 1e-10


@pytest.mark.parametrize("ex_id", GLOBAL)
def test_conformal_coordinate_integrates_its_derivative(built, ex_id):
    _, chart, _ = built[ex_id]
    cs = _samples(chart, 6)
    for c0, c1 in zip(cs[:-1], cs[1:]):
        integral, _ = quad(chart.dt_dc, float(c0), float(c1), epsabs=1e-13, epsrel=1e-12, limit=200)
        diff = chart.t_of(float(c1)) - chart.t_of(float(c0))
        assert diff == pytest.approx(integral, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("ex_id", GLOBAL)
def test_round_trip(built, ex_id):
    _, chart, _ = built[ex_id]
    for c in _samples(chart, 10):
        back = chart.c_of_t(chart.t_of(float(c)))
        assert back == pytest.approx(float(c), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("ex_id", GLOBAL)
def test_embedding_pullback_on_catalog(built, ex_id):
    model, _, _ = built[ex_id]
    rng = np.random.default_rng(7)
    for _ in range(5):
        assert embedding_pullback_residual(model, float(sample_a(model, rng)), float(rng.normal())) < 1e-6


def test_koenigs_chart():
    model, chart, _ = build_catalog("KOENIGS3")
    for u in (0.1, 1.0, 7.0):
        assert chart.t_of(u) == pytest.approx(u, rel=1e-14)
        assert conformal_factor(chart, u) == pytest.approx(1 + u * u, rel=1e-10)
    u, y, pu, py = 0.8, 0.3, 0.4, -1.1
    a = chart.base.to_a(u)
    p = PhasePoint(a, y, pu / chart.base.da_dc(u), py)
    assert hamiltonian(model, p) == pytest.approx(u * u / (1 + u * u) * (pu * pu + py * py), rel=1e-12)


def test_cubic_pp_profile_factor():
    _, chart, rep = build_catalog("CUBIC_PP", {"a1": "-2"})
    for u in (0.05, 0.5, 3.0):
        mu = 1 - (u * u + 2) ** -1.5
        assert chart.base.metric(u)[0] == pytest.approx(mu * mu / (u * u), rel=1e-12)
    assert rep["min_abs_conformal_factor"] > 0
    omega0 = math.sqrt(conformal_factor(chart, 1e-6))
    assert omega0 == pytest.approx(1 - 2**-1.5, rel=1e-6)


def test_odd_pp_limit_includes_extra_roots():
    params = {"a1": "-2", "roots": ["-4"], "xi": [1]}
    _, chart, _ = build_catalog("ODD_H2_PP", params)
    expect = 1 - 2**-1.5 - 4**-1.5
    assert math.sqrt(conformal_factor(chart, 1e-6)) == pytest.approx(expect, rel=1e-6)


@pytest.mark.parametrize("ex_id, params, needle", [
    ("CUBIC_MP", {"a1": "2"}, "a1 in (0, 1)"),
    ("CUBIC_PP", {"a1": "-1/2"}, "a1 in (-inf, -1)"),
    ("ODD_H2_PP", {"a1": "-1.1", "roots": ["-1.2"], "xi": [1]}, "< 1"),
    ("ODD_H2_MP", {"a1": "2", "roots": ["3"], "xi": [1]}, "0 < a1 < 1"),
    ("H2_EVEN", {"c": -1}, "c > 0"),
    ("R2_EVEN", {"a1": "2", "a2": "1"}, "0 < a1 < a2"),
])
def test_constraints_reject(ex_id, params, needle):
    with pytest.raises(ConstraintViolated) as err:
        build_catalog(ex_id, params)
    assert needle in str(err.value)


def test_nondefault_parameters():
    _, _, rep = build_catalog("H2_EVEN", {"c": 2, "roots": ["-3", "5", "-1/2"], "xi": [0.3, 1, 2]},
                              grid_size=2000)
    assert rep["passed"]
    assert rep["params"]["c"] == 2


def test_coefficients_bounded_toward_boundary(built):
    for ex_id in GLOBAL:
        model, _, rep = built[ex_id]
        if model.domain[0] == 0:
            assert rep["coefficients_bounded_at_t0"], ex_id


def test_nogo_blowup(built):
    _, chart, rep = built["NOGO"]
    assert chart is None
    blow = rep["curvature_blowup"]
    assert blow["doubles"] and len(blow["ratios"]) >= 4
    assert all(r >= 2 for r in blow["ratios"])
