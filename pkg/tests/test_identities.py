import json
from types import SimpleNamespace

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from contactangle import catalog, jsonfmt
from contactangle.calculus import jet
from contactangle.errors import NotMinimal
from contactangle.identities import (
    REGISTRY,
    check_minimal_forms,
    check_structure,
    corollary_sides,
    corollary_tuple_residual,
    corollary_tuples,
    run_report,
)
from contactangle.identities import _gauss_line1
from contactangle.surface import point_sample


@pytest.fixture(scope="module")
def legendrian_report(legendrian):
    return run_report(legendrian, 64)


@pytest.fixture(scope="module")
def sphere_report(sphere):
    return run_report(sphere, 32)


@pytest.fixture(scope="module")
def torus_report(b_zero_torus):
    return run_report(b_zero_torus[0], 32)


def by_group(report, group):
    return [r for r in report.identities if r.group == group]


def assert_well_formed(report):
    n = report.grid**2
    for r in report.identities:
        assert r.evaluated + r.skipped == n, r.name
        assert r.nonfinite == 0, r.name
        assert r.verdict in ("PASS", "FAIL", "SKIP")
        if r.evaluated == 0:
            assert r.verdict == "SKIP" and r.sup is None
        else:
            assert r.verdict == ("PASS" if r.sup < r.tol else "FAIL"), r.name
    # the serializer refuses NaN and infinity, so this doubles as a finiteness check
    json.loads(jsonfmt.dumps(report.to_dict()))


def test_registry_names_unique():
    names = [c.name for c in REGISTRY]
    assert len(names) == len(set(names))
    assert all(c.hypotheses[:2] == ("beta_nondegenerate", "alpha_nondegenerate") for c in REGISTRY)


def test_legendrian_report(legendrian_report):
    rep = legendrian_report
    assert_well_formed(rep)
    assert rep.exit_code() == 0
    for r in by_group(rep, "structure") + by_group(rep, "frame"):
        if r.role == "asserted":
            assert r.verdict == "PASS" and r.sup < 1e-7, r.name
    for name in ("minimal_theta_1_3", "minimal_theta_2_3", "minimal_theta_1_5", "minimal_theta_2_5"):
        assert rep.result(name).verdict == "PASS"
    assert rep.result("minimal_theta_3_4").verdict == "SKIP"  # sec beta is unbounded at the Legendrian angle
    assert all(rep.result(c.name).verdict == "SKIP" for c in REGISTRY if "b_zero" in c.hypotheses)
    assert rep.result("curvature_routes").verdict == "PASS"
    assert rep.result("gauss_curvature_gauge").verdict == "PASS"
    assert rep.result("hopf_constant_beta").verdict == "PASS"
    assert rep.degeneracy["legendrian"] == 64 * 64


def test_great_sphere_report(sphere_report):
    rep = sphere_report
    assert_well_formed(rep)
    assert rep.exit_code() == 0
    structure = by_group(rep, "structure")
    assert all(r.verdict in ("PASS", "SKIP") for r in structure)
    assert any(r.verdict == "SKIP" for r in structure)
    assert rep.result("reeb_derivative").sup < 1e-7
    assert rep.result("curvature_routes").verdict == "PASS"
    assert rep.result("structure_theta_3_2_general").verdict == "PASS"


def test_clifford_report(clifford):
    rep = run_report(clifford, 16)
    assert_well_formed(rep)
    assert rep.all_skipped and rep.exit_code() == 3
    assert rep.degeneracy["status"] == "BetaDegenerate at every point"
    assert rep.degeneracy["beta_degenerate"] == 256


def test_trig_not_minimal(trig_corpus):
    with pytest.raises(NotMinimal):
        check_minimal_forms(trig_corpus[0], 16)
    rep = run_report(trig_corpus[0], 16)
    assert_well_formed(rep)
    for r in by_group(rep, "minimal_forms"):
        assert r.verdict == "SKIP" and r.note.startswith("NotMinimal")
    # structure relations need no minimality and hold on arbitrary immersions
    assert all(r.verdict in ("PASS", "SKIP") for r in check_structure(trig_corpus[0], 16) if r.role == "asserted")


def test_b_zero_torus_report(torus_report):
    rep = torus_report
    assert_well_formed(rep)
    assert rep.exit_code() == 0
    for r in rep.identities:
        if r.role == "asserted" and "legendrian" not in r.hypotheses:
            assert r.evaluated == 32 * 32, r.name
            assert r.sup < 1e-5, r.name
    for name in ("laplacian_theorem", "codazzi_beta2", "codazzi_beta1", "v_derivative_printed",
                 "gauss_curvature_square_literal"):
        assert rep.result(name).role == "diagnostic"


def test_consistency_tables(torus_report):
    tables = {t["name"]: t for t in torus_report.consistency_tables}
    lap = tables["laplacian_three_way"]
    assert lap["role"] == "diagnostic" and lap["evaluated"] == 32 * 32
    rep = lap["representative"]
    for key in ("combined", "codazzi_ricci", "theorem", "measured"):
        assert np.isfinite(rep[key])
    # constant angles force a vanishing Laplacian
    assert abs(rep["measured"]) < 1e-10
    assert lap["combined_vs_corollary_chain"] < 1e-10
    cod = tables["beta1_relation_constant_beta"]
    assert cod["beta_constant"] and cod["alpha_half_pi"] and cod["consistent"]
    assert tables["corollary_tuples"]["sup_residual"] < 1e-12


def test_legendrian_beta1_relation(legendrian):
    J = jet(legendrian, legendrian.grid(16))
    ps = point_sample(J)
    assert np.max(np.abs(ps.beta1 + 2 * np.cos(ps.alpha))) < 1e-8


def test_gauss_line_pointwise():
    g = SimpleNamespace(beta1=0.0, beta2=0.0, ca=np.cos(np.pi / 2), sa=1.0, csc=1.0, cot=0.0, a=None)
    assert abs(_gauss_line1(g, a=np.sqrt(0.5))) < 1e-15


def test_corollary_example_tuple():
    lhs, rhs = corollary_sides(np.pi / 3, np.pi / 2, 0.2, 0.1)
    expected = -0.16 - np.sqrt(3) * 0.1
    assert abs(lhs - expected) < 1e-12 and abs(rhs - expected) < 1e-12


def test_corollary_tuples():
    assert corollary_tuple_residual(1000, seed=0) < 1e-12
    (beta, alpha, *_), lhs, rhs = corollary_tuples(1000, seed=5)
    assert np.all(np.abs(np.cos(alpha)) > 0) and np.max(np.abs(lhs - rhs)) < 1e-12


def test_corollary_symbolic():
    b, al, b2, lap = sp.symbols("beta alpha beta2 lap", real=True)
    t, ca = sp.tan(b), sp.cos(al)
    b1 = -2 * ca
    K = -(1 + t**2) * (b1**2 + b2**2) - t * lap - 2 * ca * (1 + 2 * t**2) * b1 - 4 * t**2 * ca**2
    assert sp.simplify(sp.expand(K - (-(1 + t**2) * b2**2 - t * lap))) == 0
    f = sp.lambdify((b, al, b2, lap), K)
    rng = np.random.default_rng(1)
    x = rng.uniform([0.1, 0.1, -2, -2], [1.4, 3.0, 2, 2], size=(200, 4)).T
    lhs, _ = corollary_sides(*x)
    assert np.max(np.abs(lhs - f(*x))) < 1e-11


def test_report_deterministic(b_zero_torus):
    a = jsonfmt.dumps(run_report(b_zero_torus[0], 16).to_dict())
    b = jsonfmt.dumps(run_report(b_zero_torus[0], 16).to_dict())
    assert a == b


def test_report_rejects_bad_tol(legendrian):
    with pytest.raises(ValueError):
        run_report(legendrian, 8, tol=0.0)


# below this the sup is roundoff, which grows with the conditioning of the sampled points
FLOOR = 1e-13


@pytest.mark.parametrize("which", ["legendrian", "sphere", "torus"])
def test_refinement_stable(which, legendrian, sphere, b_zero_torus):
    surface = {"legendrian": legendrian, "sphere": sphere, "torus": b_zero_torus[0]}[which]
    reports = [run_report(surface, n) for n in (32, 64, 128)]
    coarse = reports[0]
    for r in coarse.identities:
        if r.verdict != "PASS":
            continue
        for fine in reports[1:]:
            s = fine.result(r.name)
            assert s.verdict == "PASS", (r.name, fine.grid)
            assert s.sup <= 2 * max(r.sup, FLOOR), (r.name, fine.grid, r.sup, s.sup)


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 2**31))
def test_report_shape_on_random_immersions(seed):
    surface = catalog.random_trig_immersion(np.random.default_rng(seed))
    rep = run_report(surface, 8)
    assert_well_formed(rep)
    assert rep.exit_code() in (0, 2)
