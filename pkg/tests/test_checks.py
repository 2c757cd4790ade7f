import numpy as np
import pytest

from hermlab import checks, domains
from hermlab.checks import REGISTRY, CheckResult

HOPF_VOL = 8 * np.pi**2 * np.log(2)


@pytest.fixture(scope="module")
def hopf_integrals(hopf):
    return checks.compute_integrals(hopf, domains.build_rule(hopf.domain, 8))


@pytest.fixture(scope="module")
def conformal_integrals(conformal):
    return {R: checks.compute_integrals(conformal, domains.build_rule(conformal.domain, R)) for R in (8, 16)}


def test_registry_is_complete():
    ids = [c.id for c in REGISTRY]
    assert ids == [f"P{k}" for k in range(1, 14)] + [f"I{k}" for k in range(1, 11)]
    assert all(c.statement.strip() for c in REGISTRY)
    assert {c.kind for c in REGISTRY} == {"pointwise", "operator", "integral"}


def test_residual_arithmetic():
    diff, norm, rel = checks.integral_residual([1.0, 2.0], [3.0 + 1e-7])
    assert abs(diff - 1e-7) < 1e-15 and norm == pytest.approx(6.0) and rel == pytest.approx(1e-7 / 6)
    # reference terms give a scale without entering the balance
    assert checks.integral_residual([1e-20], [0.0], ref=(1.0,))[2] == pytest.approx(1e-20)
    diff, norm, rel, k = checks.pointwise_residual([np.array([1.0, 2.0])], [np.array([1.0, 2.5])])
    assert k == 1 and diff == 0.5 and rel == pytest.approx(0.5 / 4.5)


def _all_pass(results, bound):
    bad = [(r.id, r.residual_rel) for r in results if not r.residual_rel < bound]
    assert not bad, bad


def test_pointwise_flat(flat):
    _all_pass(checks.run_pointwise_suite(flat), 1e-13)


@pytest.mark.parametrize("name, bound", [("hopf", 1e-9), ("conformal", 1e-8), ("generic", 1e-9)])
def test_pointwise_suite(request, name, bound):
    res = checks.run_pointwise_suite(request.getfixturevalue(name), n=60, seed=5)
    assert len(res) == 13
    _all_pass(res, bound)
    assert all(r.worst_point is not None for r in res)


def test_pointwise_failure_surfaces_as_result(hopf):
    pts = np.concatenate([hopf.domain.sample_points(3), domains.honest([0.0], [0.0])])
    res = checks.run_pointwise_suite(hopf, points=pts)
    assert len(res) == 13
    assert all(not r.passed for r in res)
    assert all("error" in r.details and r.worst_point == [0, 0] for r in res)


def test_integral_flat(flat):
    res = checks.run_integral_suite(flat, R=8)
    assert [r.resolution for r in res] == [8] * 10
    _all_pass(res, 1e-12)


def test_integral_hopf(hopf, hopf_integrals):
    _all_pass(checks.run_integral_suite(hopf, R=8, integrals=hopf_integrals), 1e-6)
    # hand values: |dbar* w|^2 = |dbar* w|^4 = 1 pointwise
    assert abs(hopf_integrals["ds_norm2"] - HOPF_VOL) < 1e-6 * HOPF_VOL


def test_integral_conformal_converges(conformal, conformal_integrals):
    res = {R: checks.run_integral_suite(conformal, R=R, integrals=I) for R, I in conformal_integrals.items()}
    for a, b in zip(res[8], res[16]):
        assert a.residual_rel < 1e-5 and b.residual_rel < 1e-5
        assert b.residual_rel <= max(a.residual_rel, 1e-14)


def test_chern_number(flat, hopf, conformal, hopf_integrals, conformal_integrals):
    assert checks.chern_number(flat, R=4) == (0.0, 0.0)
    w, s = checks.chern_number(hopf, integrals=hopf_integrals)
    assert abs(w) < 1e-8 * HOPF_VOL and abs(s) < 1e-8 * HOPF_VOL
    w, s = checks.chern_number(conformal, integrals=conformal_integrals[16])
    vol = conformal_integrals[16]["vol"].real
    assert abs(w) < 1e-6 * vol and abs(s) < 1e-6 * vol


def test_norms_2tensor(flat, hopf, hopf_integrals):
    assert checks.norms_2tensor("ric20", flat, R=4) == 0
    assert checks.norms_2tensor("M", flat, R=4) == 0
    assert abs(checks.norms_2tensor("M", hopf, integrals=hopf_integrals)) < 1e-12
    r20 = checks.norms_2tensor("ric20", hopf, integrals=hopf_integrals)
    assert abs(r20 - HOPF_VOL / 4) < 1e-6 * HOPF_VOL


def test_classify_flat(flat):
    d = checks.classify(flat, R=4, n=20)
    assert d.kahler and d.gauduchon and d.ric20_zero
    assert d.ric11_min == d.ric11_max == 0
    assert d.dbar_star_norm2 == 0


def test_classify_hopf(hopf, hopf_integrals):
    d = checks.classify(hopf, integrals=hopf_integrals, n=40)
    assert not d.kahler and d.gauduchon and not d.ric20_zero
    assert abs(d.dbar_star_norm2 - HOPF_VOL) < 1e-6 * HOPF_VOL
    hyp = d.theorem_hypotheses
    assert hyp["M_zero"]["applies"]
    assert not hyp["ric_nonpositive"]["applies"]
    assert hyp["ric_nonpositive"]["max_eigenvalue"] > 0
    # every flag carries its evidence
    for flags in hyp.values():
        assert "applies" in flags and len(flags) >= 2


def test_classify_conformal(conformal, conformal_integrals):
    d = checks.classify(conformal, integrals=conformal_integrals[8], n=40)
    assert not d.kahler and d.max_d_omega > 1e-3
    assert isinstance(d.gauduchon, bool) and d.max_i_ddbar_omega >= 0


def test_check_result_invariants(hopf, hopf_integrals):
    res = checks.run_pointwise_suite(hopf, n=20) + checks.run_integral_suite(hopf, R=8, integrals=hopf_integrals)
    for r in res:
        assert isinstance(r, CheckResult)
        assert r.residual_abs >= 0
        assert r.passed == (r.residual_rel <= r.tolerance)
        assert set(r.row()) == {"id", "paper_ref", "kind", "residual_abs", "residual_rel", "tolerance", "pass", "resolution"}
        assert (r.resolution is not None) == (r.kind == "integral")


def test_bit_reproducible(generic):
    a = [r.row() for r in checks.run_pointwise_suite(generic, n=30, seed=9)]
    b = [r.row() for r in checks.run_pointwise_suite(generic, n=30, seed=9)]
    assert a == b


def test_i5_and_proof_chain_agree(hopf, hopf_integrals):
    res = {r.id: r for r in checks.run_integral_suite(hopf, R=8, integrals=hopf_integrals)}
    assert res["I5"].passed and res["I6"].passed and res["I7"].passed
