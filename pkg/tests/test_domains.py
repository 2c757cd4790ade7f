import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermlab import domains, forms, geometry
from hermlab.domains import DomainModel, QuadratureError, build_rule, pairwise_sum
from hermlab.expr import load_metric
from hermlab.forms import Dashboard, FormField

HOPF_LEBESGUE = 15 * np.pi**2 / 2
HOPF_VOL = 8 * np.pi**2 * np.log(2)


def field(m, attr, bidegree):
    return FormField(lambda p: getattr(Dashboard(geometry.metric_at(m, p)), attr).val, bidegree, attr)


def test_torus_rule():
    rule = build_rule(DomainModel.torus(), 8)
    assert len(rule) == 4096
    assert abs(rule.weights.sum() - 1) < 1e-14
    assert (rule.weights > 0).all()


@pytest.mark.parametrize("R", [2, 3, 8])
def test_hopf_rule(R):
    rule = build_rule(DomainModel.hopf(), R)
    assert len(rule) == R * R * (2 * R) ** 2
    assert abs(rule.weights.sum() - HOPF_LEBESGUE) < 1e-10 * HOPF_LEBESGUE
    assert (rule.weights > 0).all()
    r = np.sqrt((np.abs(rule.nodes[:, :2]) ** 2).sum(axis=1))
    assert r.min() >= 1 and r.max() <= 2


def test_dense_grid_oracle_for_hopf_shell():
    # midpoint rule in (r, theta, phi1, phi2) with the explicit Jacobian r^3 sin cos
    n = 40
    r = 1 + (np.arange(n) + 0.5) / n
    th = (np.arange(n) + 0.5) / n * np.pi / 2
    jac = np.einsum("a,b->ab", r**3, np.sin(th) * np.cos(th))
    dense = jac.sum() * (1 / n) * (np.pi / 2 / n) * (2 * np.pi) ** 2
    assert abs(dense - HOPF_LEBESGUE) / HOPF_LEBESGUE < 1e-3
    vol_density = np.einsum("a,b->ab", 4 / r**4 * r**3, np.sin(th) * np.cos(th)).sum()
    vol_dense = vol_density * (1 / n) * (np.pi / 2 / n) * (2 * np.pi) ** 2
    assert abs(vol_dense - HOPF_VOL) / HOPF_VOL < 1e-3


def test_rule_errors():
    with pytest.raises(ValueError):
        build_rule(DomainModel.torus(), 1)
    with pytest.raises(QuadratureError):
        build_rule(DomainModel.hopf(), 40, max_nodes=1000)


def test_volumes(flat, hopf):
    assert abs(domains.volume(flat, build_rule(flat.domain, 8)) - 4) < 1e-10
    v = domains.volume(hopf, build_rule(hopf.domain, 8))
    assert abs(v - HOPF_VOL) / HOPF_VOL < 1e-6


def test_chern_scalar_integrand_vanishes_on_hopf(hopf):
    def f(p):
        fr = geometry.compute_frame(hopf, p)
        return fr.s_c**2 - np.einsum("nik,njl,nij,nkl->n", fr.hinv, fr.hinv, fr.Theta1, np.conj(fr.Theta1))

    val = domains.integrate_field(f, hopf, build_rule(hopf.domain, 4))
    assert abs(val) < 1e-10 * HOPF_VOL


def test_global_inner_examples(flat, hopf):
    rule = build_rule(flat.domain, 4)
    w = field(flat, "omega", (1, 1))
    assert abs(domains.global_inner(w, w, flat, rule) - 8) < 1e-12
    dbs = field(flat, "dbs_omega", (1, 0))
    assert domains.global_inner(dbs, dbs, flat, rule) == 0
    hrule = build_rule(hopf.domain, 6)
    hd = field(hopf, "dbs_omega", (1, 0))
    val = domains.global_inner(hd, hd, hopf, hrule)
    vol = domains.volume(hopf, hrule)
    assert abs(val - vol) < 1e-12 * vol


def test_global_inner_rejects_mismatch(flat):
    rule = build_rule(flat.domain, 2)
    with pytest.raises(ValueError, match="bidegree"):
        domains.global_inner(field(flat, "omega", (1, 1)), field(flat, "dbs_omega", (1, 0)), flat, rule)


def test_global_inner_conjugate_symmetric(generic):
    rule = build_rule(generic.domain, 4)
    a = field(generic, "dbs_omega", (1, 0))
    b = FormField(lambda p: forms.one_form(hol=np.stack([p[:, 0] ** 2, p[:, 3]], axis=1)), (1, 0))
    ab = domains.global_inner(a, b, generic, rule)
    ba = domains.global_inner(b, a, generic, rule)
    assert abs(ab - np.conj(ba)) < 1e-12 * max(1, abs(ab))
    assert domains.global_inner(a, a, generic, rule).real > 0


def test_torus_translation_invariance(generic):
    base = domains.volume(generic, build_rule(generic.domain, 8))
    shifted = domains.volume(generic, build_rule(generic.domain, 8, offset=[0.37, 0.11, 0.5, 0.05]))
    assert abs(base - shifted) < 1e-10 * base


def test_deck_checks(hopf, conformal):
    assert domains.deck_invariance_check(hopf).passed
    assert domains.deck_invariance_check(conformal).passed
    euclid = load_metric('[metric]\ndomain = "hopf"\nh11 = "1"\nh12 = "0"\nh21 = "0"\nh22 = "1"\n')
    rep = domains.deck_invariance_check(euclid)
    assert not rep.passed and abs(rep.max_residual - 0.75) < 1e-12


def test_deck_detects_aperiodic_torus():
    m = load_metric('[metric]\ndomain = "torus"\nh11 = "2 + 0.1*cos(z1+zb1)"\nh12 = "0"\nh21 = "0"\nh22 = "1"\n')
    assert not domains.deck_invariance_check(m).passed


def test_integrate_reports_non_finite(flat):
    rule = build_rule(flat.domain, 2)
    vals = np.ones(len(rule))
    vals[5] = np.nan
    with pytest.raises(FloatingPointError, match="node 5"):
        domains.integrate(vals, rule, np.ones(len(rule)))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=300))
def test_pairwise_sum_matches_fsum(xs):
    import math

    assert abs(pairwise_sum(np.array(xs)) - math.fsum(xs)) <= 1e-9 * max(1.0, sum(abs(x) for x in xs))


def test_results_independent_of_thread_count(generic):
    rule = build_rule(generic.domain, 6)
    vals = [domains.volume(generic, rule, threads=t) for t in (1, 2, 5)]
    assert vals[0] == vals[1] == vals[2]


def test_sample_points_in_chart():
    for d in (DomainModel.torus(), DomainModel.hopf()):
        p = d.sample_points(200, seed=4)
        assert all(d.contains(q) for q in p)
        np.testing.assert_allclose(p[:, 2:], np.conj(p[:, :2]))
    assert not DomainModel.hopf().contains(np.zeros(4))
