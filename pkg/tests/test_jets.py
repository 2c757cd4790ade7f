import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermlab import jets
from hermlab.expr import eval_jet, parse
from hermlab.jets import PACK, PAIRS, Jet, JetDomainError, fd_oracle, seed


def test_seed_examples():
    a = seed(0, 1 + 0j)
    assert a.val == 1 and list(a.d) == [1, 0, 0, 0] and not a.dd.any()
    b = seed(2, 0)
    assert b.val == 0 and list(b.d) == [0, 0, 1, 0]
    c = seed(1, 2j)
    assert c.val == 2j and list(c.d) == [0, 1, 0, 0]
    with pytest.raises((IndexError, ValueError)):
        seed(4, 0)


def test_square_second_derivative():
    x = seed(0, 0.7)
    assert (x * x).dd[PACK[0, 0]] == 2


def test_inverse_norm_mixed_derivative():
    z1, z2, w1, w2 = (seed(k, v) for k, v in enumerate([1, 0, 1, 0]))
    r = 1 / (z1 * w1 + z2 * w2)
    assert abs(r.dd[PACK[0, 2]] - 1) < 1e-15


def test_exp_lift():
    e = jets.exp(seed(0, 0))
    assert e.val == 1 and e.d[0] == 1 and e.dd[PACK[0, 0]] == 1


def test_domain_errors():
    with pytest.raises(JetDomainError):
        1 / Jet.const(0.0)
    with pytest.raises(JetDomainError):
        jets.log(Jet.const(-1.0))
    with pytest.raises(JetDomainError):
        jets.sqrt(Jet.const(-4.0))


def _random_jet(draw_vals):
    v = np.asarray(draw_vals, dtype=float)
    c = v[0::2] + 1j * v[1::2]
    return Jet(c[0], c[1:5], c[5:15])


cplx = st.floats(-2, 2, allow_nan=False, allow_infinity=False)
jet_strategy = st.lists(cplx, min_size=30, max_size=30).map(_random_jet)


def _close(a: Jet, b: Jet, tol=1e-12):
    scale = 1 + max(np.abs(a.val), np.abs(a.d).max(), np.abs(a.dd).max())
    assert abs(a.val - b.val) <= tol * scale
    assert np.abs(a.d - b.d).max() <= tol * scale
    assert np.abs(a.dd - b.dd).max() <= tol * scale


@settings(max_examples=100, deadline=None)
@given(jet_strategy, jet_strategy, jet_strategy)
def test_ring_laws(a, b, c):
    _close(a + b, b + a)
    _close(a * b, b * a)
    _close((a + b) + c, a + (b + c))
    _close((a * b) * c, a * (b * c), tol=1e-11)
    _close(a * (b + c), a * b + a * c, tol=1e-11)


@settings(max_examples=100, deadline=None)
@given(jet_strategy, jet_strategy)
def test_division_undoes_product(a, b):
    if abs(b.val) < 0.3:
        b = b + 1.0
    _close((a * b) / b, a, tol=1e-10)


@settings(max_examples=100, deadline=None)
@given(jet_strategy)
def test_exp_log(a):
    a = Jet(abs(a.val.real) + 0.5 + 1j * a.val.imag, a.d, a.dd)
    _close(jets.exp(jets.log(a)), a, tol=1e-12)


@settings(max_examples=50, deadline=None)
@given(jet_strategy)
def test_leibniz_against_full_hessian(a):
    sq = a * a
    H = a.hessian()
    np.testing.assert_allclose(sq.hessian(), 2 * a.val * H + 2 * np.outer(a.d, a.d), atol=1e-12)


def test_diff_shifts_slots():
    x = seed(0, 0.5)
    f = x * x * x
    g = f.diff(0)
    assert abs(g.val - 3 * 0.25) < 1e-15
    assert abs(g.d[0] - 3) < 1e-15
    assert g.order == 1


def test_conj_swaps_directions():
    p = np.array([0.3 + 0.2j, 0.1 - 0.5j])
    z = [seed(k, v) for k, v in enumerate([p[0], p[1], np.conj(p[0]), np.conj(p[1])])]
    f = z[0] * z[0] * z[3]
    g = f.conj()
    # conj(z1^2 zb2) = zb1^2 z2
    h = z[2] * z[2] * z[1]
    _close(g, h)


# ---- the oracle itself --------------------------------------------------------


def test_oracle_examples():
    p = np.array([3, 0, 3, 0], dtype=complex)
    assert abs(fd_oracle(parse("z1^2"), p, [0]) - 6) < 1e-6
    q = np.array([2, 0, 2, 0], dtype=complex)
    assert abs(fd_oracle(parse("z1*zb1"), q, [2]) - 2) < 1e-8
    r = np.array([1, 0, 1, 0], dtype=complex)
    assert abs(fd_oracle(parse("1/(z1*zb1+z2*zb2)"), r, [0, 2]) - 1) < 1e-5


def test_oracle_rejects_bad_step():
    with pytest.raises(ValueError):
        fd_oracle(parse("z1"), np.zeros(4, dtype=complex), [0], step=1.0)


EXPRESSIONS = [
    "exp(0.1*cos(pi*(z1+zb1)))",
    "1/(z1*zb1+z2*zb2)",
    "2 + 0.5*cos(pi*(z1+zb1)) + 0.3*sin(pi*i*(zb2-z2))",
    "sqrt(3 + z1*zb1) * log(2 + z2*zb2)",
    "(z1 - zb2)^3 / (4 + z2*zb1)",
]


@pytest.mark.parametrize("src", EXPRESSIONS)
def test_jets_match_oracle(src, rng):
    e = parse(src)
    z = rng.normal(size=(20, 2)) + 1j * rng.normal(size=(20, 2))
    z = z / np.abs(z).max() * 1.5 + 0.2
    for p in np.concatenate([z, z.conj()], axis=1):
        j = eval_jet(e, p)
        scale = max(1.0, np.abs(j.d).max(), np.abs(j.dd).max())
        for a in range(4):
            assert abs(j.d[a] - fd_oracle(e, p, [a], richardson=True)) <= 1e-6 * scale
        for n, (a, b) in enumerate(PAIRS):
            assert abs(j.dd[n] - fd_oracle(e, p, [a, b], step=1e-3, richardson=True)) <= 1e-5 * scale
