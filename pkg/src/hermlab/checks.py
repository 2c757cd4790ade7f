"""Identity registry: pointwise, operator and integral residual checks.

Every identity is evaluated as a list of additive terms on each side.  The
residual at a point (or of an integral identity) is ``|sum(lhs) - sum(rhs)|``
and the normalization is the sum of the magnitudes of all the terms, so a
pass means the identity balances relative to the size of what it balances.
Identities with several parts report the worst part and keep every part in
``details``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from . import domains, forms, geometry, jets
from .forms import Conventions, DEFAULT, Dashboard
from .jets import Jet

EPS = 1e-300
TOL_POINT = 1e-9
TOL_INT = 1e-6
TOL_OP = 1e-9
DIAG_TOL = 1e-9


@dataclass
class CheckResult:
    id: str
    paper_ref: str
    kind: str
    residual_abs: float
    normalization: float
    residual_rel: float
    tolerance: float
    passed: bool
    resolution: Optional[int] = None
    worst_point: Optional[list] = None
    details: dict = field(default_factory=dict)

    def row(self) -> dict:
        """The report columns for this check."""
        return {
            "id": self.id,
            "paper_ref": self.paper_ref,
            "kind": self.kind,
            "residual_abs": self.residual_abs,
            "residual_rel": self.residual_rel,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "resolution": self.resolution,
        }


@dataclass(frozen=True)
class Identity:
    id: str
    kind: str
    statement: str
    func: Callable


# ---------------------------------------------------------------------------
# residual arithmetic
# ---------------------------------------------------------------------------


def _mag(x, n: int) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim == 0:
        return np.full(n, abs(complex(x)))
    return np.abs(x).reshape(n, -1).max(axis=1)


def pointwise_residual(lhs: list, rhs: list, ref: tuple = ()):
    """(abs, normalization, rel, worst index) over a batch of points.

    ``ref`` terms enter the normalization only; they give a scale to
    identities whose every term vanishes on a particular metric.
    """
    terms = list(lhs) + [-np.asarray(t) for t in rhs]
    n = np.asarray(terms[0]).shape[0]
    total = sum(np.asarray(t) for t in terms)
    diff = _mag(total, n)
    norm = sum(_mag(t, n) for t in list(terms) + list(ref))
    rel = np.where(diff == 0, 0.0, diff / np.maximum(norm, EPS))
    k = int(np.argmax(rel))
    return float(diff[k]), float(norm[k]), float(rel[k]), k


def integral_residual(lhs: list, rhs: list, ref: tuple = ()):
    terms = [complex(t) for t in lhs] + [-complex(t) for t in rhs]
    diff = abs(sum(terms))
    norm = sum(abs(t) for t in terms) + sum(abs(complex(t)) for t in ref)
    rel = 0.0 if diff == 0 else diff / max(norm, EPS)
    return diff, norm, rel


def _result(ident: Identity, parts: dict, tol: float, points=None, resolution=None) -> CheckResult:
    worst, details = None, {}
    for name, sides in parts.items():
        if ident.kind == "integral":
            diff, norm, rel = integral_residual(*sides)
            k = None
        else:
            diff, norm, rel, k = pointwise_residual(*sides)
        details[name] = rel
        if worst is None or rel > worst[2]:
            worst = (diff, norm, rel, k)
    diff, norm, rel, k = worst
    where = None
    if k is not None and points is not None:
        where = [complex(z) for z in points[k, :2]]
    return CheckResult(
        id=ident.id,
        paper_ref=ident.statement,
        kind=ident.kind,
        residual_abs=diff,
        normalization=norm,
        residual_rel=rel,
        tolerance=tol,
        passed=bool(rel <= tol),
        resolution=resolution,
        worst_point=where,
        details=details,
    )


# ---------------------------------------------------------------------------
# pointwise context
# ---------------------------------------------------------------------------


class PointContext:
    """Frame, dashboard and the matrices the pointwise identities share."""

    def __init__(self, mj, points, conv: Conventions = DEFAULT):
        self.points = points
        self.fr = geometry.frame_from_metric(mj, points)
        self.D = Dashboard(mj, conv)
        self.n = len(points)
        D, fr = self.D, self.fr
        self.w = D.omega.val
        self.h = fr.h
        self.t = D.t
        self.lam = D.lam_dbdbstar
        self.mu = D.lam_ddstar
        self.S = forms.to_matrix(D.ddstar + D.dbdbstar)
        self.Wm = forms.to_matrix(D.W)

    def hs(self, c):
        """c h as a matrix batch."""
        return np.asarray(c)[:, None, None] * self.h

    def ws(self, c):
        """c w as a form batch."""
        return np.asarray(c)[:, None] * self.w


def _p1(c: PointContext):
    fr = c.fr
    return {"theta2": ([fr.Theta2], [fr.Theta1, -c.S, c.hs(c.mu)])}


def _p2(c: PointContext):
    fr = c.fr
    return {"ric11": ([fr.RicH], [fr.Theta1, -0.5 * c.S, 0.5 * c.Wm, c.hs(c.mu), -c.hs(c.t)])}


def _p3(c: PointContext):
    fr = c.fr
    TT = np.einsum("ni,nj->nij", fr.Ttr, fr.Ttr)
    return {
        "ric20": ([fr.RicHol], [-0.5 * fr.M, -0.5 * TT]),
        "M_chern_vs_lc": ([fr.M], [fr.M_lc]),
    }


def _p4(c: PointContext):
    fr = c.fr
    return {
        "t_box_t": ([geometry.t_box_t(fr)], [c.hs(c.D.t_dstar)]),
        "t_circ_t": ([geometry.t_circ_t(fr)], [c.hs(2 * c.t), -2 * c.Wm]),
    }


def _p5(c: PointContext):
    D = c.D
    return {
        "i_ddbar_omega": (
            [D.i_ddb_omega],
            [forms.wedge(D.W, c.w), -forms.wedge(D.dbdbstar, c.w)],
        ),
        "lambda_i_ddbar_omega": ([D.lam_i_ddb_omega], [c.ws(c.t), -c.ws(c.lam)]),
        "lambda_conj": ([c.lam], [c.mu]),
    }


def _p6(c: PointContext):
    D = c.D
    return {"d_omega": ([D.d_omega.val], [-1j * forms.wedge(D.dbs_omega.val, c.w)])}


def _p7(c: PointContext):
    D = c.D
    return {
        "dstar_d_omega": ([D.dstar_d, D.dbdbstar], [c.ws(c.lam)]),
        "dbarstar_d_omega": ([D.dbstar_d], [D.ddbstar], [D.dbdbstar]),
    }


def _p8(c: PointContext):
    D = c.D
    return {
        "lambda_dd_star": ([c.mu], [c.lam]),
        "lambda_dbar_dbar_star": ([c.lam], [c.t, -D.i_ds_dbs]),
    }


def _p9(c: PointContext):
    fr = c.fr
    Rc, hinv = fr.Rc, fr.hinv
    R4 = fr.R4
    # R_{i jbar k lbar} + R_{i k lbar jbar} + R_{i lbar jbar k} = 0
    b1 = R4[:, 0:2, 2:4, 0:2, 2:4]
    b2 = np.einsum("niklj->nijkl", R4[:, 0:2, 0:2, 2:4, 2:4])
    b3 = np.einsum("niljk->nijkl", R4[:, 0:2, 2:4, 2:4, 0:2])
    # Ricci through the Hermitian blocks
    ric11 = np.einsum("nkl,nkijl->nij", hinv, R4[:, 0:2, 0:2, 2:4, 2:4]) + np.einsum(
        "nkl,nkjil->nij", hinv, R4[:, 0:2, 2:4, 0:2, 2:4]
    )
    rh = fr.Rh
    ric20 = np.einsum("nkl,nkijl->nij", hinv, rh) + np.einsum("nkl,nkjil->nij", hinv, rh)
    return {
        "pair_symmetry": ([Rc], [np.einsum("nijkl->nklij", Rc)]),
        "first_bianchi": ([b1, b2, b3], []),
        "ricci11_route": ([fr.RicH], [ric11]),
        "ricci20_route": ([fr.RicHol], [ric20]),
        "ricci11_conj": ([fr.RicH], [np.conj(np.swapaxes(fr.RicH, 1, 2))]),
        "ricci20_sym": ([fr.RicHol], [np.swapaxes(fr.RicHol, 1, 2)]),
        "theta1_conj": ([fr.Theta1], [np.conj(np.swapaxes(fr.Theta1, 1, 2))]),
    }


def _p10(c: PointContext):
    fr = c.fr
    h, T = fr.h, fr.T
    Tlow = np.einsum("nsl,nski->nkil", h, T)
    cg = fr.cGamma
    return {
        "R_kijl_torsion": (
            [fr.Rh],
            [
                0.5 * np.einsum("nkilj->nkijl", fr.TlowCh),
                0.25 * np.einsum("niql,nqkj->nkijl", Tlow, T),
                -0.25 * np.einsum("nkql,nqij->nkijl", Tlow, T),
            ],
        ),
        "T_contraction": ([np.einsum("nkiq,nqjk->nij", T, T)], [np.einsum("ni,nj->nij", fr.Ttr, fr.Ttr)]),
        "mixed_christoffel": ([2 * fr.GammaBar], [np.einsum("nqil,njq,nkl->nkij", np.conj(T), h, fr.hinv)]),
        "T_from_chern": ([T], [cg, -np.swapaxes(cg, 2, 3)]),
        "gamma_from_chern": ([2 * fr.Gamma], [cg, np.swapaxes(cg, 2, 3)]),
    }


def _p11(c: PointContext):
    fr = c.fr
    return {
        "s11": ([fr.s11], [fr.s_c, c.lam, -1.5 * c.t]),
        "s_twice_s11": ([fr.s], [2 * fr.s11]),
        "s_c_second": ([fr.s_c], [fr.s_c2]),
        "theta1_logdet": ([fr.Theta1], [fr.Theta1_logdet]),
    }


def _p12(c: PointContext):
    fr = c.fr
    r2 = geometry.r2_definitional(fr, c.S)
    return {
        "r2_vs_ric11": ([r2], [fr.RicH, -c.hs(c.mu), c.hs(0.75 * c.t)]),
        "r2_vs_torsion_form": ([r2], [fr.Theta1, -0.5 * c.S, 0.5 * c.Wm, -c.hs(0.25 * c.t)]),
    }


def poly_field(points: np.ndarray, slots, seed: int = 0) -> Jet:
    """A form whose ``slots`` carry random quadratic polynomials in z, zb."""
    rng = np.random.default_rng(seed)
    z = [jets.seed(a, points[:, a]) for a in range(4)]
    n = len(points)
    zero = Jet.const(np.zeros(n, dtype=complex))
    comps = []
    for s in range(forms.DIM):
        if s not in slots:
            comps.append(zero)
            continue
        c = 0.5 * (rng.normal(size=15) + 1j * rng.normal(size=15))
        f = zero + c[0]
        k = 1
        for a in range(4):
            f = f + z[a] * c[k]
            k += 1
        for a in range(4):
            for b in range(a, 4):
                if k < 15:
                    f = f + z[a] * z[b] * c[k]
                    k += 1
        comps.append(f)
    return Jet.stack(comps, axis=1)


def _p13(c: PointContext):
    D, fr = c.D, c.fr
    n = c.n
    parts = {}
    one = Jet.const(forms.from_scalar(np.ones(n)))
    eta01 = poly_field(c.points, [3, 4], seed=11)
    f11 = poly_field(c.points, list(forms.PAIR11.ravel()), seed=12)
    for name, f in [("one", one), ("omega", D.omega), ("poly01", eta01), ("poly11", f11)]:
        left = D.codiff(forms.wedge(D.omega, f), "dbarstar").val
        right = forms.wedge(c.w, D.codiff(f, "dbarstar").val)
        dfv = forms.d_part(f, "d").val
        parts[f"bochner_{name}"] = ([left, -right], [1j * dfv, 1j * D.tau_op(f.val, "tau")])
    hol = forms.one_form(hol=fr.Ttr, n=n)
    parts["dbarstar_omega_tau"] = ([D.dbs_omega.val], [1j * D.tau_op(forms.from_scalar(np.ones(n)), "tau")])
    parts["dbarstar_omega_torsion"] = ([D.dbs_omega.val], [1j * hol])
    parts["dstar_omega_torsion"] = ([D.ds_omega.val], [-1j * forms.one_form(antihol=fr.TtrBar, n=n)])
    eta = eta01.val[:, 3:5]
    parts["taubar_star_01"] = (
        [forms.scalar(D.tau_op(eta01.val, "taubar*"))],
        [np.einsum("njl,nj,nl->n", fr.hinv, fr.Ttr, eta)],
    )
    parts["tau_star_d_omega"] = ([D.tau_op(D.d_omega.val, "tau*")], [-c.ws(c.t)])
    parts["taubar_star_d_omega"] = ([D.tau_op(D.d_omega.val, "taubar*")], [])
    deta = eta01.d[:, 3:5, 0:2]  # [n, l, j] = d_j eta_lbar
    parts["dbarstar_01"] = (
        [forms.scalar(D.codiff(eta01, "dbarstar"))],
        [-np.einsum("njl,nlj->n", fr.hinv, deta), -np.einsum("njl,nj,nl->n", fr.hinv, fr.Ttr, eta)],
    )
    return parts


POINTWISE = [
    Identity("P1", "pointwise", "Theta2 = Theta1 - (dd*w + dbar dbar*w) + (Lambda dd*w) w", _p1),
    Identity(
        "P2",
        "pointwise",
        "Ric11 = Theta1 - (dd*w + dbar dbar*w)/2 + sqrt(-1) dbar*w ^ d*w / 2 + (Lambda dd*w - |dbar*w|^2) w",
        _p2,
    ),
    Identity("P3", "pointwise", "Ric20 = -M/2 - T_i T_j / 2, M by Chern and Levi-Civita routes", _p3),
    Identity(
        "P4",
        "pointwise",
        "sqrt(-1) T box Tbar = |d*w|^2 w;  sqrt(-1) T o Tbar = 2|dbar*w|^2 w - 2 sqrt(-1) dbar*w ^ d*w",
        _p4,
    ),
    Identity(
        "P5",
        "pointwise",
        "sqrt(-1) d dbar w = sqrt(-1) dbar*w ^ d*w ^ w - dbar dbar*w ^ w;  Lambda of it = (|dbar*w|^2 - Lambda dbar dbar*w) w",
        _p5,
    ),
    Identity("P6", "pointwise", "d w = -sqrt(-1) dbar*w ^ w", _p6),
    Identity("P7", "pointwise", "d* d w + dbar dbar*w = (Lambda dbar dbar*w) w;  dbar* d w = d dbar*w", _p7),
    Identity("P8", "pointwise", "Lambda dd*w = Lambda dbar dbar*w = |dbar*w|^2 - sqrt(-1) d* dbar*w", _p8),
    Identity("P9", "pointwise", "curvature symmetries, first Bianchi identity and Ricci via Hermitian blocks", _p9),
    Identity(
        "P10",
        "pointwise",
        "R_{kij lbar} = nabla_j T_{ki lbar}/2 + T_{iq lbar} T^q_{kj}/4 - T_{kq lbar} T^q_{ij}/4;  T^k_{iq} T^q_{jk} = T_i T_j",
        _p10,
    ),
    Identity("P11", "pointwise", "s11 = s_c + Lambda dbar dbar*w - 3|dbar*w|^2/2, s = 2 s11, s_c = tr Theta2", _p11),
    Identity(
        "P12",
        "pointwise",
        "r2 = Theta1 - (dd*w + dbar dbar*w)/2 - sqrt(-1) T o Tbar/4 + sqrt(-1) T box Tbar/4 = Ric11 - (Lambda dd*w - 3|d*w|^2/4) w",
        _p12,
    ),
    Identity("P13", "operator", "[dbar*, L] = sqrt(-1)(d + tau) and the first-order torsion formulas", _p13),
]


def run_pointwise_suite(
    m,
    points: Optional[np.ndarray] = None,
    n: int = 100,
    seed: int = 0,
    tol_point: float = TOL_POINT,
    tol_op: float = TOL_OP,
    conv: Conventions = DEFAULT,
    scale: float = 1.0,
) -> list:
    if points is None:
        points = m.domain.sample_points(n, seed)
    errors = (ArithmeticError, ValueError, np.linalg.LinAlgError)

    def failed(ident, tol, exc, where=None):
        return CheckResult(ident.id, ident.statement, ident.kind, np.inf, 0.0, np.inf, tol, False,
                           worst_point=where, details={"error": str(exc)})

    def tol_of(ident):
        return tol_op if ident.kind == "operator" else tol_point

    try:
        ctx = PointContext(geometry.metric_at(m, points, scale=scale), points, conv)
    except errors as exc:
        where = _first_bad_point(m, points, scale)
        return [failed(ident, tol_of(ident), exc, where) for ident in POINTWISE]
    out = []
    for ident in POINTWISE:
        try:
            parts = ident.func(ctx)
        except errors as exc:
            out.append(failed(ident, tol_of(ident), exc))
            continue
        out.append(_result(ident, parts, tol_of(ident), points))
    return out


def _first_bad_point(m, points, scale):
    for p in points:
        try:
            geometry.metric_at(m, p[None], scale=scale)
        except (ArithmeticError, ValueError, np.linalg.LinAlgError):
            return [complex(z) for z in p[:2]]
    return None


# ---------------------------------------------------------------------------
# integral suite
# ---------------------------------------------------------------------------


def node_bundle(m, p: np.ndarray, conv: Conventions = DEFAULT, scale: float = 1.0) -> dict:
    """Every integrand the integral identities use, per node (against w^2/2)."""
    mj = geometry.metric_at(m, p, scale=scale)
    fr = geometry.frame_from_metric(mj, p)
    D = Dashboard(mj, conv)
    ip = D.inner
    hinv = fr.hinv
    A, Ap, Dd = D.dbdbstar, D.ddstar, D.ddbstar
    W = D.W
    t, lam, mu = D.t, D.lam_dbdbstar, D.lam_ddstar
    R11 = forms.from_matrix(fr.RicH)
    Th1 = forms.from_matrix(fr.Theta1)
    Th2 = forms.from_matrix(fr.Theta2)
    S = forms.to_matrix(Ap + A)
    r2 = forms.from_matrix(geometry.r2_definitional(fr, S))
    half_dsd = 0.5 * (D.dstar_d + D.dbstar_db)
    B = D.B
    s, s_c, s11 = fr.s, fr.s_c, fr.s11
    tt = conv.twotensor
    return {
        "deth": mj.deth.val,
        "vol": np.ones(len(p)),
        "AA": ip(A, A),
        "ApAp": ip(Ap, Ap),
        "DD": ip(Dd, Dd),
        "ll": lam * np.conj(lam),
        "tl": t * np.conj(lam),
        "tt": t * t,
        "R20": tt * geometry.twotensor_norm2(fr.RicHol, hinv),
        "MM": tt * geometry.twotensor_norm2(fr.M, hinv),
        "R11W": ip(R11, W),
        "R11R11": ip(R11, R11),
        "symW": ip(0.5 * (Ap + A), W),
        "ApA": ip(Ap, A),
        "sum2": ip(Ap + A, Ap + A),
        "A_dsd": ip(A, D.dstar_d),
        "dsd2": ip(D.dstar_d, D.dstar_d),
        "R11_half": ip(R11, half_dsd),
        "ss": s * s,
        "st": s * t,
        "sl": s * np.conj(lam),
        "q2lt": np.abs(2 * lam - t) ** 2,
        "c1w": forms.as_values(forms.wedge(Th1, Th1))[:, forms.TOP] / mj.deth.val,
        "Th1Th1": ip(Th1, Th1),
        "Th2Th2": ip(Th2, Th2),
        "BB": ip(B, B),
        "R11B": ip(R11, B),
        "scsc": s_c * s_c,
        "s11s11": s11 * s11,
        "s11t": s11 * t,
        "s11l": s11 * np.conj(lam),
        "lt": lam * t,
        "Th1W": ip(Th1, W),
        "Th2W": ip(Th2, W),
        "r2W": ip(r2, W),
        "mut2": np.abs(mu - t) ** 2,
        "Th2_half": ip(Th2, half_dsd),
        "scl": s_c * np.conj(lam),
        "sct": s_c * t,
        "ds_norm2": D.t_dstar,
    }


def compute_integrals(m, rule, conv: Conventions = DEFAULT, scale: float = 1.0, threads=None, chunk: int = 1024) -> dict:
    data = domains.map_chunks(lambda p: node_bundle(m, p, conv, scale), rule.nodes, chunk=chunk, threads=threads)
    deth = data.pop("deth")
    names = sorted(data)
    vals = domains.integrate(np.stack([data[k] for k in names], axis=1), rule, deth)
    return dict(zip(names, vals))


def _i1(I):
    return {
        "torsion": (
            [I["symW"]],
            [-I["tl"], I["R20"], -0.25 * I["MM"], 0.75 * I["tt"]],
        )
    }


def _i2(I):
    return {"main": ([I["AA"], I["ll"]], [2 * I["R11W"], 2 * I["R20"], 0.5 * I["tt"]])}


def _i3(I):
    return {
        "A_dstar_d": ([I["A_dsd"]], [-I["DD"]], [I["AA"]]),
        "A_split": ([I["AA"]], [I["ll"], I["DD"]]),
        "dstar_d_norm": ([I["dsd2"]], [I["AA"]]),
        "conj_norm": ([I["ApAp"]], [I["AA"]]),
        "pairing": ([I["ApA"]], [I["ll"]]),
        "quadratic": ([I["sum2"]], [2 * I["ll"], 2 * I["AA"]]),
    }


def _i4(I):
    return {
        "ric11_pairing": (
            [I["R11_half"]],
            [0.5 * I["AA"], 0.5 * I["ll"], -0.375 * I["tt"], -0.5 * I["R20"], 0.125 * I["MM"]],
        )
    }


def _i5(I):
    return {
        "c1sq": (
            [I["c1w"]],
            [0.25 * I["ss"], -I["R11R11"], 0.5 * I["st"], -I["sl"], -I["R20"], I["DD"], 0.75 * I["q2lt"]],
        )
    }


def _i6(I):
    AL = [I["AA"], I["ll"]]
    return {
        "theta1_norm": ([I["Th1Th1"]], [I["R11R11"], I["st"], -AL[0], -AL[1], 1.5 * I["tt"], I["R20"]]),
        "B_norm": ([I["BB"]], [0.5 * AL[0], 0.5 * AL[1], 0.5 * I["tt"], 0.25 * I["MM"], -I["R20"]]),
        "ric11_B": (
            [2 * I["R11B"]],
            [-1.5 * AL[0], -1.5 * AL[1], I["tt"], 2 * I["R20"], -0.25 * I["MM"], I["st"]],
        ),
        "s_c_square": (
            [I["scsc"]],
            [I["s11s11"], I["ll"], 2.25 * I["tt"], 3 * I["s11t"], -2 * I["s11l"], -3 * I["lt"]],
        ),
    }


def _i7(I):
    return {"c1sq_scalar": ([I["c1w"]], [I["scsc"], -I["Th1Th1"]])}


def _i8(I):
    AL = [0.5 * I["AA"], 0.5 * I["ll"]]
    return {
        "theta1_W": ([I["Th1W"]], AL + [I["tt"], -2 * I["tl"], -0.25 * I["MM"]]),
        "theta2_W": ([I["Th2W"]], AL + [I["tl"], -0.5 * I["tt"], -2 * I["R20"], 0.25 * I["MM"]]),
    }


def _i9(I):
    return {
        "r2_W": ([I["AA"], I["mut2"]], [2 * I["r2W"], 2 * I["R20"]]),
        "theta2_pairing": ([I["Th2_half"]], [I["DD"], I["ll"]]),
        "theta2_pairing_norm": ([I["Th2_half"]], [I["AA"]]),
    }


def _i10(I):
    return {"c1sq_theta2": ([I["c1w"]], [I["scsc"], -I["Th2Th2"], 2 * I["AA"], -2 * I["scl"]])}


INTEGRAL = [
    Identity(
        "I1",
        "integral",
        "((d d*w + dbar dbar*w)/2, W) = -(|dbar*w|^2, Lambda dbar dbar*w) + |Ric20|^2 - |M|^2/4 + 3/4 (|dbar*w|^4, 1)",
        _i1,
    ),
    Identity(
        "I2",
        "integral",
        "|dbar dbar*w|^2 + |Lambda dbar dbar*w|^2 = 2 (Ric11, W) + 2 |Ric20|^2 + (|dbar*w|^4, 1)/2",
        _i2,
    ),
    Identity(
        "I3",
        "integral",
        "|dbar dbar*w|^2 = |Lambda dbar dbar*w|^2 + |d dbar*w|^2 and the companion pairings of d d*w, dbar dbar*w, d* d w",
        _i3,
    ),
    Identity(
        "I4",
        "integral",
        "(Ric11, (d*dw + dbar*dbar w)/2) = (|dbar dbar*w|^2 + |Lambda dbar dbar*w|^2)/2 - 3/8 (|dbar*w|^4,1) - |Ric20|^2/2 + |M|^2/8",
        _i4,
    ),
    Identity(
        "I5",
        "integral",
        "4 pi^2 c1^2 = (s^2/4,1) - |Ric11|^2 + (s/2, |dbar*w|^2) - (s, Lambda dbar dbar*w) - |Ric20|^2 + |d dbar*w|^2 + 3/4 |2 Lambda dbar dbar*w - |dbar*w|^2|^2",
        _i5,
    ),
    Identity("I6", "integral", "norms of Theta1 and B, (Ric11, B) and (s_c^2, 1) in terms of torsion integrals", _i6),
    Identity("I7", "integral", "4 pi^2 c1^2 = int Theta1 ^ Theta1 = (s_c^2, 1) - |Theta1|^2", _i7),
    Identity("I8", "integral", "(Theta1, W) and (Theta2, W) in terms of torsion integrals", _i8),
    Identity(
        "I9",
        "integral",
        "|dbar dbar*w|^2 + |Lambda dd*w - |d*w|^2|^2 = 2 (r2, W) + 2 |Ric20|^2;  (Theta2, (d*dw + dbar*dbar w)/2) = |dbar dbar*w|^2",
        _i9,
    ),
    Identity(
        "I10",
        "integral",
        "4 pi^2 c1^2 = (s_c^2, 1) - |Theta2|^2 + 2 |dbar dbar*w|^2 - (2 s_c, Lambda dbar dbar*w)",
        _i10,
    ),
]

REGISTRY = POINTWISE + INTEGRAL


def run_integral_suite(
    m,
    d=None,
    R: int = 12,
    tol_int: float = TOL_INT,
    conv: Conventions = DEFAULT,
    scale: float = 1.0,
    threads=None,
    integrals: Optional[dict] = None,
    rule=None,
) -> list:
    d = d or m.domain
    if integrals is None:
        rule = rule or domains.build_rule(d, R)
        integrals = compute_integrals(m, rule, conv, scale, threads)
    return [_result(ident, ident.func(integrals), tol_int, resolution=R) for ident in INTEGRAL]


def chern_number(m, d=None, R: int = 12, integrals: Optional[dict] = None, threads=None):
    """(int Theta1 ^ Theta1, (s_c^2,1) - |Theta1|^2), both equal to 4 pi^2 c1^2."""
    if integrals is None:
        integrals = compute_integrals(m, domains.build_rule(d or m.domain, R), threads=threads)
    wedge_val = float(np.real(integrals["c1w"]))
    scalar_val = float(np.real(integrals["scsc"] - integrals["Th1Th1"]))
    return wedge_val, scalar_val


def norms_2tensor(block: str, m, d=None, R: int = 12, integrals: Optional[dict] = None, threads=None) -> float:
    """Full h h contraction norm of Ric20 (``'ric20'``) or M (``'M'``)."""
    key = {"ric20": "R20", "M": "MM"}[block]
    if integrals is None:
        integrals = compute_integrals(m, domains.build_rule(d or m.domain, R), threads=threads)
    return float(np.real(integrals[key]))


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


@dataclass
class Diagnostics:
    kahler: bool
    dbar_star_norm2: float
    max_d_omega: float
    gauduchon: bool
    max_i_ddbar_omega: float
    ric20_zero: bool
    ric20_norm2: float
    ric11_min: float
    ric11_max: float
    theorem_hypotheses: dict

    def as_dict(self) -> dict:
        return asdict(self)


def _generalized_eigs(a: np.ndarray, h: np.ndarray) -> np.ndarray:
    out = []
    for ak, hk in zip(a, h):
        ak = 0.5 * (ak + ak.conj().T)
        out.append(scipy.linalg.eigh(ak, hk, eigvals_only=True))
    return np.array(out)


def _proportional(a: np.ndarray, h: np.ndarray):
    """(max relative deviation of a from (tr a / 2) h, the factors tr a / 2)."""
    c = 0.5 * np.real(np.einsum("nij,nij->n", np.linalg.inv(h).swapaxes(1, 2), a))
    dev = np.abs(a - c[:, None, None] * h).max(axis=(1, 2))
    scale = np.maximum(np.abs(a).max(axis=(1, 2)), np.abs(c[:, None, None] * h).max(axis=(1, 2)))
    return float((dev / np.maximum(scale, EPS)).max()), c


def classify(
    m,
    d=None,
    R: int = 12,
    n: int = 100,
    seed: int = 0,
    tol: float = DIAG_TOL,
    integrals: Optional[dict] = None,
    threads=None,
    scale: float = 1.0,
) -> Diagnostics:
    d = d or m.domain
    if integrals is None:
        integrals = compute_integrals(m, domains.build_rule(d, R), scale=scale, threads=threads)
    points = d.sample_points(n, seed)
    mj = geometry.metric_at(m, points, scale=scale)
    ctx = PointContext(mj, points)
    D, fr = ctx.D, ctx.fr
    vol = float(np.real(integrals["vol"]))
    dnorm = np.sqrt(D.norm2(D.d_omega.val) + D.norm2(D.db_omega.val))
    ddb = np.sqrt(D.norm2(D.i_ddb_omega))
    eig = _generalized_eigs(fr.RicH, fr.h)
    cor = _generalized_eigs(fr.RicH + 0.25 * ctx.Wm, fr.h)
    r20 = float(np.real(integrals["R20"]))
    m_max = float(np.abs(fr.M).max())
    ric_dev, ric_c = _proportional(fr.RicH, fr.h)
    th_dev, th_c = _proportional(fr.Theta2, fr.h)
    hyp = {
        "ric_nonpositive": {
            "applies": bool(r20 < tol * vol and eig.max() <= tol),
            "max_eigenvalue": float(eig.max()),
            "ric20_norm2": r20,
        },
        "ric11_plus_quarter_W_nonpositive": {
            "applies": bool(cor.max() <= tol),
            "max_eigenvalue": float(cor.max()),
        },
        "M_zero": {"applies": bool(m_max < tol), "max_abs_M": m_max},
        "ric11_equals_minus_u2_omega": {
            "applies": bool(ric_dev < tol and ric_c.max() <= tol),
            "shape_deviation": ric_dev,
            "max_factor": float(ric_c.max()),
        },
        "theta2_equals_minus_c2_omega": {
            "applies": bool(th_dev < tol and th_c.max() <= tol and np.ptp(th_c) < tol),
            "shape_deviation": th_dev,
            "factor_spread": float(np.ptp(th_c)),
            "max_factor": float(th_c.max()),
        },
    }
    return Diagnostics(
        kahler=bool(dnorm.max() < tol),
        dbar_star_norm2=float(np.real(integrals["ds_norm2"])),
        max_d_omega=float(dnorm.max()),
        gauduchon=bool(ddb.max() < tol),
        max_i_ddbar_omega=float(ddb.max()),
        ric20_zero=bool(r20 < tol * vol),
        ric20_norm2=r20,
        ric11_min=float(eig.min()),
        ric11_max=float(eig.max()),
        theorem_hypotheses=hyp,
    )
