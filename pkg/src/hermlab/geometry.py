"""Connections and curvature of a Hermitian surface metric.

All tensors live in the holomorphic coordinate frame and are evaluated on a
batch of points at once; the leading axis of every array indexes points.
Index conventions:

* ``h[i, j]`` is h_{i jbar};  ``hinv[k, l]`` is h^{k lbar}, so that
  ``sum_l hinv[k, l] h[j, l] = delta_kj``.
* Four-index objects use A in 0..3 for (z1, z2, zb1, zb2).  ``g4`` is the
  complex-bilinear extension of the Riemannian metric with
  ``g4[i, 2+j] = g4[2+j, i] = h[i, j]``.
* ``Gamma4[C, A, B]`` is the Levi-Civita symbol Gamma^C_{AB};
  ``R4[A, B, C, E] = g(R(d_A, d_B) d_C, d_E)`` with
  ``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``.
* ``cGamma[p, i, k]`` is the Chern symbol h^{p lbar} d_i h_{k lbar};
  ``T[k, i, j]`` is T^k_{ij}; ``Ttr[i]`` is T_i = sum_k T^k_{ik}.
* A (1,1)-form sqrt(-1) a_{i jbar} dz^i ^ dzb^j is represented by the matrix
  ``a[i, j]``; its trace is ``tr_w(a) = sum hinv[i, j] a[i, j]`` so that
  ``tr_w(h) = 2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import jets
from .expr import HermitianError, MetricField, PositivityError
from .jets import Jet

HERMITIAN_TOL = 1e-8


@dataclass
class MetricJet:
    h: Jet  # (N, 2, 2)
    hinv: Jet  # (N, 2, 2)
    deth: Jet  # (N,)
    dethlog: Jet  # (N,)

    @property
    def n(self) -> int:
        return self.h.shape[0]

    @property
    def order(self) -> int:
        return self.h.order

    def scaled(self, lam: float) -> "MetricJet":
        return MetricJet(self.h * lam, self.hinv * (1 / lam), self.deth * lam**2, self.dethlog + np.log(lam**2))

    def g4(self) -> Jet:
        """Complexified Riemannian metric, shape (N, 4, 4)."""
        zero = Jet.const(np.zeros(self.h.shape), self.h.order)
        top = Jet.concat([zero, self.h], axis=2)
        bottom = Jet.concat([self.h.moveaxis(1, 2), zero], axis=2)
        return Jet.concat([top, bottom], axis=1)

    def ginv4(self) -> Jet:
        """Inverse of :meth:`g4`: ``ginv4[i, 2+j] = ginv4[2+j, i] = hinv[i, j]``."""
        zero = Jet.const(np.zeros(self.hinv.shape), self.hinv.order)
        top = Jet.concat([zero, self.hinv], axis=2)
        bottom = Jet.concat([self.hinv.moveaxis(1, 2), zero], axis=2)
        return Jet.concat([top, bottom], axis=1)


def _check_metric(h: np.ndarray, p: np.ndarray) -> None:
    scale = np.maximum(1.0, np.abs(h).max(axis=(-2, -1)))
    viol = np.abs(h[:, 1, 0] - np.conj(h[:, 0, 1])) / scale
    viol = np.maximum(viol, np.abs(h[:, 0, 0].imag) / scale)
    viol = np.maximum(viol, np.abs(h[:, 1, 1].imag) / scale)
    k = int(np.argmax(viol))
    if viol[k] > HERMITIAN_TOL:
        raise HermitianError(f"Hermitian violation {viol[k]:.3e} at point {p[k, :2]}")
    det = (h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0]).real
    if np.any(det <= 0) or np.any(h[:, 0, 0].real <= 0):
        k = int(np.argmax((det <= 0) | (h[:, 0, 0].real <= 0)))
        raise PositivityError(f"metric is not positive definite at point {p[k, :2]} (det h = {det[k]:.3e})")


def metric_at(m: MetricField, p, order: int = 2, check: bool = True, scale: float = 1.0) -> MetricJet:
    """Jets of h_{i jbar}, its inverse and log det at points ``p`` (N, 4)."""
    p = np.atleast_2d(np.asarray(p, dtype=complex))
    if order == 0:
        h = Jet.const(m.values_at(p), order=0)
    else:
        h = m.jets_at(p).truncate(order)
    if scale != 1.0:
        h = h * scale
    if check:
        _check_metric(h.val, p)
    h00, h01, h10, h11 = h[:, 0, 0], h[:, 0, 1], h[:, 1, 0], h[:, 1, 1]
    det = h00 * h11 - h01 * h10
    rdet = jets.reciprocal(det)
    # hinv[k, l] = h^{k lbar} = (H^{-1})[l, k]
    row0 = Jet.stack([h11 * rdet, -(h10 * rdet)], axis=-1)
    row1 = Jet.stack([-(h01 * rdet), h00 * rdet], axis=-1)
    hinv = Jet.stack([row0, row1], axis=-2)
    return MetricJet(h, hinv, det, jets.log(det))


# ---------------------------------------------------------------------------
# Levi-Civita
# ---------------------------------------------------------------------------


def christoffel(mj: MetricJet) -> Jet:
    """Gamma^C_{AB} of the complexified Levi-Civita connection, (N, 4, 4, 4).

    Carries one derivative when the metric jet is of order 2.
    """
    g = mj.g4()
    dg = g.grad()  # [n, A, E, B] = d_B g_{AE}
    # d_B g_{AE} + d_A g_{BE} - d_E g_{AB}, indexed [n, A, B, E]
    t1 = dg.moveaxis(3, 2)  # d_B g_{AE}
    t2 = dg.moveaxis(3, 1)  # d_A g_{BE}
    comb = t1 + t2 - dg  # dg[A, B, E] is d_E g_{AB}
    ginv = mj.ginv4().truncate(comb.order)
    return jets.einsum("nCE,nABE->nCAB", ginv, comb) * 0.5


def riemann(mj: MetricJet, gamma4: Optional[Jet] = None):
    """Lowered complexified curvature and Ricci tensor (plain arrays).

    Returns ``(R4, Ric4)`` with ``R4[A, B, C, E] = g(R(d_A, d_B) d_C, d_E)``
    and ``Ric4[B, C] = sum_A R(d_A, d_B)d_C^A``.
    """
    if gamma4 is None:
        gamma4 = christoffel(mj)
    G = gamma4.val
    dG = gamma4.d  # [n, D, B, C, A] = d_A Gamma^D_{BC}
    # R^D_{ABC} = d_A G^D_{BC} - d_B G^D_{AC} + G^F_{BC} G^D_{AF} - G^F_{AC} G^D_{BF}
    term = np.einsum("nDBCA->nABCD", dG)
    Rup = term - np.swapaxes(term, 1, 2)
    quad = np.einsum("nFBC,nDAF->nABCD", G, G)
    Rup = Rup + quad - np.swapaxes(quad, 1, 2)
    g = mj.g4().val
    R4 = np.einsum("nABCD,nDE->nABCE", Rup, g)
    ric = np.einsum("nABCA->nBC", Rup)
    return R4, ric


# ---------------------------------------------------------------------------
# Hermitian torsion and Chern connection
# ---------------------------------------------------------------------------


def _dh(mj: MetricJet) -> Jet:
    """``dh[n, k, l, a] = d_a h_{k lbar}`` carrying one order less than h."""
    return mj.h.grad()


def chern_christoffel(mj: MetricJet) -> Jet:
    dh = _dh(mj)
    hol = dh[:, :, :, 0:2]  # [k, l, i]
    return jets.einsum("npl,nkli->npik", mj.hinv.truncate(dh.order), hol)


def torsion(mj: MetricJet, cgamma: Optional[Jet] = None):
    """T^k_{ij} = cGamma^k_{ij} - cGamma^k_{ji} and its trace T_i."""
    if cgamma is None:
        cgamma = chern_christoffel(mj)
    T = cgamma - cgamma.moveaxis(2, 3)
    Ttr = T[:, 0, :, 0] + T[:, 1, :, 1]
    return T, Ttr


def chern_curvature(mj: MetricJet):
    """Theta_{i jbar k lbar} (N, 2, 2, 2, 2) from the second jet of h."""
    if mj.order < 2:
        raise ValueError("Chern curvature needs the second jet of h")
    hess = mj.h.hessian()  # [n, k, l, A, B]
    ddh = hess[:, :, :, 0:2, 2:4]  # [k, l, i, j] = d_i d_jbar h_{k lbar}
    dh = mj.h.d
    dhol = dh[..., 0:2]  # [k, q, i] = d_i h_{k qbar}
    dbar = dh[..., 2:4]  # [p, l, j] = d_jbar h_{p lbar}
    hinv = mj.hinv.val
    theta = -np.einsum("nklij->nijkl", ddh) + np.einsum("npq,nplj,nkqi->nijkl", hinv, dbar, dhol)
    return theta


def chern_ricci(mj: MetricJet, theta: np.ndarray):
    """(Theta1, Theta1 via -dd log det h, Theta2, Theta4) as (N, 2, 2) arrays."""
    hinv = mj.hinv.val
    theta1 = np.einsum("nkl,nijkl->nij", hinv, theta)
    logdet = -mj.dethlog.hessian()[:, 0:2, 2:4]
    theta2 = np.einsum("nkl,nklij->nij", hinv, theta)
    # Theta4_{s kbar} = h^{j lbar} Theta_{j kbar s lbar}
    theta4 = np.einsum("njl,njksl->nsk", hinv, theta)
    return theta1, logdet, theta2, theta4


def trace_w(a: np.ndarray, hinv: np.ndarray) -> np.ndarray:
    """tr_w of a (1,1)-form matrix, normalized by tr_w(h) = 2."""
    return np.einsum("nij,nij->n", hinv, a)


def twotensor_norm2(A: np.ndarray, hinv: np.ndarray, B: Optional[np.ndarray] = None) -> np.ndarray:
    """h^{i kbar} h^{j lbar} A_{ij} conj(B_{kl}) (full contraction, no 1/2)."""
    B = A if B is None else B
    return np.einsum("nik,njl,nij,nkl->n", hinv, hinv, A, np.conj(B))


# ---------------------------------------------------------------------------
# the frame
# ---------------------------------------------------------------------------


@dataclass
class PointFrame:
    """Every pointwise tensor of the metric on a batch of points."""

    points: np.ndarray
    mj: MetricJet = field(repr=False)
    h: np.ndarray
    hinv: np.ndarray
    Gamma4: np.ndarray  # Gamma^C_{AB}
    dGamma4: np.ndarray  # [n, C, A, B, D] = d_D Gamma^C_{AB}
    cGamma: np.ndarray  # [p, i, k]
    T: np.ndarray  # T^k_{ij}
    Ttr: np.ndarray  # T_i
    TtrBar: np.ndarray  # T_ibar
    R4: np.ndarray
    Ric4: np.ndarray
    Theta: np.ndarray
    Theta1: np.ndarray
    Theta1_logdet: np.ndarray
    Theta2: np.ndarray
    Theta4: np.ndarray
    M: np.ndarray  # Chern route
    M_lc: np.ndarray  # Levi-Civita route
    dTlow: np.ndarray  # [n, k, i, l, j] = d_j T_{k i lbar}
    TlowCh: np.ndarray  # [n, k, i, l, j] = nabla^ch_j T_{k i lbar}
    s: np.ndarray
    s_c: np.ndarray
    s_c2: np.ndarray
    s11: np.ndarray

    @property
    def Gamma(self) -> np.ndarray:
        """Gamma^k_{ij}, (N, 2, 2, 2)."""
        return self.Gamma4[:, 0:2, 0:2, 0:2]

    @property
    def GammaBar(self) -> np.ndarray:
        """Gamma^k_{ibar j}, indexed [k, i, j]."""
        return self.Gamma4[:, 0:2, 2:4, 0:2]

    @property
    def Rc(self) -> np.ndarray:
        """R_{i jbar k lbar}."""
        return self.R4[:, 0:2, 2:4, 0:2, 2:4]

    @property
    def Rh(self) -> np.ndarray:
        """R_{k i j lbar}."""
        return self.R4[:, 0:2, 0:2, 0:2, 2:4]

    @property
    def RicH(self) -> np.ndarray:
        """Ricci (1,1) block R_{i jbar}."""
        return self.Ric4[:, 0:2, 2:4]

    @property
    def RicHol(self) -> np.ndarray:
        """Ricci (2,0) block R_{ij}."""
        return self.Ric4[:, 0:2, 0:2]

    @property
    def n(self) -> int:
        return len(self.points)


def torsion_derivatives(mj: MetricJet, cg: Jet, T: Jet, Ttr: Jet):
    """M_{ij} by the Chern and Levi-Civita routes, plus nabla^ch T_{k i lbar}."""
    cgv = cg.val
    dTtr = Ttr.d[..., 0:2]  # [n, j, i] = d_i T_j
    # nabla^ch_i T_j = d_i T_j - cGamma^p_{ij} T_p
    nab = np.einsum("nji->nij", dTtr) - np.einsum("npij,np->nij", cgv, Ttr.val)
    M = nab + np.swapaxes(nab, 1, 2)
    # Levi-Civita: nabla_i T_j = d_i T_j - Gamma^C_{ij} T_C with T_C = (T, conj T)
    g4 = christoffel(mj)
    T4 = np.concatenate([Ttr.val, np.conj(Ttr.val)], axis=1)
    nab_lc = np.einsum("nji->nij", dTtr) - np.einsum("nCij,nC->nij", g4.val[:, :, 0:2, 0:2], T4)
    M_lc = nab_lc + np.swapaxes(nab_lc, 1, 2)
    # T_{k i lbar} = h_{s lbar} T^s_{ki} and its Chern derivative
    Tlow = jets.einsum("nsl,nski->nkil", mj.h.truncate(T.order), T)
    dTlow = Tlow.d[..., 0:2]  # [n, k, i, l, j]
    ch = (
        dTlow
        - np.einsum("nqjk,nqil->nkilj", cgv, Tlow.val)
        - np.einsum("nqji,nkql->nkilj", cgv, Tlow.val)
    )
    return M, M_lc, dTlow, ch, g4


def compute_frame(m: MetricField, p, check: bool = True, scale: float = 1.0) -> PointFrame:
    """Build the full :class:`PointFrame` at points ``p`` (N, 4)."""
    p = np.atleast_2d(np.asarray(p, dtype=complex))
    mj = metric_at(m, p, order=2, check=check, scale=scale)
    return frame_from_metric(mj, p)


def frame_from_metric(mj: MetricJet, p: np.ndarray) -> PointFrame:
    cg = chern_christoffel(mj)
    T, Ttr = torsion(mj, cg)
    M, M_lc, dTlow, TlowCh, g4 = torsion_derivatives(mj, cg, T, Ttr)
    R4, ric4 = riemann(mj, g4)
    theta = chern_curvature(mj)
    th1, th1_ld, th2, th4 = chern_ricci(mj, theta)
    hinv = mj.hinv.val
    ricH = ric4[:, 0:2, 2:4]
    s = np.einsum("nAB,nAB->n", mj.ginv4().val, ric4)
    return PointFrame(
        points=p,
        mj=mj,
        h=mj.h.val,
        hinv=hinv,
        Gamma4=g4.val,
        dGamma4=g4.d,
        cGamma=cg.val,
        T=T.val,
        Ttr=Ttr.val,
        TtrBar=np.conj(Ttr.val),
        R4=R4,
        Ric4=ric4,
        Theta=theta,
        Theta1=th1,
        Theta1_logdet=th1_ld,
        Theta2=th2,
        Theta4=th4,
        M=M,
        M_lc=M_lc,
        dTlow=dTlow,
        TlowCh=TlowCh,
        s=s,
        s_c=trace_w(th1, hinv),
        s_c2=trace_w(th2, hinv),
        s11=trace_w(ricH, hinv),
    )


# ---------------------------------------------------------------------------
# torsion covariants
# ---------------------------------------------------------------------------


def t_box_t(fr: PointFrame) -> np.ndarray:
    """(T box Tbar)_{i jbar} = h^{p qbar} h_{k lbar} T^k_{ip} conj(T^l_{jq})."""
    return np.einsum("npq,nkl,nkip,nljq->nij", fr.hinv, fr.h, fr.T, np.conj(fr.T))


def t_circ_t(fr: PointFrame) -> np.ndarray:
    """(T o Tbar)_{i jbar} = h^{p qbar} h^{s tbar} h_{k jbar} h_{i lbar} T^k_{sp} conj(T^l_{tq})."""
    return np.einsum(
        "npq,nst,nkj,nil,nksp,nltq->nij", fr.hinv, fr.hinv, fr.h, fr.h, fr.T, np.conj(fr.T), optimize=True
    )


def t_sharp(fr: PointFrame) -> np.ndarray:
    """Matrix of T((d* w)^#) = -2 sqrt(-1) h_{k jbar} T^k_{pi} h^{p sbar} Gamma^l_{sbar l} dz^i ^ dzb^j.

    Returned as the coefficient matrix a with T((d*w)^#) = sqrt(-1) a_{i jbar} dz^i ^ dzb^j.
    """
    gb = fr.GammaBar  # [k, s, j] = Gamma^k_{sbar j}
    tr = np.einsum("nlsl->ns", gb)  # sum_l Gamma^l_{sbar l}
    return -2 * np.einsum("nkj,nkpi,nps,ns->nij", fr.h, fr.T, fr.hinv, tr)


def r2_definitional(fr: PointFrame, ddstar_sum: np.ndarray) -> np.ndarray:
    """Second Ricci curvature of the induced Levi-Civita connection (matrix).

    ``ddstar_sum`` is the matrix of dd*w + dbar dbar* w.
    """
    return fr.Theta1 - 0.5 * ddstar_sum - 0.25 * t_circ_t(fr) + 0.25 * t_box_t(fr)
