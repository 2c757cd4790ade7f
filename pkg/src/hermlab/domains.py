"""Fundamental domains, quadrature and global integrals.

Two compact models are supported, each covered by a single chart:

* ``torus``: C^2 modulo a lattice, fundamental cell
  ``[0,p1) x [0,p2) x [0,p3) x [0,p4)`` in the real coordinates
  ``(x1, y1, x2, y2)``.
* ``hopf``: (C^2 minus 0) modulo ``z ~ 2z``, fundamental shell
  ``1 <= |z| <= 2`` with ``z1 = r cos(th) e^{i ph1}``, ``z2 = r sin(th) e^{i ph2}``.

Integrals are taken against omega^2/2, whose density relative to Lebesgue
measure is ``4 det h``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import roots_legendre
from scipy.stats import qmc

MAX_NODES = 5_000_000
DECK_TOL = 1e-9


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class DomainModel:
    kind: str
    periods: tuple = (1.0, 1.0, 1.0, 1.0)

    @classmethod
    def torus(cls, periods=(1.0, 1.0, 1.0, 1.0)) -> "DomainModel":
        periods = tuple(float(p) for p in periods)
        if len(periods) != 4 or min(periods) <= 0:
            raise ValueError("torus periods must be four positive reals")
        return cls("torus", periods)

    @classmethod
    def hopf(cls) -> "DomainModel":
        return cls("hopf")

    @property
    def lebesgue_volume(self) -> float:
        if self.kind == "torus":
            return float(np.prod(self.periods))
        return 15 * np.pi**2 / 2

    def contains(self, p, tol: float = 1e-12) -> bool:
        p = np.asarray(p, dtype=complex)
        if self.kind == "torus":
            return True
        r = np.sqrt(abs(p[0]) ** 2 + abs(p[1]) ** 2)
        return 1 - tol <= r <= 2 + tol

    def sample_points(self, n: int, seed: int = 0) -> np.ndarray:
        """Deterministic low-discrepancy interior points, shape ``(n, 4)``."""
        u = qmc.Halton(d=4, scramble=True, seed=seed).random(n)
        return self.chart(u)

    def chart(self, u: np.ndarray) -> np.ndarray:
        """Map unit-cube coordinates to honest points (z1, z2, zb1, zb2)."""
        if self.kind == "torus":
            x = u * np.asarray(self.periods)
            z1 = x[:, 0] + 1j * x[:, 1]
            z2 = x[:, 2] + 1j * x[:, 3]
        else:
            r = 1 + u[:, 0]
            t = u[:, 1]
            z1 = r * np.sqrt(1 - t) * np.exp(2j * np.pi * u[:, 2])
            z2 = r * np.sqrt(t) * np.exp(2j * np.pi * u[:, 3])
        return honest(z1, z2)

    def deck(self, p: np.ndarray, k: int = 0) -> np.ndarray:
        """Image of points under a deck transformation (k-th period for tori)."""
        p = np.asarray(p, dtype=complex)
        if self.kind == "hopf":
            return 2 * p
        shift = np.zeros(4, dtype=complex)
        axis, comp = divmod(k, 2)
        step = self.periods[k] * (1 if comp == 0 else 1j)
        shift[axis] = step
        shift[axis + 2] = np.conj(step)
        return p + shift


def honest(z1, z2) -> np.ndarray:
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    return np.stack([z1, z2, np.conj(z1), np.conj(z2)], axis=-1)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray  # (N, 4) honest points
    weights: np.ndarray  # (N,) Lebesgue weights
    resolution: int
    domain: DomainModel = field(repr=False)

    def __len__(self) -> int:
        return len(self.weights)


def build_rule(d: DomainModel, R: int, offset=None, max_nodes: int = MAX_NODES) -> QuadratureRule:
    """Tensor-product rule for the Lebesgue measure of the fundamental domain.

    torus: R^4 periodic trapezoid nodes.  hopf: Gauss-Legendre with R nodes in
    r and in t = sin^2(th) (the angular Jacobian sin cos dth = dt/2 is then
    polynomial), uniform 2R nodes in each phase.
    """
    if R < 2:
        raise ValueError("resolution R must be at least 2")
    n = R**4 if d.kind == "torus" else 4 * R**4
    if n > max_nodes:
        raise QuadratureError(f"rule with {n} nodes exceeds the cap of {max_nodes}")
    if d.kind == "torus":
        off = np.zeros(4) if offset is None else np.asarray(offset, dtype=float)
        axes = [off[a] + d.periods[a] * np.arange(R) / R for a in range(4)]
        x1, y1, x2, y2 = (g.ravel() for g in np.meshgrid(*axes, indexing="ij"))
        w = np.full(n, np.prod(d.periods) / n)
        nodes = honest(x1 + 1j * y1, x2 + 1j * y2)
        return QuadratureRule(nodes, w, R, d)
    x, wx = roots_legendre(R)
    r, wr = 1.5 + 0.5 * x, 0.5 * wx * (1.5 + 0.5 * x) ** 3
    t, wt = 0.5 + 0.5 * x, 0.5 * wx * 0.5
    ph = 2 * np.pi * np.arange(2 * R) / (2 * R)
    wph = np.full(2 * R, 2 * np.pi / (2 * R))
    R_, T_, P1, P2 = (g.ravel() for g in np.meshgrid(r, t, ph, ph, indexing="ij"))
    W = np.einsum("a,b,c,d->abcd", wr, wt, wph, wph).ravel()
    z1 = R_ * np.sqrt(1 - T_) * np.exp(1j * P1)
    z2 = R_ * np.sqrt(T_) * np.exp(1j * P2)
    return QuadratureRule(honest(z1, z2), W, R, d)


def pairwise_sum(x: np.ndarray) -> complex:
    """Sum along axis 0 in a fixed binary-tree order."""
    x = np.asarray(x)
    if x.shape[0] == 0:
        return np.zeros(x.shape[1:], dtype=x.dtype)
    while x.shape[0] > 1:
        if x.shape[0] % 2:
            x = np.concatenate([x, np.zeros((1,) + x.shape[1:], dtype=x.dtype)])
        x = x[0::2] + x[1::2]
    return x[0]


def thread_count(threads: Optional[int] = None) -> int:
    if threads:
        return max(1, int(threads))
    env = os.environ.get("HERMLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def map_chunks(func: Callable[[np.ndarray], dict], nodes: np.ndarray, chunk: int = 1024, threads=None) -> dict:
    """Evaluate ``func`` on node chunks and reassemble per-node arrays.

    The result does not depend on the number of workers: each chunk writes
    its own slice and no reduction happens here.
    """
    starts = list(range(0, len(nodes), chunk))
    nthreads = thread_count(threads)
    if nthreads == 1 or len(starts) == 1:
        parts = [func(nodes[s : s + chunk]) for s in starts]
    else:
        with ThreadPoolExecutor(nthreads) as pool:
            parts = list(pool.map(lambda s: func(nodes[s : s + chunk]), starts))
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def density(deth: np.ndarray) -> np.ndarray:
    """omega^2/2 relative to Lebesgue measure."""
    return 4 * np.real(deth)


def integrate(values: np.ndarray, rule: QuadratureRule, deth: np.ndarray) -> complex:
    """Integral of per-node ``values`` against omega^2/2.

    ``values`` may carry trailing axes (several integrands at once).
    """
    values = np.asarray(values)
    bad = ~np.isfinite(values)
    if np.any(bad):
        k = int(np.argwhere(bad)[0][0])
        raise FloatingPointError(f"non-finite integrand at node {k}: {rule.nodes[k, :2]}")
    w = rule.weights * density(deth)
    w = w.reshape(w.shape + (1,) * (values.ndim - 1))
    return pairwise_sum(values * w)


def integrate_field(func: Callable[[np.ndarray], np.ndarray], m, rule: QuadratureRule, threads=None) -> complex:
    """Integral of a pointwise scalar field (a callable on node batches)."""
    from .geometry import metric_at

    def chunk(p):
        return {"f": np.asarray(func(p)), "deth": metric_at(m, p, order=0).deth.val}

    data = map_chunks(chunk, rule.nodes, threads=threads)
    return integrate(data["f"], rule, data["deth"])


def volume(m, rule: QuadratureRule, threads=None) -> float:
    return float(np.real(integrate_field(lambda p: np.ones(len(p)), m, rule, threads)))


def global_inner(a, b, m, rule: QuadratureRule, threads=None) -> complex:
    """L^2 pairing ``(a, b) = int <a, b> omega^2/2`` of two form fields."""
    from . import forms
    from .geometry import metric_at

    def chunk(p):
        mj = metric_at(m, p, order=0)
        fa, fb = forms.as_values(a(p)), forms.as_values(b(p))
        return {"f": forms.inner(fa, fb, mj), "deth": mj.deth.val}

    if a.bidegree != b.bidegree:
        raise ValueError(f"bidegree mismatch: {a.bidegree} vs {b.bidegree}")
    data = map_chunks(chunk, rule.nodes, threads=threads)
    return integrate(data["f"], rule, data["deth"])


@dataclass
class DeckReport:
    passed: bool
    max_residual: float
    worst_point: np.ndarray
    n_samples: int


def deck_invariance_check(m, d: Optional[DomainModel] = None, n: int = 64, tol: float = DECK_TOL) -> DeckReport:
    """Check that omega descends to the quotient.

    torus: h(z + period) = h(z) for each of the four periods.  hopf: the
    pullback of omega under z -> 2z is omega, i.e. 4 h(2z) = h(z).  The
    residual is normalized by the larger of the two sides.
    """
    d = d or m.domain
    p = d.sample_points(n, seed=1)
    h = m.values_at(p)
    if d.kind == "hopf":
        images = [(4.0, d.deck(p))]
    else:
        images = [(1.0, d.deck(p, k)) for k in range(4)]
    worst, where = 0.0, p[0]
    for factor, q in images:
        hq = factor * m.values_at(q)
        diff = np.abs(hq - h).max(axis=(-2, -1))
        scale = np.maximum(np.abs(hq).max(axis=(-2, -1)), np.abs(h).max(axis=(-2, -1)))
        res = diff / np.maximum(scale, 1e-300)
        k = int(np.argmax(res))
        if res[k] > worst:
            worst, where = float(res[k]), p[k]
    return DeckReport(worst < tol, worst, where, n)
