"""Built-in metrics and simple transformations of metric files."""
from __future__ import annotations

import numpy as np

from .expr import BinOp, MetricField, Num, load_metric, parse, substitute, unparse

GALLERY_IDS = ("torus_flat", "torus_conformal", "hopf_standard")
DEFAULT_EPS = 0.1

_TEMPLATES = {
    "torus_flat": ("torus", "1", "0", "0", "1"),
    "torus_conformal": ("torus", "exp({eps}*cos(pi*(z1+zb1)))", "0", "0", "exp({eps}*cos(pi*(z1+zb1)))"),
    "hopf_standard": ("hopf", "1/(z1*zb1+z2*zb2)", "0", "0", "1/(z1*zb1+z2*zb2)"),
}


def gallery_toml(name: str, eps: float = DEFAULT_EPS) -> str:
    """Metric file text for a gallery entry."""
    if name not in _TEMPLATES:
        raise KeyError(f"unknown gallery id {name!r}; choose from {', '.join(GALLERY_IDS)}")
    domain, *comps = _TEMPLATES[name]
    comps = [c.format(eps=repr(float(eps))) for c in comps]
    lines = ["[metric]", f'name = "{name}"', f'domain = "{domain}"']
    lines += [f'{k} = "{v}"' for k, v in zip(("h11", "h12", "h21", "h22"), comps)]
    if domain == "torus":
        lines += ["", "[torus]", "periods = [1.0, 1.0, 1.0, 1.0]"]
    return "\n".join(lines) + "\n"


def gallery_metric(name: str, eps: float = DEFAULT_EPS) -> MetricField:
    return load_metric(gallery_toml(name, eps))


def _cnum(c: complex):
    return Num(complex(c))


def linear_pullback(m: MetricField, A) -> MetricField:
    """Pullback of the metric under z -> A z (A a constant invertible 2x2 matrix).

    h'_{k lbar}(z) = A_{ik} h_{i jbar}(A z) conj(A_{jl}).  The result is a
    pointwise object; its periods are those of the pulled-back lattice.
    """
    A = np.asarray(A, dtype=complex)
    if abs(np.linalg.det(A)) < 1e-12:
        raise ValueError("linear change of coordinates must be invertible")
    z = [parse("z1"), parse("z2")]
    zb = [parse("zb1"), parse("zb2")]
    mapping = {}
    for i in range(2):
        mapping[f"z{i + 1}"] = BinOp("+", BinOp("*", _cnum(A[i, 0]), z[0]), BinOp("*", _cnum(A[i, 1]), z[1]))
        mapping[f"zb{i + 1}"] = BinOp(
            "+", BinOp("*", _cnum(np.conj(A[i, 0])), zb[0]), BinOp("*", _cnum(np.conj(A[i, 1])), zb[1])
        )
    h = [[substitute(e, mapping) for e in row] for row in ((m.h11, m.h12), (m.h21, m.h22))]
    out = []
    for k in range(2):
        for l in range(2):
            acc = None
            for i in range(2):
                for j in range(2):
                    coef = A[i, k] * np.conj(A[j, l])
                    if coef == 0 or (isinstance(h[i][j], Num) and h[i][j].value == 0):
                        continue
                    term = BinOp("*", _cnum(coef), h[i][j])
                    acc = term if acc is None else BinOp("+", acc, term)
            out.append(acc if acc is not None else Num(0j))
    src = {key: unparse(e) for key, e in zip(("h11", "h12", "h21", "h22"), out)}
    return MetricField(f"{m.name}_pullback", m.domain, *out, source=src)


def rescaled(m: MetricField, lam: float) -> MetricField:
    """The metric lam * h."""
    comps = [BinOp("*", Num(complex(lam)), e) for e in m.components]
    src = {key: unparse(e) for key, e in zip(("h11", "h12", "h21", "h22"), comps)}
    return MetricField(f"{m.name}_x{lam:g}", m.domain, *comps, source=src)
