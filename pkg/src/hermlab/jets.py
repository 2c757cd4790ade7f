"""Second-order Wirtinger jets.

A :class:`Jet` carries a complex array together with its first and second
derivatives in the four independent directions ``z1, z2, zb1, zb2``.  The
Hessian is stored packed (10 slots, upper triangle) so its symmetry is
structural.  All arithmetic is vectorized over the leading array shape, which
is how the geometry code evaluates whole quadrature batches at once.

Every jet also records the highest order it is exact to.  Differentiating a
jet (:meth:`Jet.diff`) shifts the slots down by one and lowers the order, so a
quantity assembled from first derivatives of the metric can still be
differentiated once more without re-differencing anything.
"""
from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

NDIR = 4
DIRECTIONS = ("z1", "z2", "zb1", "zb2")

PAIRS = [(i, j) for i in range(NDIR) for j in range(i, NDIR)]
_I = np.array([p[0] for p in PAIRS])
_J = np.array([p[1] for p in PAIRS])
PACK = np.zeros((NDIR, NDIR), dtype=int)
for _n, (_a, _b) in enumerate(PAIRS):
    PACK[_a, _b] = PACK[_b, _a] = _n

# z <-> zb direction swap used by conjugation at honest points
_SWAP = np.array([2, 3, 0, 1])
_SWAP_PACK = np.array([PACK[_SWAP[a], _SWAP[b]] for a, b in PAIRS])

DIV_FLOOR = 1e-300


class JetDomainError(ArithmeticError):
    """Raised for division by ~0 or evaluation on a branch cut."""


def _const_slots(c, order):
    c = np.asarray(c, dtype=complex)
    d = np.zeros(c.shape + (NDIR,), dtype=complex) if order >= 1 else None
    dd = np.zeros(c.shape + (len(PAIRS),), dtype=complex) if order >= 2 else None
    return c, d, dd


class Jet:
    """Truncated Taylor expansion in the four Wirtinger directions.

    ``val`` has shape ``S``; ``d`` has shape ``S + (4,)`` and ``dd`` has shape
    ``S + (10,)``.  ``order`` is 2, 1 or 0; slots above the order are ``None``.
    """

    __slots__ = ("val", "d", "dd", "order")
    __array_priority__ = 100

    def __init__(self, val, d=None, dd=None, order=2):
        self.val = np.asarray(val, dtype=complex)
        self.order = order
        self.d = d if order >= 1 else None
        self.dd = dd if order >= 2 else None
        if order >= 1 and d is None:
            raise ValueError("order >= 1 jet needs first derivatives")
        if order >= 2 and dd is None:
            raise ValueError("order 2 jet needs second derivatives")

    # -- construction -----------------------------------------------------
    @classmethod
    def const(cls, c, order=2) -> "Jet":
        return cls(*_const_slots(c, order), order=order)

    @classmethod
    def variable(cls, k: int, value) -> "Jet":
        return seed(k, value)

    @staticmethod
    def stack(jets: Sequence["Jet"], axis: int = 0) -> "Jet":
        jets = [as_jet(j) for j in jets]
        order = min(j.order for j in jets)
        ndim = np.broadcast_shapes(*(j.val.shape for j in jets))
        jets = [j.broadcast_to(ndim) for j in jets]
        if axis < 0:
            axis = len(ndim) + 1 + axis
        val = np.stack([j.val for j in jets], axis=axis)
        d = np.stack([j.d for j in jets], axis=axis) if order >= 1 else None
        dd = np.stack([j.dd for j in jets], axis=axis) if order >= 2 else None
        return Jet(val, d, dd, order)

    @staticmethod
    def concat(jets: Sequence["Jet"], axis: int = 0) -> "Jet":
        jets = [as_jet(j) for j in jets]
        order = min(j.order for j in jets)
        ndim = jets[0].val.ndim
        if axis < 0:
            axis += ndim
        val = np.concatenate([j.val for j in jets], axis=axis)
        d = np.concatenate([j.d for j in jets], axis=axis) if order >= 1 else None
        dd = np.concatenate([j.dd for j in jets], axis=axis) if order >= 2 else None
        return Jet(val, d, dd, order)

    def broadcast_to(self, shape) -> "Jet":
        shape = tuple(shape)
        if self.d is not None and self.d.shape[:-1] == shape or self.order == 0 and self.val.shape == shape:
            return self
        val = np.broadcast_to(self.val, shape)
        d = np.broadcast_to(self.d, shape + (NDIR,)) if self.order >= 1 else None
        dd = np.broadcast_to(self.dd, shape + (len(PAIRS),)) if self.order >= 2 else None
        return Jet(val, d, dd, self.order)

    # -- views ------------------------------------------------------------
    @property
    def shape(self):
        return self.val.shape

    @property
    def ndim(self):
        return self.val.ndim

    def hessian(self) -> np.ndarray:
        """Unpacked symmetric 4x4 Hessian, shape ``S + (4, 4)``."""
        if self.order < 2:
            raise ValueError("jet carries no second derivatives")
        return self.dd[..., PACK]

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.val, self.d, self.dd, order)

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        slot_key = key + (slice(None),)
        return Jet(
            self.val[key],
            self.d[slot_key] if self.order >= 1 else None,
            self.dd[slot_key] if self.order >= 2 else None,
            self.order,
        )

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.val.shape}, val={self.val!r})"

    def sum(self, axis) -> "Jet":
        if axis < 0:
            axis += self.val.ndim
        return Jet(
            self.val.sum(axis=axis),
            self.d.sum(axis=axis) if self.order >= 1 else None,
            self.dd.sum(axis=axis) if self.order >= 2 else None,
            self.order,
        )

    def moveaxis(self, src: int, dst: int) -> "Jet":
        n = self.val.ndim
        src, dst = src % n, dst % n
        return Jet(
            np.moveaxis(self.val, src, dst),
            np.moveaxis(self.d, src, dst) if self.order >= 1 else None,
            np.moveaxis(self.dd, src, dst) if self.order >= 2 else None,
            self.order,
        )

    # -- calculus ---------------------------------------------------------
    def diff(self, k: int) -> "Jet":
        """Derivative in direction ``k`` as a jet of one order less."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        val = self.d[..., k]
        d = self.dd[..., PACK[k]] if self.order >= 2 else None
        return Jet(val, d, None, self.order - 1)

    def grad(self) -> "Jet":
        """All four derivatives stacked on a new trailing axis."""
        return Jet.stack([self.diff(k) for k in range(NDIR)], axis=-1)

    def conj(self) -> "Jet":
        """Complex conjugate, valid where zb is the conjugate of z."""
        return Jet(
            np.conj(self.val),
            np.conj(self.d[..., _SWAP]) if self.order >= 1 else None,
            np.conj(self.dd[..., _SWAP_PACK]) if self.order >= 2 else None,
            self.order,
        )

    # -- arithmetic -------------------------------------------------------
    def __neg__(self):
        return Jet(-self.val, _neg(self.d), _neg(self.dd), self.order)

    def __add__(self, other):
        if not isinstance(other, Jet):
            val = self.val + other
            return Jet(val, self.d, self.dd, self.order).broadcast_to(val.shape)
        o = min(self.order, other.order)
        return Jet(
            self.val + other.val,
            self.d + other.d if o >= 1 else None,
            self.dd + other.dd if o >= 2 else None,
            o,
        )

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other)
            cs = c[..., None]
            return Jet(
                self.val * c,
                self.d * cs if self.order >= 1 else None,
                self.dd * cs if self.order >= 2 else None,
                self.order,
            )
        a, b = self, other
        o = min(a.order, b.order)
        val = a.val * b.val
        d = dd = None
        if o >= 1:
            av, bv = a.val[..., None], b.val[..., None]
            d = a.d * bv + av * b.d
            if o >= 2:
                dd = (
                    a.dd * bv
                    + av * b.dd
                    + a.d[..., _I] * b.d[..., _J]
                    + a.d[..., _J] * b.d[..., _I]
                )
        return Jet(val, d, dd, o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=complex))
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, n):
        return powi(self, n)


def _neg(x):
    return None if x is None else -x


def as_jet(x) -> Jet:
    if isinstance(x, Jet):
        return x
    return Jet.const(x, order=2)


def seed(k: int, value) -> Jet:
    """Independent variable in direction ``k`` taking ``value``."""
    if not 0 <= k < NDIR:
        raise IndexError(f"direction index {k} out of range 0..3")
    val = np.asarray(value, dtype=complex)
    val, d, dd = _const_slots(val, 2)
    d[..., k] = 1.0
    return Jet(val, d, dd, 2)


def lift(a: Jet, f, f1, f2) -> Jet:
    """Compose ``a`` with a scalar function given its value and derivatives."""
    a = as_jet(a)
    x = a.val
    val = f(x)
    d = dd = None
    if a.order >= 1:
        g1 = f1(x)[..., None]
        d = g1 * a.d
        if a.order >= 2:
            g2 = f2(x)[..., None]
            dd = g1 * a.dd + g2 * a.d[..., _I] * a.d[..., _J]
    return Jet(val, d, dd, a.order)


def _check_nonzero(x):
    if np.any(np.abs(x) < DIV_FLOOR):
        raise JetDomainError("division by a value with modulus below 1e-300")


def _check_branch(x, name):
    x = np.asarray(x)
    bad = (x.real <= 0) & (np.abs(x.imag) <= 1e-14 * np.maximum(np.abs(x), DIV_FLOOR))
    if np.any(bad):
        worst = x[bad].flat[0]
        raise JetDomainError(f"{name} evaluated on its branch cut at {worst!r}")


def reciprocal(a: Jet) -> Jet:
    a = as_jet(a)
    _check_nonzero(a.val)
    return lift(a, lambda x: 1.0 / x, lambda x: -1.0 / x**2, lambda x: 2.0 / x**3)


def exp(a):
    return lift(a, np.exp, np.exp, np.exp)


def log(a):
    a = as_jet(a)
    _check_branch(a.val, "log")
    return lift(a, np.log, lambda x: 1.0 / x, lambda x: -1.0 / x**2)


def sqrt(a):
    a = as_jet(a)
    _check_branch(a.val, "sqrt")
    return lift(
        a,
        np.sqrt,
        lambda x: 0.5 / np.sqrt(x),
        lambda x: -0.25 / (x * np.sqrt(x)),
    )


def sin(a):
    return lift(a, np.sin, np.cos, lambda x: -np.sin(x))


def cos(a):
    return lift(a, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x))


def powi(a, n: int) -> Jet:
    if int(n) != n:
        raise ValueError("jet powers must be integers")
    n = int(n)
    a = as_jet(a)
    if n == 0:
        return Jet.const(np.ones_like(a.val), order=a.order)
    if n < 0:
        _check_nonzero(a.val)
    return lift(
        a,
        lambda x: x**n,
        lambda x: n * x ** (n - 1),
        lambda x: n * (n - 1) * x ** (n - 2) if n != 1 else np.zeros_like(x),
    )


LIFTS: dict[str, Callable[[Jet], Jet]] = {
    "exp": exp,
    "log": log,
    "sin": sin,
    "cos": cos,
    "sqrt": sqrt,
}


def arith(a, b, op: str) -> Jet:
    a, b = as_jet(a), as_jet(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown jet operation {op!r}")


def einsum(subscripts: str, *operands) -> Jet:
    """``np.einsum`` with the product rule applied to jet operands.

    Plain arrays are treated as constants.  The derivative slot axis is
    appended to every jet operand and to the output.
    """
    if "Z" in subscripts:
        raise ValueError("'Z' is reserved for the derivative axis")
    ins, out = subscripts.split("->")
    ins = ins.split(",")
    jets = [i for i, op in enumerate(operands) if isinstance(op, Jet)]
    order = min((operands[i].order for i in jets), default=2)
    vals = [op.val if isinstance(op, Jet) else np.asarray(op) for op in operands]
    val = np.einsum(subscripts, *vals, optimize=True)
    if not jets:
        return Jet.const(val, order)

    def _run(replaced: dict[int, np.ndarray]):
        subs = [s + "Z" if i in replaced else s for i, s in enumerate(ins)]
        ops = [replaced.get(i, v) for i, v in enumerate(vals)]
        return np.einsum(",".join(subs) + "->" + out + "Z", *ops, optimize=False)

    d = dd = None
    if order >= 1:
        d = sum(_run({i: operands[i].d}) for i in jets)
        if order >= 2:
            dd = sum(_run({i: operands[i].dd}) for i in jets)
            for i, k in itertools.combinations(jets, 2):
                di, dk = operands[i].d, operands[k].d
                dd = dd + _run({i: di[..., _I], k: dk[..., _J]})
                dd = dd + _run({i: di[..., _J], k: dk[..., _I]})
    return Jet(val, d, dd, order)


def linear(a: Jet, mat: np.ndarray) -> Jet:
    """Apply a constant matrix along the last value axis: ``out_c = mat[c, a] x_a``."""
    mat = np.asarray(mat)
    return Jet(
        a.val @ mat.T,
        np.einsum("...aZ,ca->...cZ", a.d, mat) if a.order >= 1 else None,
        np.einsum("...aZ,ca->...cZ", a.dd, mat) if a.order >= 2 else None,
        a.order,
    )


# ---------------------------------------------------------------------------
# finite-difference oracle
# ---------------------------------------------------------------------------

# Wirtinger operators in terms of real partials (x1, y1, x2, y2)
_WIRT = 0.5 * np.array(
    [
        [1, -1j, 0, 0],
        [0, 0, 1, -1j],
        [1, 1j, 0, 0],
        [0, 0, 1, 1j],
    ]
)


def _real_to_point(r):
    z1 = r[..., 0] + 1j * r[..., 1]
    z2 = r[..., 2] + 1j * r[..., 3]
    return np.stack([z1, z2, np.conj(z1), np.conj(z2)], axis=-1)


def _real_partials(func, r0, multi, h):
    """Central difference of ``func`` in real coordinates ``multi`` (len 1 or 2)."""
    e = np.eye(4)

    def f(dr):
        return func(_real_to_point(r0 + dr))

    if len(multi) == 1:
        a = multi[0]
        return (f(h * e[a]) - f(-h * e[a])) / (2 * h)
    a, b = multi
    if a == b:
        return (f(h * e[a]) - 2 * f(0 * e[a]) + f(-h * e[a])) / h**2
    return (
        f(h * e[a] + h * e[b])
        - f(h * e[a] - h * e[b])
        - f(-h * e[a] + h * e[b])
        + f(-h * e[a] - h * e[b])
    ) / (4 * h**2)


def fd_oracle(func, p, multiindex: Sequence[int], step: float = 1e-4, richardson: bool = False):
    """Central-difference estimate of a Wirtinger derivative.

    ``func`` maps points of shape ``(..., 4)`` (z1, z2, zb1, zb2) to complex
    values; it may be an ``Expr`` (evaluated through :func:`hermlab.expr.evaluate`)
    or any vectorized callable.  ``p`` must satisfy ``zb = conj(z)``.  The
    derivative is formed in real coordinates and recombined with
    d/dz = (d/dx - i d/dy)/2, d/dzb = (d/dx + i d/dy)/2.
    """
    if not 1e-6 <= step <= 1e-2:
        raise ValueError("step must lie in [1e-6, 1e-2]")
    if not callable(func):
        from .expr import evaluate

        expr = func
        func = lambda pts: evaluate(expr, pts)  # noqa: E731
    p = np.asarray(p, dtype=complex)
    r0 = np.array([p[0].real, p[0].imag, p[1].real, p[1].imag])
    multi = tuple(multiindex)
    if len(multi) == 0:
        return complex(func(p))
    if len(multi) > 2:
        raise ValueError("oracle supports derivatives up to order 2")

    def estimate(h):
        total = 0j
        if len(multi) == 1:
            w = _WIRT[multi[0]]
            for a in range(4):
                if w[a] != 0:
                    total += w[a] * _real_partials(func, r0, (a,), h)
            return total
        wa, wb = _WIRT[multi[0]], _WIRT[multi[1]]
        for a in range(4):
            for b in range(4):
                c = wa[a] * wb[b]
                if c != 0:
                    total += c * _real_partials(func, r0, (a, b), h)
        return total

    try:
        if richardson:
            return (4 * estimate(step / 2) - estimate(step)) / 3
        return estimate(step)
    except JetDomainError as exc:
        raise JetDomainError(f"evaluation failed inside the stencil: {exc}") from exc
