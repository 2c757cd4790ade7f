"""Metric-component expressions in z1, z2, zb1, zb2.

Grammar (lowest to highest binding)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' INT)*
    atom   := NUMBER | NUMBER 'i' | 'i' | 'pi' | VAR | FUNC '(' expr ')' | '(' expr ')'

``zb1``/``zb2`` are independent variables, not conjugation operators; the
realness of a metric is checked numerically at honest points instead.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from . import jets
from .jets import Jet

VARIABLES = ("z1", "z2", "zb1", "zb2")
FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")


class ExprError(ValueError):
    """Base class for expression and metric-file errors."""


class LexError(ExprError):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class ArityError(ParseError):
    pass


class HermitianError(ExprError):
    pass


class PositivityError(ExprError):
    pass


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if self.name not in VARIABLES:
            raise ExprError(f"unknown variable {self.name!r}")


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Pow, Call]


# ---------------------------------------------------------------------------
# lexer / parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def tokenize(source: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise LexError(f"unexpected character {source[pos]!r} at position {pos}")
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(source)))
    return toks


class _Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.tok
        if t.text != text:
            where = "end of input" if t.kind == "end" else repr(t.text)
            raise ParseError(f"expected {text!r}, found {where}", t.pos)
        return self.take()

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected token {self.tok.text!r}", self.tok.pos)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take().text
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.tok.text == "-":
            self.take()
            arg = self.unary()
            if isinstance(arg, Num):  # negative literals stay literals
                return Num(-arg.value + 0)
            return Neg(arg)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        while self.tok.text == "^":
            self.take()
            sign = 1
            if self.tok.text == "-":
                self.take()
                sign = -1
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                raise ParseError("exponent must be an integer literal", t.pos)
            self.take()
            base = Pow(base, sign * int(t.text))
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.take()
            value = float(t.text)
            if self.tok.kind == "name" and self.tok.text == "i" and self.tok.pos == t.pos + len(t.text):
                self.take()
                return Num(complex(0.0, value))
            return Num(complex(value))
        if t.kind == "name":
            self.take()
            if t.text == "i":
                return Num(1j)
            if t.text == "pi":
                return Num(complex(np.pi))
            if t.text in VARIABLES:
                return Var(t.text)
            if t.text in FUNCTIONS:
                if self.tok.text != "(":
                    raise ArityError(f"function {t.text!r} needs one parenthesized argument", self.tok.pos)
                self.take()
                if self.tok.text == ")":
                    raise ArityError(f"function {t.text!r} takes exactly one argument, got 0", self.tok.pos)
                arg = self.expr()
                if self.tok.text == ",":
                    raise ArityError(f"function {t.text!r} takes exactly one argument", self.tok.pos)
                self.expect(")")
                return Call(t.text, arg)
            raise LexError(f"unknown identifier {t.text!r} at position {t.pos}")
        if t.text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        where = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(f"unexpected {where}", t.pos)


def parse(source: str) -> Expr:
    """Parse an expression string into an AST."""
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# unparser
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_num(c: complex, ctx: int = 0) -> str:
    c = complex(c) + 0  # no negative zeros in the printed form
    if c.imag == 0:
        return repr(float(c.real)) if c.real >= 0 else f"({float(c.real)!r})"
    if c.real == 0:
        return f"{float(c.imag)!r}i" if c.imag >= 0 else f"(-{float(-c.imag)!r}i)"
    s = f"{_fmt_num(complex(c.real))} + {_fmt_num(complex(0, c.imag))}"
    return f"({s})" if ctx > 1 else s


def unparse(e: Expr) -> str:
    """Render an AST back to source.

    ``parse(unparse(e))`` evaluates like ``e`` and ``unparse`` of it returns
    the same text, so the printed form is canonical.
    """
    return _unparse(e, 0)


def _unparse(e: Expr, ctx: int) -> str:
    if isinstance(e, Num):
        return _fmt_num(e.value, ctx)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({_unparse(e.arg, 0)})"
    if isinstance(e, Pow):
        return f"{_unparse(e.base, 4)}^{e.exponent}"
    if isinstance(e, Neg):
        inner, sign = e.arg, -1
        while isinstance(inner, Neg):
            inner, sign = inner.arg, -sign
        if isinstance(inner, Num):  # mirrors the parser's literal folding
            return _fmt_num(sign * inner.value, ctx)
        s = "-" + _unparse(e.arg, 3)
        return f"({s})" if ctx > 3 else s
    p = _PREC[e.op]
    s = f"{_unparse(e.left, p)} {e.op} {_unparse(e.right, p + 1)}"
    return f"({s})" if ctx > p else s


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _points(p) -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    if p.shape[-1] != 4:
        raise ValueError("points must have a trailing axis of length 4 (z1, z2, zb1, zb2)")
    return p


def eval_jet(e: Expr, p) -> Jet:
    """Value and Wirtinger derivatives (to order 2) of ``e`` at points ``p``."""
    p = _points(p)
    env = {name: jets.seed(k, p[..., k]) for k, name in enumerate(VARIABLES)}
    return _eval(e, env, jet=True)


def evaluate(e: Expr, p) -> np.ndarray:
    """Plain complex values of ``e`` at points ``p`` (shape ``(..., 4)``)."""
    p = _points(p)
    env = {name: p[..., k] for k, name in enumerate(VARIABLES)}
    return np.asarray(_eval(e, env, jet=False), dtype=complex) + np.zeros(p.shape[:-1])


_NUMPY_FUNCS = {"exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos, "sqrt": np.sqrt}


def _eval(e: Expr, env, jet: bool):
    if isinstance(e, Num):
        return Jet.const(e.value) if jet else e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return -_eval(e.arg, env, jet)
    if isinstance(e, Pow):
        base = _eval(e.base, env, jet)
        if jet:
            return jets.powi(base, e.exponent)
        base = np.asarray(base, dtype=complex)
        if e.exponent < 0:
            jets._check_nonzero(base)
        return base ** e.exponent
    if isinstance(e, Call):
        arg = _eval(e.arg, env, jet)
        if jet:
            return jets.LIFTS[e.func](arg)
        if e.func in ("log", "sqrt"):
            jets._check_branch(arg, e.func)
        return _NUMPY_FUNCS[e.func](np.asarray(arg, dtype=complex))
    a = _eval(e.left, env, jet)
    b = _eval(e.right, env, jet)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if jet:
        return a / b if isinstance(b, Jet) else a * (1.0 / b)
    jets._check_nonzero(b)
    return np.asarray(a, dtype=complex) / b


def variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, (Neg, Call)):
        return variables(e.arg)
    if isinstance(e, Pow):
        return variables(e.base)
    return variables(e.left) | variables(e.right)


def substitute(e: Expr, mapping: dict[str, Expr]) -> Expr:
    """Replace variables by expressions (used for linear coordinate changes)."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Num):
        return e
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping))
    if isinstance(e, Call):
        return Call(e.func, substitute(e.arg, mapping))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, mapping), e.exponent)
    return BinOp(e.op, substitute(e.left, mapping), substitute(e.right, mapping))


# ---------------------------------------------------------------------------
# metric fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricField:
    """Components h_{i jbar} of omega = sqrt(-1) h_{i jbar} dz^i ^ dzb^j."""

    name: str
    domain: "object"  # hermlab.domains.DomainModel
    h11: Expr
    h12: Expr
    h21: Expr
    h22: Expr
    source: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def components(self) -> tuple[Expr, Expr, Expr, Expr]:
        return (self.h11, self.h12, self.h21, self.h22)

    def jets_at(self, p) -> Jet:
        """Jets of the component matrix, shape ``(..., 2, 2)``."""
        c = [eval_jet(e, p) for e in self.components]
        shape = np.broadcast_shapes(*(j.shape for j in c), np.asarray(p).shape[:-1])
        c = [j.broadcast_to(shape) for j in c]
        row0 = Jet.stack([c[0], c[1]], axis=-1)
        row1 = Jet.stack([c[2], c[3]], axis=-1)
        return Jet.stack([row0, row1], axis=-2)

    def values_at(self, p) -> np.ndarray:
        p = _points(p)
        vals = [evaluate(e, p) for e in self.components]
        return np.stack([np.stack(vals[:2], -1), np.stack(vals[2:], -1)], -2)

    def to_toml(self) -> str:
        lines = [
            "[metric]",
            f'name = "{self.name}"',
            f'domain = "{self.domain.kind}"',
        ]
        for key, e in zip(("h11", "h12", "h21", "h22"), self.components):
            lines.append(f'{key} = "{self.source.get(key, unparse(e))}"')
        if self.domain.kind == "torus":
            periods = ", ".join(repr(float(x)) for x in self.domain.periods)
            lines += ["", "[torus]", f"periods = [{periods}]"]
        return "\n".join(lines) + "\n"


def validate_metric(m: MetricField, points: np.ndarray, tol: float = 1e-8) -> None:
    """Raise if ``m`` is not Hermitian positive definite at ``points``."""
    h = m.values_at(points)
    scale = np.maximum(1.0, np.abs(h).max(axis=(-2, -1)))
    viol = np.stack(
        [
            np.abs(h[..., 1, 0] - np.conj(h[..., 0, 1])),
            np.abs(h[..., 0, 0].imag),
            np.abs(h[..., 1, 1].imag),
        ],
        axis=-1,
    ).max(axis=-1) / scale
    k = int(np.argmax(viol))
    if viol[k] > tol:
        raise HermitianError(
            f"metric {m.name!r} is not Hermitian: violation {viol[k]:.3e} at point {points[k, :2]}"
        )
    det = (h[..., 0, 0] * h[..., 1, 1] - h[..., 0, 1] * h[..., 1, 0]).real
    bad = (h[..., 0, 0].real <= 0) | (det <= 0)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise PositivityError(
            f"metric {m.name!r} is not positive definite at point {points[k, :2]} "
            f"(h11={h[k, 0, 0].real:.3e}, det={det[k]:.3e})"
        )


def _read_toml(text: str) -> dict:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ExprError(f"malformed metric file: {exc}") from exc


def metric_from_dict(data: dict, n_samples: int = 64) -> MetricField:
    from .domains import DomainModel

    try:
        sec = data["metric"]
        kind = sec["domain"]
        src = {k: str(sec[k]) for k in ("h11", "h12", "h21", "h22")}
    except KeyError as exc:
        raise ExprError(f"metric file is missing key {exc.args[0]!r}") from exc
    if kind == "torus":
        periods = tuple(data.get("torus", {}).get("periods", (1.0, 1.0, 1.0, 1.0)))
        domain = DomainModel.torus(periods)
    elif kind == "hopf":
        domain = DomainModel.hopf()
    else:
        raise ExprError(f"unknown domain {kind!r}; expected 'torus' or 'hopf'")
    parsed = {k: parse(v) for k, v in src.items()}
    m = MetricField(sec.get("name", "unnamed"), domain, source=src, **parsed)
    validate_metric(m, domain.sample_points(n_samples))
    return m


def load_metric(path_or_text: Union[str, Path], n_samples: int = 64) -> MetricField:
    """Load and validate a TOML metric file (or TOML text)."""
    if isinstance(path_or_text, Path) or (isinstance(path_or_text, str) and "\n" not in path_or_text and "[metric]" not in path_or_text):
        text = Path(path_or_text).read_text(encoding="utf-8")
    else:
        text = path_or_text
    return metric_from_dict(_read_toml(text), n_samples=n_samples)
