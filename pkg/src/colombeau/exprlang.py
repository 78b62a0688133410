"""Small expression language for naming generalized functions.

Grammar (D binds tightest, then '*', then '+'/'-'; '-' desugars to adding
a (-1)-scalar multiple)::

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := NUMBER | atom | 'D' ('^'? INT)? '(' expr ')' | '(' expr ')'
    atom   := 'delta' | 'heaviside' | 'nullex'
            | 'bar' '(' IDENT ')' | 'tilde' '(' IDENT ')'

Identifiers are resolved against a registry of named smooth functions; the
parser is a hand-written recursive descent so diagnostics can carry byte
offsets and name suggestions.
"""

from __future__ import annotations

import difflib
import re
from dataclasses import dataclass, field

from . import genfunc
from .jets import (
    Exponential,
    Gaussian,
    Polynomial,
    Sine,
    SmoothPrimitive,
    TanhScaled,
)

_CONST_ONE = Polynomial((1.0,))


class ParseError(Exception):
    """Syntax or name-resolution failure with a byte offset into the input."""

    def __init__(self, message: str, text: str, pos: int):
        self.offset = len(text[:pos].encode("utf-8"))
        super().__init__(f"{message} (at byte offset {self.offset})")


# ---------------------------------------------------------------------------
# AST

class Expr:
    pass


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Delta(Expr):
    pass


@dataclass(frozen=True)
class Heaviside(Expr):
    pass


@dataclass(frozen=True)
class NullEx(Expr):
    pass


@dataclass(frozen=True)
class BarRef(Expr):
    name: str
    prim: SmoothPrimitive


@dataclass(frozen=True)
class TildeRef(Expr):
    name: str
    prim: SmoothPrimitive


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Deriv(Expr):
    order: int
    child: Expr


# ---------------------------------------------------------------------------
# registry

@dataclass
class FunctionRegistry:
    """Case-sensitive name -> smooth primitive bindings."""

    entries: dict[str, SmoothPrimitive] = field(default_factory=dict)

    @classmethod
    def default(cls) -> "FunctionRegistry":
        return cls(
            {
                "tanh10": TanhScaled(10.0),
                "sin": Sine(),
                "exp": Exponential(),
                "gauss": Gaussian(),
                "poly": Polynomial((0.0, 1.0)),
            }
        )

    def register(self, name: str, prim: SmoothPrimitive) -> None:
        self.entries[name] = prim

    def get(self, name: str) -> SmoothPrimitive | None:
        return self.entries.get(name)

    def close_matches(self, name: str) -> list[str]:
        return difflib.get_close_matches(name, self.entries.keys(), n=3)

    def name_of(self, prim: SmoothPrimitive) -> str:
        for name, p in self.entries.items():
            if p == prim:
                return name
        raise KeyError(f"no registered name for {prim!r}")


# ---------------------------------------------------------------------------
# scanner

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>[+\-*()^]))"
)

_ATOMS = ("delta", "heaviside", "nullex")


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num' | 'ident' | 'sym' | 'end'
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad = len(text) - len(stripped)
            raise ParseError(f"unexpected character {text[bad]!r}", text, bad)
        for kind in ("num", "ident", "sym"):
            if m.group(kind) is not None:
                tokens.append(_Token(kind, m.group(kind), m.start(kind)))
                break
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, registry: FunctionRegistry):
        self.text = text
        self.registry = registry
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_sym(self, sym: str) -> _Token:
        tok = self.peek()
        if tok.kind != "sym" or tok.text != sym:
            what = f"{tok.text!r}" if tok.kind != "end" else "end of input"
            msg = f"expected {sym!r}, found {what}"
            if sym == ")":
                msg = f"unbalanced parentheses: {msg}"
            raise ParseError(msg, self.text, tok.pos)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            if tok.kind == "sym" and tok.text == ")":
                raise ParseError("unbalanced parentheses: unmatched ')'", self.text, tok.pos)
            raise ParseError(f"unexpected trailing input {tok.text!r}", self.text, tok.pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().kind == "sym" and self.peek().text in "+-":
            op = self.advance().text
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek().kind == "sym" and self.peek().text == "*":
            self.advance()
            e = Mul(e, self.factor())
        return e

    def factor(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "sym" and tok.text == "(":
            self.advance()
            e = self.expr()
            self.expect_sym(")")
            return e
        if tok.kind == "ident":
            return self.named(self.advance())
        what = f"{tok.text!r}" if tok.kind != "end" else "end of input"
        raise ParseError(f"expected a factor, found {what}", self.text, tok.pos)

    def named(self, tok: _Token) -> Expr:
        name = tok.text
        m = re.fullmatch(r"D(\d*)", name)
        if m is not None:
            order = int(m.group(1)) if m.group(1) else None
            if order is None and self.peek().kind == "sym" and self.peek().text == "^":
                self.advance()
                otok = self.peek()
                if otok.kind != "num" or not otok.text.isdigit():
                    raise ParseError("expected an integer derivative order after '^'",
                                     self.text, otok.pos)
                order = int(self.advance().text)
            self.expect_sym("(")
            child = self.expr()
            self.expect_sym(")")
            return Deriv(order if order is not None else 1, child)
        if name in _ATOMS:
            return {"delta": Delta, "heaviside": Heaviside, "nullex": NullEx}[name]()
        if name in ("bar", "tilde"):
            self.expect_sym("(")
            itok = self.peek()
            if itok.kind != "ident":
                raise ParseError(f"expected a function name inside {name}(...)",
                                 self.text, itok.pos)
            self.advance()
            prim = self.registry.get(itok.text)
            if prim is None:
                hint = self.registry.close_matches(itok.text)
                extra = f"; did you mean {', '.join(hint)}?" if hint else ""
                raise ParseError(f"unknown function {itok.text!r}{extra}",
                                 self.text, itok.pos)
            self.expect_sym(")")
            return BarRef(itok.text, prim) if name == "bar" else TildeRef(itok.text, prim)
        known = list(_ATOMS) + ["bar", "tilde", "D"]
        hint = difflib.get_close_matches(name, known, n=2)
        extra = f"; did you mean {', '.join(hint)}?" if hint else ""
        raise ParseError(f"unknown identifier {name!r}{extra}", self.text, tok.pos)


def parse(text: str, registry: FunctionRegistry | None = None) -> Expr:
    """Parse an expression, resolving names against ``registry``."""
    return _Parser(text, registry or FunctionRegistry.default()).parse()


# ---------------------------------------------------------------------------
# lowering and printing

def to_dag(e: Expr) -> genfunc.Node:
    """Structure-preserving lowering of an Expr to a generalized function."""
    if isinstance(e, Num):
        return genfunc.Scalar(e.value, genfunc.Tilde(_CONST_ONE))
    if isinstance(e, Delta):
        return genfunc.DeltaBar()
    if isinstance(e, Heaviside):
        return genfunc.HeavisideBar()
    if isinstance(e, NullEx):
        return genfunc.NullExample()
    if isinstance(e, BarRef):
        return genfunc.RegularBar(e.prim)
    if isinstance(e, TildeRef):
        return genfunc.Tilde(e.prim)
    if isinstance(e, Add):
        return genfunc.Sum(to_dag(e.left), to_dag(e.right))
    if isinstance(e, Sub):
        return genfunc.Sum(to_dag(e.left), genfunc.Scalar(-1.0, to_dag(e.right)))
    if isinstance(e, Mul):
        if isinstance(e.left, Num) and isinstance(e.right, Num):
            return genfunc.Scalar(e.left.value * e.right.value, genfunc.Tilde(_CONST_ONE))
        if isinstance(e.left, Num):
            return genfunc.Scalar(e.left.value, to_dag(e.right))
        if isinstance(e.right, Num):
            return genfunc.Scalar(e.right.value, to_dag(e.left))
        return genfunc.Product(to_dag(e.left), to_dag(e.right))
    if isinstance(e, Deriv):
        return genfunc.Derivative(e.order, to_dag(e.child))
    raise TypeError(f"not an Expr: {e!r}")


def _fmt_num(v: float) -> str:
    return repr(float(v))


def expr_to_text(e: Expr) -> str:
    """Print an Expr in the grammar above (round-trips through parse)."""
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Delta):
        return "delta"
    if isinstance(e, Heaviside):
        return "heaviside"
    if isinstance(e, NullEx):
        return "nullex"
    if isinstance(e, BarRef):
        return f"bar({e.name})"
    if isinstance(e, TildeRef):
        return f"tilde({e.name})"
    if isinstance(e, (Add, Sub)):
        op = "+" if isinstance(e, Add) else "-"
        left = expr_to_text(e.left)
        right = expr_to_text(e.right)
        if isinstance(e.right, (Add, Sub)):
            right = f"({right})"
        return f"{left} {op} {right}"
    if isinstance(e, Mul):
        left = expr_to_text(e.left)
        right = expr_to_text(e.right)
        if isinstance(e.left, (Add, Sub)):
            left = f"({left})"
        if isinstance(e.right, (Add, Sub, Mul)):
            right = f"({right})"
        return f"{left} * {right}"
    if isinstance(e, Deriv):
        inner = expr_to_text(e.child)
        return f"D({inner})" if e.order == 1 else f"D^{e.order}({inner})"
    raise TypeError(f"not an Expr: {e!r}")


def dag_to_text(node: genfunc.Node, registry: FunctionRegistry | None = None) -> str:
    """Print a generalized-function DAG back into the expression language."""
    registry = registry or FunctionRegistry.default()

    def go(nd: genfunc.Node) -> str:
        if isinstance(nd, genfunc.DeltaBar):
            return "delta"
        if isinstance(nd, genfunc.HeavisideBar):
            return "heaviside"
        if isinstance(nd, genfunc.NullExample):
            return "nullex"
        if isinstance(nd, genfunc.RegularBar):
            return f"bar({registry.name_of(nd.f)})"
        if isinstance(nd, genfunc.Tilde):
            return f"tilde({registry.name_of(nd.f)})"
        if isinstance(nd, genfunc.Sum):
            left = go(nd.left)
            r = nd.right
            if isinstance(r, genfunc.Scalar) and r.c < 0:
                mag = -r.c
                rtext = go(r.child) if mag == 1.0 else go(genfunc.Scalar(mag, r.child))
                if isinstance(r.child, genfunc.Sum) and mag == 1.0:
                    rtext = f"({rtext})"
                return f"{left} - {rtext}"
            rtext = go(r)
            if isinstance(r, genfunc.Sum):
                rtext = f"({rtext})"
            return f"{left} + {rtext}"
        if isinstance(nd, genfunc.Product):
            return f"{_paren_factor(nd.left, go)} * {_paren_factor(nd.right, go, right=True)}"
        if isinstance(nd, genfunc.Scalar):
            if nd.child == genfunc.Tilde(_CONST_ONE):
                return _fmt_num(nd.c)
            if nd.c < 0:
                inner = go(genfunc.Scalar(-nd.c, nd.child))
                return f"(0 - {inner})"
            return f"{_fmt_num(nd.c)}*{_paren_factor(nd.child, go, right=True)}"
        if isinstance(nd, genfunc.Derivative):
            inner = go(nd.child)
            return f"D({inner})" if nd.n == 1 else f"D^{nd.n}({inner})"
        raise TypeError(f"cannot print node {nd!r}")

    return go(node)


def _paren_factor(nd: genfunc.Node, go, right: bool = False) -> str:
    text = go(nd)
    needs = isinstance(nd, genfunc.Sum) or (right and isinstance(nd, (genfunc.Product, genfunc.Scalar)))
    return f"({text})" if needs else text
