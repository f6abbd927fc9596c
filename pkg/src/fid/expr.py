"""Symbolic kernel expressions over densities of the observational distribution.

Four node kinds: :class:`Density` ``p(vars | given)``, :class:`Product`,
:class:`Fraction` and :class:`Integral`.  The empty density ``p()`` is the
multiplicative unit and renders as ``1``.

Text form (``render``/``parse``)::

    int{x2}[ p(x1,x2,x3) * p(x2) / p(x1,x2) ]
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Union

from .graphs import NodeId


@dataclass(frozen=True)
class Density:
    vars: tuple[NodeId, ...]
    given: tuple[NodeId, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "given", tuple(self.given))
        if len(set(self.vars)) != len(self.vars) or len(set(self.given)) != len(self.given):
            raise ValueError(f"duplicate variable in density {self.vars}|{self.given}")
        if set(self.vars) & set(self.given):
            raise ValueError("density variables and conditioning set overlap")
        if self.given and not self.vars:
            raise ValueError("conditional density needs at least one variable")


@dataclass(frozen=True)
class Product:
    factors: tuple["Expr", ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))


@dataclass(frozen=True)
class Fraction:
    num: "Expr"
    den: "Expr"


@dataclass(frozen=True)
class Integral:
    vars: tuple[NodeId, ...]
    body: "Expr"

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if len(set(self.vars)) != len(self.vars):
            raise ValueError(f"duplicate integration variable in {self.vars}")


Expr = Union[Density, Product, Fraction, Integral]

UNIT = Density(())


def p(*vars: NodeId, given: Iterable[NodeId] = ()) -> Density:
    return Density(tuple(vars), tuple(given))


def is_unit(e: Expr) -> bool:
    return isinstance(e, Density) and not e.vars


@lru_cache(maxsize=None)
def free_vars(e: Expr) -> frozenset[NodeId]:
    if isinstance(e, Density):
        return frozenset(e.vars) | frozenset(e.given)
    if isinstance(e, Product):
        return frozenset().union(*(free_vars(f) for f in e.factors))
    if isinstance(e, Fraction):
        return free_vars(e.num) | free_vars(e.den)
    if isinstance(e, Integral):
        return free_vars(e.body) - frozenset(e.vars)
    raise TypeError(f"not an expression: {e!r}")


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, Product):
        return e.factors
    if isinstance(e, Fraction):
        return (e.num, e.den)
    if isinstance(e, Integral):
        return (e.body,)
    return ()


def size(e: Expr) -> int:
    return 1 + sum(size(c) for c in children(e))


# -- rendering -----------------------------------------------------------------


def _name(v: NodeId, lower: bool) -> str:
    return v.lower() if lower else v


@lru_cache(maxsize=None)
def _render(e: Expr, lower: bool) -> str:
    if isinstance(e, Density):
        if not e.vars:
            return "1"
        s = ",".join(_name(v, lower) for v in e.vars)
        if e.given:
            s += "|" + ",".join(_name(v, lower) for v in e.given)
        return f"p({s})"
    if isinstance(e, Product):
        if not e.factors:
            return "1"
        return " * ".join(
            f"({_render(f, lower)})" if isinstance(f, (Fraction, Product)) else _render(f, lower)
            for f in e.factors
        )
    if isinstance(e, Fraction):
        num = _render(e.num, lower)
        if isinstance(e.num, Fraction):
            num = f"({num})"
        den = _render(e.den, lower)
        if isinstance(e.den, (Fraction, Product)):
            den = f"({den})"
        return f"{num} / {den}"
    if isinstance(e, Integral):
        vs = ",".join(_name(v, lower) for v in e.vars)
        return f"int{{{vs}}}[ {_render(e.body, lower)} ]"
    raise TypeError(f"not an expression: {e!r}")


def render(e: Expr) -> str:
    """Text form with lower-cased variable names, e.g. ``p(x1,x2) / p(x2)``."""
    return _render(e, True)


def sort_key(e: Expr) -> str:
    """Total order on expressions: the exact-label serialisation."""
    return _render(e, False)


# -- parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(int\{|p\(|[(){}\[\],|*/]|1(?![\w.])|[^\s(){}\[\],|*/]+)")


class ExprParseError(ValueError):
    pass


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExprParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens: list[str], resolve):
        self.toks = tokens
        self.i = 0
        self.resolve = resolve

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ExprParseError(f"expected {expected or 'token'}, got {tok!r}")
        self.i += 1
        return tok

    def names(self, closing: str) -> list[str]:
        out = []
        while self.peek() not in (closing, "|"):
            if out:
                self.take(",")
            out.append(self.resolve(self.take()))
        return out

    def expr(self) -> Expr:
        num = self.product()
        if self.peek() == "/":
            self.take("/")
            return Fraction(num, self.atom())
        return num

    def product(self) -> Expr:
        fs = [self.atom()]
        while self.peek() == "*":
            self.take("*")
            fs.append(self.atom())
        return fs[0] if len(fs) == 1 else Product(tuple(fs))

    def atom(self) -> Expr:
        tok = self.take()
        if tok == "1":
            return UNIT
        if tok == "(":
            e = self.expr()
            self.take(")")
            return e
        if tok == "p(":
            vs = self.names(")")
            given = []
            if self.peek() == "|":
                self.take("|")
                given = self.names(")")
            self.take(")")
            return Density(tuple(vs), tuple(given))
        if tok == "int{":
            vs = self.names("}")
            self.take("}")
            self.take("[")
            body = self.expr()
            self.take("]")
            return Integral(tuple(vs), body)
        raise ExprParseError(f"unexpected token {tok!r}")


def parse(text: str, nodes: Iterable[NodeId] | Mapping[str, NodeId] | None = None) -> Expr:
    """Parse the text form.

    Rendered names are lower-cased; pass the graph's ``nodes`` to map them
    back to the original labels.
    """
    if nodes is None:
        resolve = lambda s: s
    else:
        table = dict(nodes) if isinstance(nodes, Mapping) else {}
        if not table:
            for v in nodes:
                key = v.lower()
                if key in table and table[key] != v:
                    raise ExprParseError(f"labels {table[key]!r} and {v!r} collide when lower-cased")
                table[key] = v

        def resolve(s):
            try:
                return table[s]
            except KeyError:
                raise ExprParseError(f"unknown variable {s!r}") from None

    parser = _Parser(_tokenize(text), resolve)
    try:
        e = parser.expr()
    except ExprParseError:
        raise
    except ValueError as exc:
        raise ExprParseError(str(exc)) from None
    if parser.peek() is not None:
        raise ExprParseError(f"trailing input at token {parser.peek()!r}")
    return e
