"""Canonicalisation of estimand expressions by term rewriting.

Rule families:

1. conditional expansion ``p(A|B) -> p(A,B) / p(B)``
2. flattening products and fractions, cancelling identical factors
3. marginals: ``int_X p(..., X, ...) -> p(...)``, also inside a product when
   ``X`` occurs in one factor only; factors free of the integration variables
   move outside the integral and dependent integral factors move inside
4. sorting of density and integral variable lists
5. sorting of product factors by :func:`~fid.expr.sort_key`

``canonicalize`` normalises innermost-first with a fixed rule order.
``rewrite_random`` fires redexes in random order and is used to check that
the normal form does not depend on the strategy.
"""

from __future__ import annotations

from collections import Counter
from functools import lru_cache
from typing import Callable, Iterator, NamedTuple, Optional

from .expr import (
    UNIT,
    Density,
    Expr,
    Fraction,
    Integral,
    Product,
    children,
    free_vars,
    is_unit,
    sort_key,
)

DEFAULT_STEP_BUDGET = 10_000


class RewriteBudgetExceeded(RuntimeError):
    pass


def factors_of(e: Expr) -> list[Expr]:
    if isinstance(e, Product):
        return list(e.factors)
    if is_unit(e):
        return []
    return [e]


def make_product(fs: list[Expr]) -> Expr:
    if not fs:
        return UNIT
    if len(fs) == 1:
        return fs[0]
    return Product(tuple(fs))


def make_fraction(num: list[Expr], den: list[Expr]) -> Expr:
    if not den:
        return make_product(num)
    return Fraction(make_product(num), make_product(den))


def num_den(e: Expr) -> tuple[list[Expr], list[Expr]]:
    if isinstance(e, Fraction):
        return factors_of(e.num), factors_of(e.den)
    return factors_of(e), []


# -- rules -------------------------------------------------------------------
# Each rule looks at the top node only and returns the rewritten node or None.


def expand_conditional(e):
    if isinstance(e, Density) and e.given:
        return Fraction(Density(e.vars + e.given), Density(e.given))
    return None


def flatten_product(e):
    if not isinstance(e, Product):
        return None
    if len(e.factors) < 2 or any(isinstance(f, Product) or is_unit(f) for f in e.factors):
        out = []
        for f in e.factors:
            out.extend(factors_of(f))
        return make_product(out)
    return None


def hoist_fraction(e):
    if isinstance(e, Product) and any(isinstance(f, Fraction) for f in e.factors):
        num, den = [], []
        for f in e.factors:
            n, d = num_den(f)
            num += n
            den += d
        return Fraction(make_product(num), make_product(den))
    return None


def flatten_fraction(e):
    if isinstance(e, Fraction) and (isinstance(e.num, Fraction) or isinstance(e.den, Fraction)):
        a, b = num_den(e.num)
        c, d = num_den(e.den)
        return Fraction(make_product(a + d), make_product(b + c))
    return None


def drop_unit_denominator(e):
    if isinstance(e, Fraction) and is_unit(e.den):
        return e.num
    return None


def cancel(e, bound: frozenset = frozenset()):
    """Cancel one shared factor, unless that removes the last occurrence of a
    variable bound by an enclosing integral (``int_x 1`` is not ``1``)."""
    if not isinstance(e, Fraction) or isinstance(e.num, Fraction) or isinstance(e.den, Fraction):
        return None
    num, den = factors_of(e.num), factors_of(e.den)
    common = Counter(num) & Counter(den)
    if not common:
        return None
    at_risk = free_vars(e) & bound
    for f in sorted(common, key=sort_key):
        n, d = list(num), list(den)
        n.remove(f)
        d.remove(f)
        out = make_fraction(n, d)
        if at_risk <= free_vars(out):
            return out
    return None


def drop_empty_integral(e):
    if isinstance(e, Integral) and not e.vars:
        return e.body
    return None


def drop_vacuous_variable(e):
    if isinstance(e, Integral):
        fv = free_vars(e.body)
        if any(v not in fv for v in e.vars):
            return Integral(tuple(v for v in e.vars if v in fv), e.body)
    return None


def merge_nested_integral(e):
    if isinstance(e, Integral) and isinstance(e.body, Integral):
        if not set(e.vars) & set(e.body.vars):
            return Integral(e.vars + e.body.vars, e.body.body)
    return None


def marginalize_density(e):
    if isinstance(e, Integral) and isinstance(e.body, Density) and not e.body.given:
        gone = set(e.vars) & set(e.body.vars)
        if gone:
            dens = Density(tuple(v for v in e.body.vars if v not in gone))
            rest = tuple(v for v in e.vars if v not in gone)
            return Integral(rest, dens) if rest else dens
    return None


def pull_out_constants(e):
    """``int_X [A * B(X)] -> A * int_X B(X)`` when ``A`` does not mention ``X``."""
    if not isinstance(e, Integral) or not isinstance(e.body, (Product, Fraction)):
        return None
    bound = set(e.vars)
    num, den = num_den(e.body)
    dep = lambda f: bool(free_vars(f) & bound)
    if all(dep(f) for f in num + den):
        return None
    inner = Integral(e.vars, make_fraction([f for f in num if dep(f)], [f for f in den if dep(f)]))
    return make_fraction([f for f in num if not dep(f)] + [inner], [f for f in den if not dep(f)])


def eliminate_unique_variable(e):
    """``int_{X,v} [p(A,v) * B] -> int_X [p(A) * B]`` when ``v`` occurs nowhere else."""
    if not isinstance(e, Integral) or not isinstance(e.body, (Product, Fraction)):
        return None
    num, den = num_den(e.body)
    for v in sorted(e.vars):
        hits = [i for i, f in enumerate(num + den) if v in free_vars(f)]
        if len(hits) != 1 or hits[0] >= len(num):
            continue
        f = num[hits[0]]
        if not isinstance(f, Density) or f.given:
            continue
        num = list(num)
        num[hits[0]] = Density(tuple(u for u in f.vars if u != v))
        body = make_fraction([g for g in num if not is_unit(g)], den)
        rest = tuple(u for u in e.vars if u != v)
        return Integral(rest, body) if rest else body
    return None


def absorb_integral_factor(e):
    """``int_X [A * int_Y B] -> int_{X,Y} [A * B]`` when the inner integral depends on ``X``.

    Skipped when ``Y`` would capture a variable of ``A`` or shadow ``X``.
    """
    if not isinstance(e, Integral) or not isinstance(e.body, (Product, Fraction)):
        return None
    bound = set(e.vars)
    num, den = num_den(e.body)
    for i, f in enumerate(num):
        if not isinstance(f, Integral) or not free_vars(f) & bound:
            continue
        others = num[:i] + num[i + 1:] + den
        inner = set(f.vars)
        if inner & bound or any(inner & free_vars(g) for g in others):
            continue
        n, d = num_den(f.body)
        body = make_fraction(num[:i] + num[i + 1:] + n, den + d)
        return Integral(e.vars + f.vars, body)
    return None


def sort_density_variables(e):
    if isinstance(e, Density):
        vs, gs = tuple(sorted(e.vars)), tuple(sorted(e.given))
        if (vs, gs) != (e.vars, e.given):
            return Density(vs, gs)
    return None


def sort_integral_variables(e):
    if isinstance(e, Integral):
        vs = tuple(sorted(e.vars))
        if vs != e.vars:
            return Integral(vs, e.body)
    return None


def sort_product(e):
    if isinstance(e, Product):
        fs = tuple(sorted(e.factors, key=sort_key))
        if fs != e.factors:
            return Product(fs)
    return None


class Rule(NamedTuple):
    name: str
    family: int
    fn: Callable[..., Optional[Expr]]
    uses_scope: bool = False

    def apply(self, e: Expr, bound: frozenset = frozenset()) -> Optional[Expr]:
        """``bound`` holds the variables bound by integrals enclosing ``e``."""
        return self.fn(e, bound) if self.uses_scope else self.fn(e)


RULES: tuple[Rule, ...] = (
    Rule("expand_conditional", 1, expand_conditional),
    Rule("flatten_product", 2, flatten_product),
    Rule("hoist_fraction", 2, hoist_fraction),
    Rule("flatten_fraction", 2, flatten_fraction),
    Rule("drop_unit_denominator", 2, drop_unit_denominator),
    Rule("cancel", 2, cancel, uses_scope=True),
    Rule("drop_empty_integral", 3, drop_empty_integral),
    Rule("drop_vacuous_variable", 3, drop_vacuous_variable),
    Rule("merge_nested_integral", 3, merge_nested_integral),
    Rule("marginalize_density", 3, marginalize_density),
    Rule("pull_out_constants", 3, pull_out_constants),
    Rule("eliminate_unique_variable", 3, eliminate_unique_variable),
    Rule("absorb_integral_factor", 3, absorb_integral_factor),
    Rule("sort_density_variables", 4, sort_density_variables),
    Rule("sort_integral_variables", 4, sort_integral_variables),
    Rule("sort_product", 5, sort_product),
)


def _rebuild(e: Expr, kids: list[Expr]) -> Expr:
    if isinstance(e, Product):
        return Product(tuple(kids))
    if isinstance(e, Fraction):
        return Fraction(kids[0], kids[1])
    if isinstance(e, Integral):
        return Integral(e.vars, kids[0])
    return e


def _top(e: Expr, bound: frozenset) -> Optional[Expr]:
    for rule in RULES:
        out = rule.apply(e, bound)
        if out is not None:
            return out
    return None


def canonicalize(e: Expr) -> Expr:
    """Rewrite ``e`` to its normal form."""
    return _canon(e, frozenset())


@lru_cache(maxsize=200_000)
def _canon(e: Expr, bound: frozenset) -> Expr:
    if isinstance(e, Product):
        e = Product(tuple(_canon(f, bound) for f in e.factors))
    elif isinstance(e, Fraction):
        e = Fraction(_canon(e.num, bound), _canon(e.den, bound))
    elif isinstance(e, Integral):
        e = Integral(e.vars, _canon(e.body, bound | frozenset(e.vars)))
    out = _top(e, bound)
    return e if out is None else _canon(out, bound)


def expr_equal(a: Expr, b: Expr) -> bool:
    """Sound, incomplete equality: identical normal forms."""
    return canonicalize(a) == canonicalize(b)


# -- strategy-free rewriting, for property checks -------------------------------


class Firing(NamedTuple):
    rule: str
    path: tuple[int, ...]
    before: Expr
    after: Expr


def redexes(
    e: Expr, path: tuple[int, ...] = (), bound: frozenset = frozenset()
) -> Iterator[tuple[tuple[int, ...], Rule, Expr]]:
    for rule in RULES:
        out = rule.apply(e, bound)
        if out is not None:
            yield path, rule, out
    inner = bound | frozenset(e.vars) if isinstance(e, Integral) else bound
    for i, k in enumerate(children(e)):
        yield from redexes(k, path + (i,), inner)


def replace_at(e: Expr, path: tuple[int, ...], new: Expr) -> Expr:
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(e, Product):
        fs = list(e.factors)
        fs[i] = replace_at(fs[i], rest, new)
        return Product(tuple(fs))
    if isinstance(e, Fraction):
        kids = [e.num, e.den]
        kids[i] = replace_at(kids[i], rest, new)
        return Fraction(*kids)
    if isinstance(e, Integral):
        return Integral(e.vars, replace_at(e.body, rest, new))
    raise IndexError(path)


def rewrite_random(
    e: Expr, rng, budget: int = DEFAULT_STEP_BUDGET, trace: list | None = None
) -> Expr:
    """Fire a uniformly chosen redex until none is left.

    ``rng`` needs an ``integers(n)`` method (``numpy.random.Generator``).
    Raises :class:`RewriteBudgetExceeded` after ``budget`` firings.
    """
    for _ in range(budget):
        options = list(redexes(e))
        if not options:
            return e
        path, rule, out = options[int(rng.integers(len(options)))]
        new = replace_at(e, path, out)
        if trace is not None:
            trace.append(Firing(rule.name, path, e, new))
        e = new
    if not list(redexes(e)):
        return e
    raise RewriteBudgetExceeded(f"no normal form within {budget} rewrite steps")


def rewrite_fixed_order(e: Expr, budget: int = DEFAULT_STEP_BUDGET) -> Expr:
    """Leftmost-outermost strategy; a second deterministic route to the normal form."""
    for _ in range(budget):
        first = next(redexes(e), None)
        if first is None:
            return e
        path, _, out = first
        e = replace_at(e, path, out)
    raise RewriteBudgetExceeded(f"no normal form within {budget} rewrite steps")
