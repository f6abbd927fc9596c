from __future__ import annotations

import numpy as np
import pytest

from exprgen import VARS, random_expr, random_joint
from fid.expr import Density, ExprParseError, Fraction, Integral, Product, free_vars, p, parse, render
from fid.oracle import Table, evaluate
from fid.rewrite import (
    RewriteBudgetExceeded,
    canonicalize,
    expr_equal,
    rewrite_fixed_order,
    rewrite_random,
)

CARDS = {v: 2 for v in VARS}


def close(a: Table, b: Table) -> bool:
    order = tuple(sorted(set(a.vars) | set(b.vars)))
    shape = tuple(CARDS[v] for v in order)
    x = np.broadcast_to(a.aligned(order), shape)
    y = np.broadcast_to(b.aligned(order), shape)
    return bool(np.allclose(x, y, rtol=1e-9, atol=1e-12))


def c(text: str) -> str:
    return render(canonicalize(parse(text)))


def test_render_examples():
    assert render(p("X1", "X2")) == "p(x1,x2)"
    assert render(Fraction(p("X1", "X2"), p("X2"))) == "p(x1,x2) / p(x2)"
    assert render(canonicalize(Integral(("Y",), p("X", "Y")))) == "p(x)"
    assert render(Density(())) == "1"


def test_parse_accepts_spacing_variants():
    a = parse("int{x2} [ p(x1,x2,x3) * p(x2) / p(x1,x2) ]")
    b = parse("int{x2}[p(x1,x2,x3)*p(x2)/p(x1,x2)]")
    assert a == b
    assert free_vars(a) == {"x1", "x3"}


def test_parse_maps_names_onto_nodes():
    e = parse("p(x1|x2)", nodes=["X1", "X2"])
    assert e == Density(("X1",), ("X2",))


@pytest.mark.parametrize("bad", ["p(x1", "int{x}[ p(x) ", "p(x1) * ", "q(x)", "p(x,x)"])
def test_parse_errors(bad):
    with pytest.raises(ExprParseError):
        parse(bad)


def test_render_parse_round_trip(rng):
    for _ in range(300):
        e = random_expr(rng)
        assert parse(render(e), nodes=VARS) == e


@pytest.mark.parametrize(
    "before, after",
    [
        ("p(a|b)", "p(a,b) / p(b)"),
        ("int{y}[ p(x,y) ]", "p(x)"),
        ("p(x2,x1)", "p(x1,x2)"),
        ("(p(a,b) / p(b)) * p(b)", "p(a,b)"),
        ("(p(a) / p(b)) / (p(c) / p(d))", "p(a) * p(d) / (p(b) * p(c))"),
        ("int{x}[ p(y) * p(x,z) ]", "p(y) * p(z)"),
        ("int{x,y}[ p(x,z) * p(y,z) ]", "p(z) * p(z)"),
        ("int{x}[ int{y}[ p(x,y,z) ] ]", "p(z)"),
        ("p(b) * p(a)", "p(a) * p(b)"),
    ],
)
def test_canonicalize_examples(before, after):
    assert c(before) == after


def test_cancellation_keeps_bound_variable():
    # int_x p(x)/p(x) sums to |dom x|, so the pair must not cancel to 1
    out = c("int{x}[ p(x,y) / p(x,y) ]")
    assert out == "int{x}[ p(x,y) / p(x,y) ]"
    obs = random_joint(np.random.default_rng(0))
    e = parse("int{x1}[ p(x1,x2) / p(x1,x2) ]", nodes=VARS)
    assert close(evaluate(e, obs), evaluate(canonicalize(e), obs))


def test_expr_equal_examples():
    assert expr_equal(parse("p(a|b)"), parse("p(a,b) / p(b)"))
    assert not expr_equal(parse("p(x3|x1)"), parse("p(x3|x1,x2)"))
    e = parse("int{x2}[ p(x1,x2,x3) * p(x2) / p(x1,x2) ]")
    assert expr_equal(e, e)


def test_canonical_form_invariants(rng):
    for _ in range(500):
        e = canonicalize(random_expr(rng))
        stack = [e]
        while stack:
            n = stack.pop()
            if isinstance(n, Density):
                assert not n.given and list(n.vars) == sorted(n.vars)
            if isinstance(n, Fraction):
                assert not isinstance(n.num, Fraction) and not isinstance(n.den, Fraction)
                stack += [n.num, n.den]
            if isinstance(n, Integral):
                assert set(n.vars) <= free_vars(n.body) and list(n.vars) == sorted(n.vars)
                stack.append(n.body)
            if isinstance(n, Product):
                stack += list(n.factors)


def test_idempotent(rng):
    for _ in range(1000):
        e = canonicalize(random_expr(rng))
        assert canonicalize(e) == e


def test_normal_form_independent_of_strategy(rng):
    for _ in range(300):
        e = random_expr(rng)
        target = canonicalize(e)
        assert rewrite_fixed_order(e) == target
        assert rewrite_random(e, rng) == target


def test_each_firing_preserves_value(rng):
    checked = 0
    while checked < 300:
        e = random_expr(rng)
        trace = []
        rewrite_random(e, rng, trace=trace)
        obs = random_joint(rng)
        for f in trace[:3]:
            assert close(evaluate(f.before, obs), evaluate(f.after, obs)), f.rule
            checked += 1


def test_budget_exceeded_is_reported(rng):
    e = parse("p(b|a) * p(a|c) * p(c)")
    with pytest.raises(RewriteBudgetExceeded):
        rewrite_random(e, rng, budget=1)
    with pytest.raises(RewriteBudgetExceeded):
        rewrite_fixed_order(e, budget=1)
