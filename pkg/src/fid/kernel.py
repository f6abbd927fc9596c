"""Kernels over a CADMG and the kernel-level fixing operation."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .expr import Density, Expr, Fraction, Integral, free_vars
from .fixing import NotFixableError, as_cadmg, fix_graph, is_fixable
from .graphs import Admg, Cadmg, GraphError, NodeId
from .rewrite import canonicalize


@dataclass(frozen=True)
class KernelState:
    expr: Expr
    graph: Cadmg

    def __post_init__(self):
        missing = free_vars(self.expr) - self.graph.nodes
        if missing:
            raise GraphError(f"kernel mentions variables outside the graph: {sorted(missing)}")


def base_kernel(g: Admg) -> KernelState:
    """The observational joint ``p(x_V)`` as a kernel on ``g`` with nothing fixed."""
    return KernelState(Density(tuple(sorted(g.nodes))), as_cadmg(g))


def conditional_of(k: KernelState, r: NodeId) -> Expr:
    """``q(x_r | x_nd(r))`` built from marginals of the current kernel."""
    g = k.graph
    rnd = g.random
    nd = (rnd - g.de(r) - {r}) | g.fixed
    top = tuple(sorted(rnd - nd - {r}))
    bottom = tuple(sorted(rnd - nd))
    return Fraction(Integral(top, k.expr), Integral(bottom, k.expr))


def fix_kernel(k: KernelState, r: NodeId) -> KernelState:
    """Fix ``r`` in both the kernel and its graph.

    A node without random children is marginalised; otherwise the kernel is
    divided by the conditional of ``r`` given its non-descendants.
    """
    g = k.graph
    if r not in g.random:
        raise GraphError(f"{r!r} is not a random node")
    if not is_fixable(g, r):
        raise NotFixableError(f"{r} is not fixable in the current CADMG")
    if not (g.ch(r) & g.random):
        expr = Integral((r,), k.expr)
    else:
        expr = Fraction(k.expr, conditional_of(k, r))
    return KernelState(canonicalize(expr), fix_graph(g, r))


@lru_cache(maxsize=200_000)
def kernel_after(g: Cadmg, seq: tuple[NodeId, ...]) -> KernelState:
    """Kernel reached by fixing ``seq`` in order; prefixes are shared through the cache."""
    if not seq:
        return base_kernel(g)
    return fix_kernel(kernel_after(g, seq[:-1]), seq[-1])


def fix_kernel_sequence(g: Admg, seq: Iterable[NodeId]) -> KernelState:
    return kernel_after(as_cadmg(g), tuple(seq))
