"""Identification of ``p(y | do(t))`` by fixing, enumerating every estimand."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as cartesian

from .expr import Density, Expr, Integral, Product, render, sort_key
from .fixing import DEFAULT_CAP, as_cadmg, intrinsic_sets, valid_fixing_sequences
from .graphs import Admg, Cadmg, GraphError, NodeId
from .kernel import kernel_after
from .rewrite import canonicalize


class Status(str, enum.Enum):
    NOT_IDENTIFIABLE = "not_identifiable"
    DEGENERATE = "degenerate"
    IDENTIFIED = "identified"


@dataclass(frozen=True)
class PairQuery:
    treatment: NodeId
    outcome: NodeId

    def __post_init__(self):
        if self.treatment == self.outcome:
            raise ValueError(f"treatment and outcome must differ (both {self.treatment!r})")

    def __str__(self) -> str:
        return f"({self.treatment},{self.outcome})"


@dataclass(frozen=True)
class EstimandSet:
    status: Status
    exprs: tuple[Expr, ...] = ()
    truncated: bool = False

    def as_set(self) -> frozenset[Expr]:
        return frozenset(self.exprs)

    def rendered(self) -> list[str]:
        return [render(e) for e in self.exprs]

    def __len__(self) -> int:
        return len(self.exprs)


def _check_pair(g: Admg, q: PairQuery) -> None:
    for v in (q.treatment, q.outcome):
        if v not in g.nodes:
            raise GraphError(f"unknown node {v!r}")


def y_star(g: Admg, q: PairQuery) -> frozenset[NodeId]:
    """Ancestors of Y in the graph with T removed, plus Y."""
    _check_pair(g, q)
    sub = g.induced_subgraph(g.nodes - {q.treatment})
    return sub.an(q.outcome) | {q.outcome}


def _target_districts(g: Admg, q: PairQuery) -> list[frozenset[NodeId]]:
    return g.induced_subgraph(y_star(g, q)).districts()


def is_identifiable(g: Admg, q: PairQuery) -> bool:
    intrinsic = intrinsic_sets(g)
    return all(d in intrinsic for d in _target_districts(g, q))


@lru_cache(maxsize=65536)
def district_factors(g: Cadmg, district: frozenset[NodeId], cap: int | None) -> tuple[tuple[Expr, ...], bool]:
    """Distinct canonical kernels obtained by fixing everything outside ``district``."""
    seqs = valid_fixing_sequences(g, district, cap)
    found = {kernel_after(g, s).expr for s in seqs}
    return tuple(sorted(found, key=sort_key)), seqs.truncated


def identify_all(g: Admg, q: PairQuery, cap: int | None = DEFAULT_CAP) -> EstimandSet:
    return _identify_all(as_cadmg(g), q, cap)


@lru_cache(maxsize=65536)
def _identify_all(g: Cadmg, q: PairQuery, cap: int | None) -> EstimandSet:
    _check_pair(g, q)
    t, y = q.treatment, q.outcome
    if y not in g.de(t):
        return EstimandSet(Status.DEGENERATE, (Density((y,)),))
    if not is_identifiable(g, q):
        return EstimandSet(Status.NOT_IDENTIFIABLE)
    ystar = y_star(g, q)
    per_district, truncated = [], False
    for d in _target_districts(g, q):
        factors, trunc = district_factors(g, d, cap)
        per_district.append(factors)
        truncated |= trunc
    outer = tuple(sorted(ystar - {y}))
    found = set()
    for combo in cartesian(*per_district):
        body = Product(combo)
        found.add(canonicalize(Integral(outer, body) if outer else body))
    return EstimandSet(Status.IDENTIFIED, tuple(sorted(found, key=sort_key)), truncated)
