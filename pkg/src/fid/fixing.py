"""Graph-level fixing, valid fixing sequences, reachable and intrinsic sets."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .graphs import Admg, Cadmg, GraphError, NodeId

DEFAULT_CAP = 10_000


class NotFixableError(GraphError):
    pass


class TruncationWarning(UserWarning):
    pass


def as_cadmg(g: Admg) -> Cadmg:
    return g if isinstance(g, Cadmg) else Cadmg.from_admg(g)


def _blocking_descendant(g: Admg, r: NodeId) -> NodeId | None:
    if r not in g.random:
        raise GraphError(f"{r!r} is not a random node")
    dis = g.district_of(r)
    blocking = sorted((g.de(r) - {r}) & dis)
    return blocking[0] if blocking else None


def is_fixable(g: Admg, r: NodeId) -> bool:
    """True iff no proper descendant of ``r`` lies in the district of ``r``.

    Checking children only is not enough: with ``T -> M -> Y`` and ``T <-> Y``
    dividing by ``q(t | nd(t))`` leaves the confounding of ``T`` and ``Y`` in place.
    """
    return _blocking_descendant(g, r) is None


def fix_graph(g: Admg, r: NodeId) -> Cadmg:
    """Move ``r`` to the fixed set, dropping every edge with an arrowhead at ``r``."""
    g = as_cadmg(g)
    blocker = _blocking_descendant(g, r)
    if blocker is not None:
        raise NotFixableError(f"cannot fix {r}: descendant {blocker} shares its district")
    return Cadmg(
        nodes=g.nodes,
        directed=[(a, b) for a, b in g.directed if b != r],
        bidirected=[e for e in g.bidirected if r not in e],
        fixed_nodes=g.fixed | {r},
    )


def fix_sequence(g: Admg, seq: Iterable[NodeId]) -> Cadmg:
    out = as_cadmg(g)
    for r in seq:
        out = fix_graph(out, r)
    return out


@dataclass(frozen=True)
class FixingSequences:
    """Result of sequence enumeration; ``truncated`` is set when the cap was hit."""

    sequences: tuple[tuple[NodeId, ...], ...]
    truncated: bool = False

    def __iter__(self) -> Iterator[tuple[NodeId, ...]]:
        return iter(self.sequences)

    def __len__(self) -> int:
        return len(self.sequences)

    def __getitem__(self, i):
        return self.sequences[i]


@lru_cache(maxsize=65536)
def _fixed_graph(g: Cadmg, fixed: frozenset[NodeId]) -> Cadmg:
    # Fixing commutes, so the graph reached only depends on the fixed set.
    return Cadmg(
        nodes=g.nodes,
        directed=[(a, b) for a, b in g.directed if b not in fixed],
        bidirected=[e for e in g.bidirected if e[0] not in fixed and e[1] not in fixed],
        fixed_nodes=g.fixed | fixed,
    )


def _fixable_now(g: Cadmg, fixed: frozenset[NodeId], todo: frozenset[NodeId]) -> list[NodeId]:
    h = _fixed_graph(g, fixed)
    return [r for r in sorted(todo) if is_fixable(h, r)]


def valid_fixing_sequences(
    g: Admg, keep: Iterable[NodeId], cap: int | None = DEFAULT_CAP
) -> FixingSequences:
    """All orders of ``nodes(g) - keep`` that stay sequentially fixable.

    Depth-first, candidates tried in canonical node order.  With a finite
    ``cap`` only the first ``cap`` sequences are returned and the result is
    flagged as truncated.
    """
    g = as_cadmg(g)
    keep = frozenset(keep)
    if not keep <= g.nodes:
        raise GraphError(f"keep set has unknown nodes {sorted(keep - g.nodes)}")
    target = g.random - keep
    dead: set[frozenset] = set()
    out: list[tuple[NodeId, ...]] = []
    truncated = False

    def dfs(fixed: frozenset, prefix: list) -> bool:
        nonlocal truncated
        todo = target - fixed
        if not todo:
            if cap is not None and len(out) >= cap:
                truncated = True
                return False
            out.append(tuple(prefix))
            return True
        if fixed in dead:
            return False
        found = False
        for r in _fixable_now(g, fixed, todo):
            prefix.append(r)
            found |= dfs(fixed | {r}, prefix)
            prefix.pop()
            if truncated:
                return found
        if not found:
            dead.add(fixed)
        return found

    dfs(frozenset(), [])
    if truncated:
        warnings.warn(
            f"fixing-sequence enumeration truncated at {cap} sequences",
            TruncationWarning,
            stacklevel=2,
        )
    return FixingSequences(tuple(out), truncated)


@lru_cache(maxsize=4096)
def _reachable_fixed_sets(g: Cadmg) -> frozenset[frozenset[NodeId]]:
    seen = {frozenset()}
    frontier = [frozenset()]
    while frontier:
        nxt = []
        for fixed in frontier:
            for r in _fixable_now(g, fixed, g.random - fixed):
                f2 = fixed | {r}
                if f2 not in seen:
                    seen.add(f2)
                    nxt.append(f2)
        frontier = nxt
    return frozenset(seen)


def reachable_sets(g: Admg) -> frozenset[frozenset[NodeId]]:
    """Random-node sets reachable from ``g`` by some valid fixing sequence."""
    g = as_cadmg(g)
    return frozenset(g.random - f for f in _reachable_fixed_sets(g))


@lru_cache(maxsize=4096)
def _intrinsic(g: Cadmg) -> frozenset[frozenset[NodeId]]:
    out = set()
    for fixed in _reachable_fixed_sets(g):
        out.update(_fixed_graph(g, fixed).districts())
    return frozenset(out)


def intrinsic_sets(g: Admg) -> frozenset[frozenset[NodeId]]:
    """Districts of every CADMG reachable from ``g``."""
    return _intrinsic(as_cadmg(g))
