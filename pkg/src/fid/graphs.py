"""Mixed-graph data structures and structural queries.

All graph classes are immutable.  Node labels are plain strings and the
canonical node order is lexicographic on the label, which is used wherever
a deterministic order is needed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator

NodeId = str
Edge = tuple[NodeId, NodeId]


class GraphError(ValueError):
    """Raised for malformed graphs or invalid structural queries."""


class CycleError(GraphError):
    def __init__(self, cycle_nodes: Iterable[NodeId]):
        self.nodes = sorted(cycle_nodes)
        super().__init__("directed cycle among nodes " + ", ".join(self.nodes))


def _norm_pair(a: NodeId, b: NodeId) -> Edge:
    return (a, b) if a <= b else (b, a)


def _kahn(nodes: Iterable[NodeId], edges: Iterable[Edge]) -> list[NodeId]:
    """Topological order with ties broken by label; raises CycleError."""
    import heapq

    nodes = set(nodes)
    indeg = {v: 0 for v in nodes}
    succ: dict[NodeId, list[NodeId]] = {v: [] for v in nodes}
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    heap = [v for v in nodes if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    if len(order) != len(nodes):
        raise CycleError(v for v in nodes if indeg[v] > 0)
    return order


@dataclass(frozen=True)
class Admg:
    """Acyclic directed mixed graph.

    ``bidirected`` holds unordered pairs stored with sorted endpoints.  Bows
    (``a -> b`` together with ``a <-> b``) are allowed.
    """

    nodes: frozenset[NodeId]
    directed: frozenset[Edge] = frozenset()
    bidirected: frozenset[Edge] = frozenset()

    def __post_init__(self):
        nodes = frozenset(self.nodes)
        directed = frozenset((a, b) for a, b in self.directed)
        bidirected = frozenset(_norm_pair(a, b) for a, b in self.bidirected)
        for v in nodes:
            if not isinstance(v, str) or not v:
                raise GraphError(f"invalid node label {v!r}")
        for kind, es in (("directed", directed), ("bidirected", bidirected)):
            for a, b in es:
                if a == b:
                    raise GraphError(f"self-loop on {a} in {kind} edges")
                for x in (a, b):
                    if x not in nodes:
                        raise GraphError(f"{kind} edge {a},{b} uses unknown node {x}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "bidirected", bidirected)
        self._validate()

    def _validate(self) -> None:
        _kahn(self.nodes, self.directed)

    # -- adjacency ---------------------------------------------------------

    @cached_property
    def _pa(self) -> dict[NodeId, frozenset[NodeId]]:
        out: dict[NodeId, set] = {v: set() for v in self.nodes}
        for a, b in self.directed:
            out[b].add(a)
        return {v: frozenset(s) for v, s in out.items()}

    @cached_property
    def _ch(self) -> dict[NodeId, frozenset[NodeId]]:
        out: dict[NodeId, set] = {v: set() for v in self.nodes}
        for a, b in self.directed:
            out[a].add(b)
        return {v: frozenset(s) for v, s in out.items()}

    @cached_property
    def _sib(self) -> dict[NodeId, frozenset[NodeId]]:
        out: dict[NodeId, set] = {v: set() for v in self.nodes}
        for a, b in self.bidirected:
            out[a].add(b)
            out[b].add(a)
        return {v: frozenset(s) for v, s in out.items()}

    def _check(self, x: NodeId) -> None:
        if x not in self.nodes:
            raise GraphError(f"unknown node {x!r}")

    @property
    def random(self) -> frozenset[NodeId]:
        return self.nodes

    @property
    def fixed(self) -> frozenset[NodeId]:
        return frozenset()

    def sorted_nodes(self) -> list[NodeId]:
        return sorted(self.nodes)

    def pa(self, x: NodeId) -> frozenset[NodeId]:
        self._check(x)
        return self._pa[x]

    def ch(self, x: NodeId) -> frozenset[NodeId]:
        self._check(x)
        return self._ch[x]

    def siblings(self, x: NodeId) -> frozenset[NodeId]:
        self._check(x)
        return self._sib[x]

    def pa_set(self, xs: Iterable[NodeId]) -> frozenset[NodeId]:
        return frozenset().union(*(self.pa(x) for x in xs))

    def _reach(self, start: Iterable[NodeId], nbrs) -> set[NodeId]:
        seen: set[NodeId] = set()
        stack = list(start)
        while stack:
            v = stack.pop()
            for w in nbrs[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    @cached_property
    def _an(self) -> dict[NodeId, frozenset[NodeId]]:
        return {v: frozenset(self._reach([v], self._pa)) for v in self.nodes}

    @cached_property
    def _de(self) -> dict[NodeId, frozenset[NodeId]]:
        return {v: frozenset(self._reach([v], self._ch)) for v in self.nodes}

    def an(self, x: NodeId) -> frozenset[NodeId]:
        """Strict ancestors of ``x``."""
        self._check(x)
        return self._an[x]

    def de(self, x: NodeId) -> frozenset[NodeId]:
        """Strict descendants of ``x``."""
        self._check(x)
        return self._de[x]

    def nd(self, x: NodeId) -> frozenset[NodeId]:
        """Non-descendants of ``x``, excluding ``x`` itself."""
        return self.nodes - self.de(x) - {x}

    def an_set(self, xs: Iterable[NodeId]) -> frozenset[NodeId]:
        """Ancestors of a set, including the set itself."""
        xs = frozenset(xs)
        for x in xs:
            self._check(x)
        return xs.union(*(self._an[x] for x in xs))

    def adjacent(self, a: NodeId, b: NodeId) -> bool:
        return (
            (a, b) in self.directed
            or (b, a) in self.directed
            or _norm_pair(a, b) in self.bidirected
        )

    # -- structure -----------------------------------------------------------

    def topological_order(self) -> list[NodeId]:
        return _kahn(self.nodes, self.directed)

    def districts(self) -> list[frozenset[NodeId]]:
        """Bidirected-connected components of the random nodes, canonically ordered."""
        rnd = self.random
        seen: set[NodeId] = set()
        out = []
        for v in sorted(rnd):
            if v in seen:
                continue
            comp = {v}
            stack = [v]
            while stack:
                u = stack.pop()
                for w in self._sib[u]:
                    if w in rnd and w not in comp:
                        comp.add(w)
                        stack.append(w)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def district_of(self, x: NodeId) -> frozenset[NodeId]:
        self._check(x)
        for d in self.districts():
            if x in d:
                return d
        raise GraphError(f"{x!r} is fixed and belongs to no district")

    def induced_subgraph(self, a: Iterable[NodeId]):
        a = frozenset(a)
        missing = a - self.nodes
        if missing:
            raise GraphError(f"nodes not in graph: {sorted(missing)}")
        return self._replace(
            nodes=a,
            directed=[e for e in self.directed if e[0] in a and e[1] in a],
            bidirected=[e for e in self.bidirected if e[0] in a and e[1] in a],
        )

    def _replace(self, **kw):
        base = dict(nodes=self.nodes, directed=self.directed, bidirected=self.bidirected)
        base.update(kw)
        return type(self)(**base)

    def edges_text(self) -> Iterator[str]:
        for a, b in sorted(self.directed):
            yield f"{a} -> {b}"
        for a, b in sorted(self.bidirected):
            yield f"{a} <-> {b}"

    def __str__(self) -> str:
        return "; ".join(self.edges_text()) or "(no edges)"


@dataclass(frozen=True)
class Cadmg(Admg):
    """Conditional ADMG; ``fixed`` nodes receive no arrowheads."""

    fixed_nodes: frozenset[NodeId] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "fixed_nodes", frozenset(self.fixed_nodes))
        super().__post_init__()

    def _validate(self) -> None:
        super()._validate()
        if not self.fixed_nodes <= self.nodes:
            raise GraphError("fixed nodes must be a subset of the node set")
        for a, b in self.directed:
            if b in self.fixed_nodes:
                raise GraphError(f"arrowhead at fixed node {b} ({a} -> {b})")
        for a, b in self.bidirected:
            if a in self.fixed_nodes or b in self.fixed_nodes:
                raise GraphError(f"arrowhead at fixed node ({a} <-> {b})")

    @classmethod
    def from_admg(cls, g: Admg) -> "Cadmg":
        return cls(nodes=g.nodes, directed=g.directed, bidirected=g.bidirected)

    @property
    def random(self) -> frozenset[NodeId]:
        return self.nodes - self.fixed_nodes

    @property
    def fixed(self) -> frozenset[NodeId]:
        return self.fixed_nodes

    def _replace(self, **kw):
        base = dict(
            nodes=self.nodes,
            directed=self.directed,
            bidirected=self.bidirected,
            fixed_nodes=self.fixed_nodes,
        )
        base.update(kw)
        base["fixed_nodes"] = frozenset(base["fixed_nodes"]) & frozenset(base["nodes"])
        return type(self)(**base)


@dataclass(frozen=True)
class Mag(Admg):
    """Ancestral mixed graph: no directed cycles, no arrowhead into an ancestor.

    Maximality is not enforced on construction; see :func:`is_maximal`.
    """

    def _validate(self) -> None:
        super()._validate()
        for a, b in self.bidirected:
            if a in self._an[b] or b in self._an[a]:
                raise GraphError(f"{a} <-> {b} points into an ancestor")
            if (a, b) in self.directed or (b, a) in self.directed:
                raise GraphError(f"bow on {a},{b} is not ancestral")


@dataclass(frozen=True)
class DagWithLatents:
    observed: frozenset[NodeId]
    latent: frozenset[NodeId] = frozenset()
    directed: frozenset[Edge] = frozenset()

    def __post_init__(self):
        observed = frozenset(self.observed)
        latent = frozenset(self.latent)
        directed = frozenset((a, b) for a, b in self.directed)
        if observed & latent:
            raise GraphError(f"nodes both observed and latent: {sorted(observed & latent)}")
        allnodes = observed | latent
        for a, b in directed:
            if a == b:
                raise GraphError(f"self-loop on {a}")
            for x in (a, b):
                if x not in allnodes:
                    raise GraphError(f"edge {a} -> {b} uses unknown node {x}")
        _kahn(allnodes, directed)
        object.__setattr__(self, "observed", observed)
        object.__setattr__(self, "latent", latent)
        object.__setattr__(self, "directed", directed)

    @property
    def nodes(self) -> frozenset[NodeId]:
        return self.observed | self.latent

    def as_dag(self) -> Admg:
        return Admg(nodes=self.nodes, directed=self.directed)


@dataclass(frozen=True)
class Cpdag:
    nodes: frozenset[NodeId]
    directed: frozenset[Edge] = frozenset()
    undirected: frozenset[Edge] = frozenset()

    def __post_init__(self):
        nodes = frozenset(self.nodes)
        directed = frozenset((a, b) for a, b in self.directed)
        undirected = frozenset(_norm_pair(a, b) for a, b in self.undirected)
        for a, b in directed | undirected:
            if a == b:
                raise GraphError(f"self-loop on {a}")
            for x in (a, b):
                if x not in nodes:
                    raise GraphError(f"edge {a},{b} uses unknown node {x}")
        for a, b in undirected:
            if (a, b) in directed or (b, a) in directed:
                raise GraphError(f"pair {a},{b} is both directed and undirected")
        _kahn(nodes, directed)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "undirected", undirected)

    @classmethod
    def from_dag(cls, g: Admg) -> "Cpdag":
        if g.bidirected:
            raise GraphError("a DAG cannot have bidirected edges")
        return cls(nodes=g.nodes, directed=g.directed)


def latent_project(d: DagWithLatents) -> Admg:
    """Project out the latent nodes of ``d``.

    ``a -> b`` is added when a directed path from ``a`` to ``b`` has only
    latent interior nodes.  ``a <-> b`` is added when some path between them
    has only latent non-collider interior nodes, which (for a DAG) means both
    endpoints are reached by latent-only directed paths from a common latent
    ancestor.
    """
    ch: dict[NodeId, set] = {v: set() for v in d.nodes}
    for a, b in d.directed:
        ch[a].add(b)

    def observed_reach(start: NodeId) -> set[NodeId]:
        # observed nodes reachable by directed paths whose interior is latent
        out, seen, stack = set(), set(), [start]
        while stack:
            v = stack.pop()
            for w in ch[v]:
                if w in seen:
                    continue
                seen.add(w)
                if w in d.observed:
                    out.add(w)
                else:
                    stack.append(w)
        return out

    directed = {(v, w) for v in d.observed for w in observed_reach(v)}
    bidirected = set()
    for lat in d.latent:
        hits = sorted(observed_reach(lat))
        bidirected.update(combinations(hits, 2))
    return Admg(nodes=d.observed, directed=directed, bidirected=bidirected)


def embed_latents(g: Admg, prefix: str = "L") -> DagWithLatents:
    """Replace each bidirected edge by a fresh latent common parent."""
    latents = []
    edges = set(g.directed)
    taken = set(g.nodes)
    for i, (a, b) in enumerate(sorted(g.bidirected)):
        name = f"{prefix}{i}"
        while name in taken:
            name = "_" + name
        taken.add(name)
        latents.append(name)
        edges |= {(name, a), (name, b)}
    return DagWithLatents(observed=g.nodes, latent=latents, directed=edges)


def _edge_marks(g: Admg) -> dict[NodeId, list[tuple[NodeId, bool, bool]]]:
    # per node: (neighbour, arrowhead at this node, arrowhead at neighbour)
    inc: dict[NodeId, list] = {v: [] for v in g.nodes}
    for a, b in g.directed:
        inc[a].append((b, False, True))
        inc[b].append((a, True, False))
    for a, b in g.bidirected:
        inc[a].append((b, True, True))
        inc[b].append((a, True, True))
    return inc


def m_separated(g: Admg, x: NodeId, y: NodeId, z: Iterable[NodeId] = ()) -> bool:
    """m-separation of ``x`` and ``y`` given ``z``.

    Reachability over (node, entered-with-arrowhead) states: a walk is
    m-connecting iff every collider is in ``z`` and every non-collider is
    not, which is equivalent to the path criterion with colliders in an(z).
    """
    z = frozenset(z)
    for v in (x, y, *z):
        g._check(v)
    if x == y:
        raise GraphError("m_separated needs two distinct nodes")
    if x in z or y in z:
        raise GraphError(f"conditioning set overlaps the endpoints {x}, {y}")
    inc = _edge_marks(g)
    start = [(w, head_w) for w, _, head_w in inc[x]]
    seen = set(start)
    queue = deque(start)
    while queue:
        v, arrived_head = queue.popleft()
        if v == y:
            return False
        for w, head_v, head_w in inc[v]:
            collider = arrived_head and head_v
            if collider != (v in z):
                continue
            state = (w, head_w)
            if state not in seen:
                seen.add(state)
                queue.append(state)
    return True


def is_maximal(g: Admg) -> bool:
    """Every non-adjacent pair is m-separated by some subset of the rest."""
    nodes = g.sorted_nodes()
    for a, b in combinations(nodes, 2):
        if g.adjacent(a, b):
            continue
        rest = [v for v in nodes if v not in (a, b)]
        if not any(
            m_separated(g, a, b, zs)
            for r in range(len(rest) + 1)
            for zs in combinations(rest, r)
        ):
            return False
    return True


def v_structures(g: Admg) -> frozenset[tuple[NodeId, NodeId, NodeId]]:
    """Directed unshielded colliders ``(a, c, b)`` with ``a < b``."""
    out = set()
    for c in g.nodes:
        for a, b in combinations(sorted(g.pa(c)), 2):
            if not g.adjacent(a, b):
                out.add((a, c, b))
    return frozenset(out)


def skeleton(g) -> frozenset[Edge]:
    es = set(_norm_pair(a, b) for a, b in g.directed)
    es |= set(getattr(g, "bidirected", ()))
    es |= set(getattr(g, "undirected", ()))
    return frozenset(es)


__all__ = [
    "Admg",
    "Cadmg",
    "Cpdag",
    "CycleError",
    "DagWithLatents",
    "GraphError",
    "Mag",
    "NodeId",
    "embed_latents",
    "is_maximal",
    "latent_project",
    "m_separated",
    "skeleton",
    "v_structures",
]
