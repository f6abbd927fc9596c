"""ADMG to MAG projection, Markov equivalence of DAGs and CPDAG distance ranges."""

from __future__ import annotations

import enum
from itertools import combinations, product
from typing import NamedTuple, Sequence

import numpy as np

from .distance import MissPolicy, fid
from .fixing import DEFAULT_CAP
from .graphs import Admg, Cpdag, CycleError, GraphError, Mag, NodeId, skeleton, v_structures
from .identify import PairQuery


def tail(g: Admg, v: NodeId) -> frozenset[NodeId]:
    """Parents of ``v`` in the Markov-equivalent MAG."""
    g._check(v)
    anc = g.an_set(g.pa(v)) | {v}
    dis = g.induced_subgraph(anc).district_of(v)
    return frozenset((dis - {v}) | (g.pa_set(dis) - {v}))


def is_head_pair(g: Admg, v: NodeId, w: NodeId) -> bool:
    if v == w:
        raise GraphError("a head pair needs two distinct nodes")
    if v in g.an(w) or w in g.an(v):
        return False
    sub = g.induced_subgraph(g.an_set({v, w}))
    return w in sub.district_of(v)


def admg_to_mag(g: Admg) -> Mag:
    """Project ``g`` onto a Markov-equivalent MAG using tails and head pairs."""
    directed = {(w, v) for v in g.nodes for w in tail(g, v)}
    bidirected = {
        (v, w) for v, w in combinations(g.sorted_nodes(), 2) if is_head_pair(g, v, w)
    }
    try:
        return Mag(nodes=g.nodes, directed=frozenset(directed), bidirected=frozenset(bidirected))
    except GraphError as exc:
        raise AssertionError(f"projection produced a non-ancestral graph: {exc}") from exc


def _require_dag(g: Admg) -> None:
    if g.bidirected:
        raise GraphError("expected a DAG but the graph has bidirected edges")


def markov_equiv_dags(g: Admg, h: Admg) -> bool:
    _require_dag(g)
    _require_dag(h)
    return g.nodes == h.nodes and skeleton(g) == skeleton(h) and v_structures(g) == v_structures(h)


def cpdag_v_structures(c: Cpdag) -> frozenset[tuple[NodeId, NodeId, NodeId]]:
    adj = skeleton(c)
    pa: dict[NodeId, list[NodeId]] = {v: [] for v in c.nodes}
    for a, b in c.directed:
        pa[b].append(a)
    out = set()
    for mid, ps in pa.items():
        for a, b in combinations(sorted(ps), 2):
            if (a, b) not in adj:
                out.add((a, mid, b))
    return frozenset(out)


class ExtensionMode(str, enum.Enum):
    EXACT = "exact"
    SAMPLE = "sample"


class InconsistentCpdag(GraphError):
    pass


def _orient(c: Cpdag, choice: Sequence[bool]) -> Admg | None:
    edges = set(c.directed)
    for (a, b), flip in zip(sorted(c.undirected), choice):
        edges.add((b, a) if flip else (a, b))
    try:
        return Admg(nodes=c.nodes, directed=frozenset(edges))
    except CycleError:
        return None


def _exact_extensions(c: Cpdag) -> list[Admg]:
    want = cpdag_v_structures(c)
    out = []
    for choice in product((False, True), repeat=len(c.undirected)):
        d = _orient(c, choice)
        if d is not None and v_structures(d) == want:
            out.append(d)
    return out


def _sample_extension(c: Cpdag, rng: np.random.Generator) -> Admg | None:
    """One consistent orientation by randomized depth-first search with backtracking."""
    want = cpdag_v_structures(c)
    und = sorted(c.undirected)
    order = [und[i] for i in rng.permutation(len(und))]
    flips = [bool(x) for x in rng.integers(0, 2, size=len(und))]

    def valid_partial(edges) -> bool:
        try:
            d = Admg(nodes=c.nodes, directed=frozenset(edges))
        except CycleError:
            return False
        # a collider already formed between non-adjacent nodes must be wanted
        adj = skeleton(c)
        for mid in d.nodes:
            for a, b in combinations(sorted(d.pa(mid)), 2):
                if (a, b) not in adj and (a, mid, b) not in want:
                    return False
        return True

    def search(i, edges):
        if i == len(order):
            d = Admg(nodes=c.nodes, directed=frozenset(edges))
            return d if v_structures(d) == want else None
        a, b = order[i]
        first = (b, a) if flips[i] else (a, b)
        second = (first[1], first[0])
        for e in (first, second):
            new = edges | {e}
            if valid_partial(new):
                found = search(i + 1, new)
                if found is not None:
                    return found
        return None

    return search(0, frozenset(c.directed))


def dag_extensions(
    c: Cpdag,
    mode: ExtensionMode | str = ExtensionMode.EXACT,
    budget: int = 100,
    seed: int = 0,
) -> list[Admg]:
    """DAGs in the class of ``c``, all of them or a de-duplicated sample.

    The sampler is not uniform over the class.
    """
    mode = ExtensionMode(mode)
    if mode is ExtensionMode.EXACT:
        out = _exact_extensions(c)
        if out:
            ref = out[0]
            assert all(markov_equiv_dags(ref, d) for d in out)
    else:
        rng = np.random.default_rng(seed)
        seen: dict[frozenset, Admg] = {}
        for _ in range(budget):
            d = _sample_extension(c, rng)
            if d is None:
                break
            seen.setdefault(d.directed, d)
        out = sorted(seen.values(), key=lambda d: sorted(d.directed))
    if not out:
        raise InconsistentCpdag("the CPDAG has no consistent DAG extension")
    return out


class FidRange(NamedTuple):
    lo: float
    hi: float
    n_ref: int
    n_cand: int
    mode: str


def cpdag_fid_range(
    c1: Cpdag,
    c2: Cpdag,
    pairs: Sequence[PairQuery] | None = None,
    mode: ExtensionMode | str = ExtensionMode.EXACT,
    budget: int = 100,
    seed: int = 0,
    cap: int | None = DEFAULT_CAP,
    policy: MissPolicy = MissPolicy.ERROR,
) -> FidRange:
    """Min and max normalized directional FID over pairs of DAG extensions."""
    if c1.nodes != c2.nodes:
        raise GraphError("CPDAGs have different node sets")
    e1 = dag_extensions(c1, mode, budget, seed)
    e2 = dag_extensions(c2, mode, budget, seed + 1)
    vals = [fid(g, h, pairs, cap, policy).normalized for g in e1 for h in e2]
    return FidRange(min(vals), max(vals), len(e1), len(e2), ExtensionMode(mode).value)
