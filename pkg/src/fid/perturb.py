"""Random ADMG generation, single-edge edits and structural Hamming distance.

All randomness goes through ``numpy.random.Generator`` backed by PCG64, so a
seed reproduces the same graphs and edit trails on every platform.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .graphs import Admg, CycleError, GraphError, NodeId

DEFAULT_RETRY_BUDGET = 100_000


class EditType(str, enum.Enum):
    REVERSE_DIR = "reverse_dir"
    DIR_TO_BI = "dir_to_bi"
    BI_TO_DIR = "bi_to_dir"
    ADD_DIR = "add_dir"
    DEL_DIR = "del_dir"
    ADD_BI = "add_bi"
    DEL_BI = "del_bi"


ALL_EDITS: tuple[EditType, ...] = tuple(EditType)


class EditBudgetExceeded(RuntimeError):
    pass


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator; ``seed`` may be an int or a sequence of ints."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class GenConfig:
    n_vars: int
    p_dir: float
    n_bi: int
    seed: int = 0

    def __post_init__(self):
        if self.n_vars < 1:
            raise ValueError("n_vars must be positive")
        if not 0.0 <= self.p_dir <= 1.0:
            raise ValueError(f"p_dir must lie in [0, 1], got {self.p_dir}")
        max_bi = self.n_vars * (self.n_vars - 1) // 2
        if not 0 <= self.n_bi <= max_bi:
            raise ValueError(f"n_bi={self.n_bi} exceeds the {max_bi} available pairs")


def node_names(n: int) -> list[NodeId]:
    return [f"X{i + 1}" for i in range(n)]


def gen_er_admg(cfg: GenConfig, rng: np.random.Generator | None = None) -> Admg:
    """Erdos-Renyi ADMG: directed edges along a random order, then ``n_bi`` bidirected pairs."""
    rng = make_rng(cfg.seed) if rng is None else rng
    names = node_names(cfg.n_vars)
    order = [names[i] for i in rng.permutation(cfg.n_vars)]
    directed = []
    for i, j in combinations(range(cfg.n_vars), 2):
        if rng.random() < cfg.p_dir:
            directed.append((order[i], order[j]))
    pairs = list(combinations(names, 2))
    chosen = rng.choice(len(pairs), size=cfg.n_bi, replace=False) if cfg.n_bi else []
    bidirected = [pairs[i] for i in sorted(chosen)]
    return Admg(frozenset(names), frozenset(directed), frozenset(bidirected))


def _acyclic(nodes, directed) -> bool:
    try:
        Admg(nodes, frozenset(directed))
    except CycleError:
        return False
    return True


def _bi_pairs(g: Admg) -> list[tuple[NodeId, NodeId]]:
    return sorted(g.bidirected)


def _edit_targets(g: Admg, t: EditType) -> list[Admg]:
    """Every graph reachable by one legal edit of type ``t``, in a fixed order.

    BiToDir is handled in :func:`apply_edit` since it draws the edge first.
    """
    nodes, dire, bi = g.nodes, set(g.directed), set(g.bidirected)
    out: list[Admg] = []

    def emit(d, b):
        out.append(Admg(nodes, frozenset(d), frozenset(b)))

    if t is EditType.REVERSE_DIR:
        for a, b in sorted(dire):
            new = (dire - {(a, b)}) | {(b, a)}
            if _acyclic(nodes, new):
                emit(new, bi)
    elif t is EditType.DEL_DIR:
        for e in sorted(dire):
            emit(dire - {e}, bi)
    elif t is EditType.DIR_TO_BI:
        for a, b in sorted(dire):
            pair = tuple(sorted((a, b)))
            if pair not in bi:
                emit(dire - {(a, b)}, bi | {pair})
    elif t is EditType.DEL_BI:
        for e in _bi_pairs(g):
            emit(dire, bi - {e})
    elif t is EditType.ADD_BI:
        for pair in combinations(sorted(nodes), 2):
            if pair not in bi:
                emit(dire, bi | {pair})
    elif t is EditType.ADD_DIR:
        for a in sorted(nodes):
            for b in sorted(nodes):
                if a != b and (a, b) not in dire:
                    new = dire | {(a, b)}
                    if _acyclic(nodes, new):
                        emit(new, bi)
    return out


def _bi_orientations(g: Admg, pair) -> list[tuple[NodeId, NodeId]]:
    a, b = pair
    dire = set(g.directed)
    return [e for e in ((a, b), (b, a)) if e not in dire and _acyclic(g.nodes, dire | {e})]


def edit_neighbours(g: Admg, t: EditType) -> list[Admg]:
    """All graphs one legal edit of type ``t`` away, in a fixed order."""
    t = EditType(t)
    if t is not EditType.BI_TO_DIR:
        return _edit_targets(g, t)
    return [
        Admg(g.nodes, g.directed | {e}, g.bidirected - {pair})
        for pair in _bi_pairs(g)
        for e in _bi_orientations(g, pair)
    ]


def apply_edit(g: Admg, t: EditType, rng: np.random.Generator) -> Optional[Admg]:
    """Apply one edit chosen uniformly among legal targets, or return None if there is none."""
    t = EditType(t)
    if t is EditType.BI_TO_DIR:
        legal = [p for p in _bi_pairs(g) if _bi_orientations(g, p)]
        if not legal:
            return None
        pair = legal[int(rng.integers(len(legal)))]
        opts = _bi_orientations(g, pair)
        edge = opts[int(rng.integers(len(opts)))]
        return Admg(g.nodes, g.directed | {edge}, g.bidirected - {pair})
    targets = _edit_targets(g, t)
    if not targets:
        return None
    return targets[int(rng.integers(len(targets)))]


def apply_k_edits(
    g: Admg,
    k: int,
    types: Sequence[EditType] = ALL_EDITS,
    rng: np.random.Generator | None = None,
    budget: int = DEFAULT_RETRY_BUDGET,
) -> tuple[Admg, list[EditType]]:
    """Apply ``k`` successful edits, drawing each type uniformly from ``types``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    types = sorted({EditType(t) for t in types}, key=ALL_EDITS.index)
    if not types:
        raise ValueError("no edit types given")
    rng = make_rng(0) if rng is None else rng
    applied: list[EditType] = []
    for _ in range(budget):
        t = types[int(rng.integers(len(types)))]
        new = apply_edit(g, t, rng)
        if new is None:
            continue
        g = new
        applied.append(t)
        if len(applied) == k:
            return g, applied
    raise EditBudgetExceeded(f"only {len(applied)} of {k} edits succeeded within {budget} draws")


def _pair_config(g: Admg, a: NodeId, b: NodeId) -> tuple[int, bool]:
    d = ((a, b) in g.directed) + 2 * ((b, a) in g.directed)
    return d, tuple(sorted((a, b))) in g.bidirected


def shd(g: Admg, h: Admg) -> int:
    """Unordered pairs whose (directed, bidirected) configuration differs."""
    if g.nodes != h.nodes:
        raise GraphError("graphs have different node sets")
    return sum(
        _pair_config(g, a, b) != _pair_config(h, a, b) for a, b in combinations(sorted(g.nodes), 2)
    )
