from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest
from hypothesis import strategies as st

from fid.graphs import Admg
from fid.io import loads


def graph(text: str, kind: str = "admg"):
    """Build a graph from edge lines; the node header is inferred when absent."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not any(ln.startswith("nodes:") for ln in lines):
        names = set()
        for ln in lines:
            for tok in ln.replace("<->", " ").replace("->", " ").replace("--", " ").split():
                names.add(tok)
        lines.insert(0, "nodes: " + " ".join(sorted(names)))
    return loads("\n".join(lines), kind)


BACKDOOR = "X2 -> X1\nX2 -> X3\nX1 -> X3"
CHAIN = "nodes: X1 X2 X3\nX2 -> X1\nX1 -> X3"
TWO_ROOT_DAG = "X1 -> X2\nX2 -> X3\nX4 -> X2\nX4 -> X3"
CONFOUNDED_CHAIN = "X1 -> X2\nX2 -> X3\nX2 <-> X3"
BOW = "T -> Y\nT <-> Y"


def random_admg(rng: np.random.Generator, n: int, p_dir: float = 0.5, n_bi: int | None = None) -> Admg:
    names = [f"X{i + 1}" for i in range(n)]
    order = [names[i] for i in rng.permutation(n)]
    directed = [(order[i], order[j]) for i, j in combinations(range(n), 2) if rng.random() < p_dir]
    pairs = list(combinations(names, 2))
    if n_bi is None:
        n_bi = int(rng.integers(0, min(3, len(pairs)) + 1))
    n_bi = min(n_bi, len(pairs))
    chosen = rng.choice(len(pairs), size=n_bi, replace=False) if n_bi else []
    return Admg(frozenset(names), frozenset(directed), frozenset(pairs[i] for i in chosen))


@st.composite
def admgs(draw, min_nodes: int = 1, max_nodes: int = 5):
    n = draw(st.integers(min_nodes, max_nodes))
    names = [f"X{i + 1}" for i in range(n)]
    order = draw(st.permutations(names))
    pairs = list(combinations(range(n), 2))
    dir_mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    bi_mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    directed = [(order[i], order[j]) for (i, j), on in zip(pairs, dir_mask) if on]
    bidirected = [tuple(sorted((names[i], names[j]))) for (i, j), on in zip(pairs, bi_mask) if on]
    return Admg(frozenset(names), frozenset(directed), frozenset(bidirected))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
