from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import admgs, graph
from fid.graphs import Admg, GraphError
from fid.perturb import (
    ALL_EDITS,
    EditBudgetExceeded,
    EditType,
    GenConfig,
    apply_edit,
    apply_k_edits,
    edit_neighbours,
    gen_er_admg,
    make_rng,
    shd,
)


def test_gen_extremes():
    empty = gen_er_admg(GenConfig(5, 0.0, 0, seed=1))
    assert len(empty.nodes) == 5 and not empty.directed and not empty.bidirected
    full = gen_er_admg(GenConfig(5, 1.0, 0, seed=1))
    assert len(full.directed) == 10 and not full.bidirected


def test_gen_exact_bidirected_count():
    for n_bi in range(11):
        assert len(gen_er_admg(GenConfig(5, 0.5, n_bi, seed=n_bi)).bidirected) == n_bi


@pytest.mark.parametrize("kwargs", [dict(n_bi=11), dict(p_dir=1.5), dict(p_dir=-0.1), dict(n_vars=0)])
def test_gen_config_validation(kwargs):
    base = dict(n_vars=5, p_dir=0.5, n_bi=1)
    base.update(kwargs)
    with pytest.raises(ValueError):
        GenConfig(**base)


def test_gen_is_deterministic():
    cfg = GenConfig(5, 0.4, 2, seed=99)
    assert gen_er_admg(cfg) == gen_er_admg(cfg)
    assert gen_er_admg(cfg) != gen_er_admg(GenConfig(5, 0.4, 2, seed=100))


def test_expected_directed_edge_count():
    rng = make_rng(2024)
    p, pairs, draws = 0.3, 10, 1000
    counts = [len(gen_er_admg(GenConfig(5, p, 0), rng).directed) for _ in range(draws)]
    sigma = np.sqrt(pairs * p * (1 - p) / draws)
    assert abs(np.mean(counts) - p * pairs) <= 3 * sigma


def test_del_dir_single_edge():
    g = graph("A -> B")
    out = apply_edit(g, EditType.DEL_DIR, make_rng(0))
    assert out == Admg(g.nodes)


def test_reverse_dir_excludes_cycle_creating_targets():
    g = graph("A -> B\nB -> C\nA -> C")
    outs = edit_neighbours(g, EditType.REVERSE_DIR)
    assert len(outs) == 2
    assert all(("C", "A") not in h.directed for h in outs)
    assert any(("B", "A") in h.directed for h in outs)


def test_inapplicable_edits():
    g = graph("A -> B")
    assert apply_edit(g, EditType.DEL_BI, make_rng(0)) is None
    assert apply_edit(g, EditType.BI_TO_DIR, make_rng(0)) is None
    assert apply_edit(graph("nodes: A"), EditType.ADD_DIR, make_rng(0)) is None


def test_add_edits_skip_existing_edges():
    g = graph("A -> B\nA <-> B")
    assert apply_edit(g, EditType.ADD_BI, make_rng(0)) is None
    assert apply_edit(g, EditType.ADD_DIR, make_rng(0)) is None


def test_bi_to_dir_orientations():
    g = graph("A -> B\nB -> C\nA <-> C")
    outs = edit_neighbours(g, EditType.BI_TO_DIR)
    assert [sorted(h.directed) for h in outs] == [[("A", "B"), ("A", "C"), ("B", "C")]]
    assert not any(h.bidirected for h in outs)


@settings(max_examples=80, deadline=None)
@given(admgs(min_nodes=2, max_nodes=5), st.sampled_from(ALL_EDITS), st.integers(0, 2**32 - 1))
def test_edits_keep_admg_invariants(g, t, seed):
    out = apply_edit(g, t, make_rng(seed))
    if out is None:
        assert edit_neighbours(g, t) == []
        return
    assert out.nodes == g.nodes
    assert out in edit_neighbours(g, t)
    Admg(out.nodes, out.directed, out.bidirected)  # re-validates acyclicity
    assert shd(g, out) >= 1


def test_apply_k_edits_examples():
    with pytest.raises(ValueError):
        apply_k_edits(graph("A -> B"), 0)
    out, applied = apply_k_edits(graph("A -> B"), 1, [EditType.DEL_DIR], make_rng(0))
    assert out == Admg(frozenset({"A", "B"})) and applied == [EditType.DEL_DIR]
    g = gen_er_admg(GenConfig(5, 0.5, 2, seed=3))
    out, applied = apply_k_edits(g, 5, rng=make_rng(4))
    assert len(applied) == 5 and out.nodes == g.nodes


def test_apply_k_edits_is_deterministic():
    g = gen_er_admg(GenConfig(5, 0.5, 2, seed=3))
    assert apply_k_edits(g, 3, rng=make_rng(8)) == apply_k_edits(g, 3, rng=make_rng(8))


def test_apply_k_edits_budget():
    with pytest.raises(EditBudgetExceeded):
        apply_k_edits(graph("nodes: A B"), 2, [EditType.DEL_DIR], make_rng(0), budget=50)


def test_shd_examples():
    assert shd(graph("A -> B"), graph("A <-> B")) == 1
    assert shd(graph("A -> B"), graph("B -> A\nA <-> B")) == 1
    g = graph("A -> B\nB -> C")
    assert shd(g, g) == 0
    with pytest.raises(GraphError):
        shd(graph("A -> B"), graph("A -> C"))


@settings(max_examples=60, deadline=None)
@given(admgs(min_nodes=3, max_nodes=3), admgs(min_nodes=3, max_nodes=3))
def test_shd_properties(a, b):
    n = len(a.nodes)
    assert shd(a, b) == shd(b, a)
    assert 0 <= shd(a, b) <= n * (n - 1) // 2
    differing = sum(
        ((x, y) in a.directed, (y, x) in a.directed, (x, y) in a.bidirected or (y, x) in a.bidirected)
        != ((x, y) in b.directed, (y, x) in b.directed, (x, y) in b.bidirected or (y, x) in b.bidirected)
        for x, y in combinations(sorted(a.nodes), 2)
    )
    assert shd(a, b) == differing
