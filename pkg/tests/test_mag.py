from __future__ import annotations

from itertools import combinations

import pytest
from hypothesis import given, settings

from conftest import BOW, TWO_ROOT_DAG, CONFOUNDED_CHAIN, BACKDOOR, admgs, graph
from fid.graphs import Cpdag, GraphError, Mag, is_maximal, m_separated
from fid.io import dumps, loads
from fid.mag import (
    ExtensionMode,
    InconsistentCpdag,
    admg_to_mag,
    cpdag_fid_range,
    dag_extensions,
    is_head_pair,
    markov_equiv_dags,
    tail,
)


def cpdag(text: str) -> Cpdag:
    return graph(text, kind="cpdag")


def test_tail_examples():
    assert tail(graph(BOW), "Y") == {"T"}
    assert tail(graph("nodes: A B"), "A") == frozenset()
    assert tail(graph(CONFOUNDED_CHAIN), "X3") == {"X1", "X2"}
    with pytest.raises(GraphError):
        tail(graph(BOW), "Z")


def test_head_pair_examples():
    assert not is_head_pair(graph(BOW), "T", "Y")
    assert not is_head_pair(graph(CONFOUNDED_CHAIN), "X2", "X3")
    assert is_head_pair(graph("A <-> B"), "A", "B")
    with pytest.raises(GraphError):
        is_head_pair(graph("A <-> B"), "A", "A")


def test_admg_to_mag_examples():
    m = admg_to_mag(graph(BOW))
    assert isinstance(m, Mag) and m.directed == {("T", "Y")} and not m.bidirected
    dag = graph(TWO_ROOT_DAG)
    assert admg_to_mag(dag).directed == dag.directed
    assert admg_to_mag(graph("A <-> B")).bidirected == {("A", "B")}


def _all_separations_agree(g, m) -> bool:
    nodes = g.sorted_nodes()
    for x, y in combinations(nodes, 2):
        rest = [v for v in nodes if v not in (x, y)]
        for r in range(len(rest) + 1):
            for z in combinations(rest, r):
                if m_separated(g, x, y, z) != m_separated(m, x, y, z):
                    return False
    return True


@settings(max_examples=120, deadline=None)
@given(admgs(min_nodes=2, max_nodes=5))
def test_projection_is_markov_equivalent_and_maximal(g):
    m = admg_to_mag(g)
    assert is_maximal(m)
    assert _all_separations_agree(g, m)


def test_markov_equiv_dags_examples():
    chain, fork, rev = graph("A -> B\nB -> C"), graph("B -> A\nB -> C"), graph("B -> A\nC -> B")
    assert markov_equiv_dags(chain, fork) and markov_equiv_dags(fork, rev) and markov_equiv_dags(chain, rev)
    assert not markov_equiv_dags(graph("A -> B\nC -> B"), chain)
    assert markov_equiv_dags(chain, chain)
    with pytest.raises(GraphError):
        markov_equiv_dags(graph(BOW), graph(BOW))


def test_dag_extensions_examples():
    full = cpdag("A -> B\nB -> C")
    assert [d.directed for d in dag_extensions(full)] == [full.directed]
    assert len(dag_extensions(cpdag("A -- B"))) == 2
    chain = dag_extensions(cpdag("A -- B\nB -- C"))
    assert len(chain) == 3
    assert all(not ({("A", "B"), ("C", "B")} <= d.directed) for d in chain)


def test_inconsistent_cpdag_raises():
    # either orientation of B -- C creates a v-structure the CPDAG does not list
    c = cpdag("A -> B\nD -> C\nB -- C")
    with pytest.raises(InconsistentCpdag):
        dag_extensions(c)
    with pytest.raises(InconsistentCpdag):
        dag_extensions(c, ExtensionMode.SAMPLE, budget=5)


def test_sampled_extensions_are_members_of_the_class():
    c = cpdag("A -- B\nB -- C\nC -- D")
    exact = {d.directed for d in dag_extensions(c)}
    sampled = dag_extensions(c, ExtensionMode.SAMPLE, budget=30, seed=1)
    assert {d.directed for d in sampled} <= exact
    assert len({d.directed for d in sampled}) == len(sampled)


def test_fid_range_examples():
    d1, d2 = cpdag(BACKDOOR), cpdag("X1 -> X2\nX2 -> X3\nX1 -> X3")
    r = cpdag_fid_range(d1, d2)
    assert r.lo == r.hi and r.n_ref == r.n_cand == 1
    c = cpdag("A -- B\nB -- C")
    assert cpdag_fid_range(c, c).lo == 0.0
    ab = cpdag("A -- B")
    r = cpdag_fid_range(ab, ab)
    assert r.lo == 0.0 and r.hi > 0.0
    with pytest.raises(GraphError):
        cpdag_fid_range(ab, cpdag("A -- C"))


def test_exact_range_contains_sampled_range():
    c1 = cpdag("A -- B\nB -- C\nC -- D")
    c2 = cpdag("A -- B\nB -- C\nB -- D")
    exact = cpdag_fid_range(c1, c2)
    sampled = cpdag_fid_range(c1, c2, mode="sample", budget=10, seed=3)
    assert exact.lo <= sampled.lo <= sampled.hi <= exact.hi


def test_project_mag_output_parses_as_mag():
    m = admg_to_mag(graph(CONFOUNDED_CHAIN))
    assert loads(dumps(m), kind="mag") == m
