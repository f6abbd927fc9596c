"""Discrete latent-variable models as numeric ground truth.

Tables are dense numpy arrays with one axis per variable, in the order
given by ``Table.vars``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Mapping

import numpy as np

from .expr import Density, Expr, Fraction, Integral, Product
from .graphs import Admg, DagWithLatents, NodeId, embed_latents, latent_project

CPT_FLOOR = 0.05


@dataclass(frozen=True)
class Table:
    vars: tuple[NodeId, ...]
    values: np.ndarray

    def aligned(self, order: tuple[NodeId, ...]) -> np.ndarray:
        """View broadcastable against a table over ``order`` (a superset of ``vars``)."""
        perm = sorted(range(len(self.vars)), key=lambda i: order.index(self.vars[i]))
        arr = np.transpose(self.values, perm)
        present = {self.vars[i] for i in perm}
        shape, it = [], iter(arr.shape)
        for v in order:
            shape.append(next(it) if v in present else 1)
        return arr.reshape(shape)

    def marginal(self, keep) -> "Table":
        keep = [v for v in self.vars if v in set(keep)]
        axes = tuple(i for i, v in enumerate(self.vars) if v not in keep)
        return Table(tuple(keep), self.values.sum(axis=axes))

    def __getitem__(self, assignment: Mapping[NodeId, int]) -> float:
        return float(self.values[tuple(assignment[v] for v in self.vars)])


def _binop(a: Table, b: Table, op) -> Table:
    order = tuple(sorted(set(a.vars) | set(b.vars)))
    return Table(order, op(a.aligned(order), b.aligned(order)) + np.zeros(()))


def _broadcast_full(t: Table, order: tuple[NodeId, ...], cards: Mapping[NodeId, int]) -> np.ndarray:
    return np.broadcast_to(t.aligned(order), tuple(cards[v] for v in order))


@dataclass
class DiscreteScm:
    graph: DagWithLatents
    cardinalities: dict[NodeId, int]
    cpts: dict[NodeId, np.ndarray]  # axes: sorted parents..., node
    parents: dict[NodeId, tuple[NodeId, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.parents:
            pa = {v: [] for v in self.graph.nodes}
            for a, b in self.graph.directed:
                pa[b].append(a)
            self.parents = {v: tuple(sorted(ps)) for v, ps in pa.items()}
        for v, cpt in self.cpts.items():
            want = tuple(self.cardinalities[u] for u in self.parents[v]) + (self.cardinalities[v],)
            if cpt.shape != want:
                raise ValueError(f"CPT for {v} has shape {cpt.shape}, expected {want}")
            if not np.allclose(cpt.sum(axis=-1), 1.0, atol=1e-12):
                raise ValueError(f"CPT rows for {v} do not sum to 1")
            if (cpt <= 0).any():
                raise ValueError(f"CPT for {v} is not strictly positive")

    def _joint(self, do: Mapping[NodeId, int] | None = None) -> Table:
        do = dict(do or {})
        order = tuple(sorted(self.graph.nodes))
        total = np.ones(tuple(self.cardinalities[v] for v in order))
        for v in order:
            if v in do:
                point = np.zeros(self.cardinalities[v])
                point[do[v]] = 1.0
                factor = Table((v,), point)
            else:
                factor = Table(self.parents[v] + (v,), self.cpts[v])
            total = total * factor.aligned(order)
        return Table(order, total)

    def observational(self) -> Table:
        return self._joint().marginal(self.graph.observed)

    def interventional(self, do: Mapping[NodeId, int]) -> Table:
        """Distribution over the observed nodes not intervened on."""
        keep = self.graph.observed - set(do)
        return self._joint(do).marginal(keep)


def random_cpt(rng: np.random.Generator, n_parent_configs: tuple[int, ...], card: int, floor: float = CPT_FLOOR):
    if floor * card >= 1:
        raise ValueError("probability floor too large for the cardinality")
    raw = rng.dirichlet(np.ones(card), size=n_parent_configs)
    return floor + (1 - floor * card) * raw


def scm_for_admg(g: Admg, card: int | Mapping[NodeId, int] = 2, seed: int = 0) -> DiscreteScm:
    """Random strictly positive discrete model whose latent projection is ``g``.

    Each bidirected edge becomes one latent common parent.
    """
    dag = embed_latents(g)
    assert latent_project(dag) == g
    rng = np.random.default_rng(seed)
    if isinstance(card, int):
        cards = {v: card for v in dag.nodes}
    else:
        cards = {v: card.get(v, 2) for v in dag.nodes}
    scm = DiscreteScm(dag, cards, {})
    cpts = {}
    for v in sorted(dag.nodes):
        shape = tuple(cards[u] for u in scm.parents[v])
        cpts[v] = random_cpt(rng, shape, cards[v])
    scm.cpts = cpts
    scm.__post_init__()
    return scm


def evaluate(e: Expr, obs: Table) -> Table:
    """Numeric value of ``e`` as a table over its free variables."""
    if isinstance(e, Density):
        if not e.vars:
            return Table((), np.array(1.0))
        joint = obs.marginal(e.vars + e.given)
        if not e.given:
            return joint
        return _binop(joint, obs.marginal(e.given), np.divide)
    if isinstance(e, Product):
        return reduce(lambda a, b: _binop(a, b, np.multiply), (evaluate(f, obs) for f in e.factors),
                      Table((), np.array(1.0)))
    if isinstance(e, Fraction):
        den = evaluate(e.den, obs)
        if (den.values == 0).any():
            raise ZeroDivisionError("division by a zero marginal")
        return _binop(evaluate(e.num, obs), den, np.divide)
    if isinstance(e, Integral):
        body = evaluate(e.body, obs)
        cards = dict(zip(obs.vars, obs.values.shape))
        # variables bound but absent from the body still range over their domain
        order = tuple(sorted(set(body.vars) | set(e.vars)))
        full = Table(order, _broadcast_full(body, order, cards))
        return full.marginal(set(order) - set(e.vars))
    raise TypeError(f"not an expression: {e!r}")


def eval_expr(e: Expr, obs: Table, assignment: Mapping[NodeId, int]) -> float:
    return evaluate(e, obs)[assignment]


def tables_close(a: Table, b: Table, cards: Mapping[NodeId, int], atol: float = 1e-9) -> bool:
    """Compare two tables after broadcasting both to the union of their variables."""
    order = tuple(sorted(set(a.vars) | set(b.vars)))
    return bool(np.allclose(_broadcast_full(a, order, cards), _broadcast_full(b, order, cards), rtol=0, atol=atol))


def max_tv_to_truth(e: Expr, scm: DiscreteScm, treatment: NodeId, outcome: NodeId) -> float:
    """Largest total-variation gap between ``e`` and ``p(y | do(t))``.

    Taken over every value of ``t`` and every assignment of any other free
    variable the estimand mentions.
    """
    obs = scm.observational()
    cards = scm.cardinalities
    val = evaluate(e, obs)
    extra = tuple(v for v in val.vars if v not in (treatment, outcome))
    order = (treatment,) + extra + (outcome,)
    est = _broadcast_full(val, tuple(sorted(order)), cards)
    est = Table(tuple(sorted(order)), est)
    est_arr = np.transpose(est.values, [est.vars.index(v) for v in order])
    worst = 0.0
    for t in range(cards[treatment]):
        truth = scm.interventional({treatment: t}).marginal([outcome]).values
        block = est_arr[t].reshape(-1, cards[outcome])
        worst = max(worst, float(0.5 * np.abs(block - truth).sum(axis=1).max()))
    return worst
