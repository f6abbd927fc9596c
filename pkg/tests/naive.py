"""Deliberately simple reference implementations used as test oracles.

Everything here works on raw edge sets and recomputes from scratch, sharing
no code with the library beyond the ``Admg`` container.
"""

from __future__ import annotations


def _components(nodes, bidirected):
    nodes = set(nodes)
    comps, seen = [], set()
    for start in sorted(nodes):
        if start in seen:
            continue
        comp, stack = {start}, [start]
        while stack:
            v = stack.pop()
            for a, b in bidirected:
                for u, w in ((a, b), (b, a)):
                    if u == v and w in nodes and w not in comp:
                        comp.add(w)
                        stack.append(w)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def _fixable(random, directed, bidirected, r):
    dis = next(c for c in _components(random, bidirected) if r in c)
    return not (descendants(directed, r) & dis)


def _fix(directed, bidirected, r):
    return (
        {(a, b) for a, b in directed if b != r},
        {(a, b) for a, b in bidirected if r not in (a, b)},
    )


def fixing_sequences(nodes, directed, bidirected, keep):
    """Every valid ordering of ``nodes - keep``, by plain recursion."""
    out = []

    def rec(random, d, b, seq):
        todo = random - set(keep)
        if not todo:
            out.append(tuple(seq))
            return
        for r in sorted(todo):
            if _fixable(random, d, b, r):
                d2, b2 = _fix(d, b, r)
                rec(random - {r}, d2, b2, seq + [r])

    rec(set(nodes), set(directed), set(bidirected), [])
    return out


def intrinsic_sets(nodes, directed, bidirected):
    found = set()

    def rec(random, d, b):
        found.update(_components(random, b))
        for r in sorted(random):
            if _fixable(random, d, b, r):
                d2, b2 = _fix(d, b, r)
                rec(random - {r}, d2, b2)

    rec(set(nodes), set(directed), set(bidirected))
    return {s for s in found if s}


def ancestors(directed, target, allowed):
    out, frontier = set(), {target}
    while frontier:
        new = {a for a, b in directed if b in frontier and a in allowed and a not in out}
        out |= new
        frontier = new
    return out


def descendants(directed, source):
    out, frontier = set(), {source}
    while frontier:
        new = {b for a, b in directed if a in frontier and b not in out}
        out |= new
        frontier = new
    return out


def is_identifiable(nodes, directed, bidirected, t, y):
    rest = set(nodes) - {t}
    ystar = ancestors(directed, y, rest) | {y}
    sub_bi = {(a, b) for a, b in bidirected if a in ystar and b in ystar}
    intrinsic = intrinsic_sets(nodes, directed, bidirected)
    return all(d in intrinsic for d in _components(ystar, sub_bi))
