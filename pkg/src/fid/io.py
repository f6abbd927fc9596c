"""Reading and writing graphs in the line-based text format or its JSON mirror.

Text format::

    # comment
    nodes: A B C
    latent: L          (DAG with latents only)
    fixed: W           (CADMG only)
    A -> B
    B <-> C
    A -- C             (CPDAG only)
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .graphs import Admg, Cadmg, Cpdag, DagWithLatents, GraphError, Mag

_EDGE_RE = re.compile(r"^([^\s<>-]+)\s*(<->|->|--)\s*([^\s<>-]+)$")
_HEADER_RE = re.compile(r"^(nodes|latent|fixed)\s*:(.*)$")


class ParseError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class GraphSpec:
    """Parsed content before it is turned into a concrete graph class."""

    nodes: list[str] = field(default_factory=list)
    latent: list[str] = field(default_factory=list)
    fixed: list[str] = field(default_factory=list)
    directed: list[tuple[str, str]] = field(default_factory=list)
    bidirected: list[tuple[str, str]] = field(default_factory=list)
    undirected: list[tuple[str, str]] = field(default_factory=list)


def parse_text(text: str) -> GraphSpec:
    spec = GraphSpec()
    seen_nodes = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER_RE.match(line)
        if m:
            key, rest = m.group(1), m.group(2).split()
            if key == "nodes":
                seen_nodes = True
            getattr(spec, key).extend(rest)
            continue
        m = _EDGE_RE.match(line)
        if not m:
            raise ParseError(f"cannot parse {raw.strip()!r}", lineno)
        a, op, b = m.groups()
        if a == b:
            raise ParseError(f"self-loop on {a}", lineno)
        {"->": spec.directed, "<->": spec.bidirected, "--": spec.undirected}[op].append((a, b))
    if not seen_nodes:
        raise ParseError("missing 'nodes:' header")
    known = set(spec.nodes) | set(spec.latent)
    for a, b in spec.directed + spec.bidirected + spec.undirected:
        for x in (a, b):
            if x not in known:
                raise ParseError(f"edge uses undeclared node {x!r}")
    return spec


def parse_json(text: str) -> GraphSpec:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from exc
    if not isinstance(obj, dict) or "nodes" not in obj:
        raise ParseError("JSON graph needs a 'nodes' field")

    def pairs(key):
        out = []
        for e in obj.get(key, []):
            if not (isinstance(e, (list, tuple)) and len(e) == 2):
                raise ParseError(f"bad {key} edge {e!r}")
            out.append((str(e[0]), str(e[1])))
        return out

    return GraphSpec(
        nodes=[str(v) for v in obj["nodes"]],
        latent=[str(v) for v in obj.get("latent", [])],
        fixed=[str(v) for v in obj.get("fixed", [])],
        directed=pairs("directed"),
        bidirected=pairs("bidirected"),
        undirected=pairs("undirected"),
    )


def parse_graph_spec(text: str) -> GraphSpec:
    return parse_json(text) if text.lstrip().startswith("{") else parse_text(text)


def _check_kind(spec: GraphSpec, kind: str) -> None:
    if spec.latent and kind != "dag_latent":
        raise ParseError("'latent:' is only valid for DAGs with latents")
    if spec.fixed and kind != "cadmg":
        raise ParseError("'fixed:' is only valid for CADMGs")
    if spec.undirected and kind != "cpdag":
        raise ParseError("undirected edges '--' are only valid for CPDAGs")
    if spec.bidirected and kind in ("cpdag", "dag_latent"):
        raise ParseError(f"bidirected edges are not allowed in a {kind}")


def build(spec: GraphSpec, kind: str = "admg"):
    _check_kind(spec, kind)
    if kind == "admg":
        return Admg(nodes=spec.nodes, directed=spec.directed, bidirected=spec.bidirected)
    if kind == "mag":
        return Mag(nodes=spec.nodes, directed=spec.directed, bidirected=spec.bidirected)
    if kind == "cadmg":
        return Cadmg(
            nodes=spec.nodes,
            directed=spec.directed,
            bidirected=spec.bidirected,
            fixed_nodes=spec.fixed,
        )
    if kind == "cpdag":
        return Cpdag(nodes=spec.nodes, directed=spec.directed, undirected=spec.undirected)
    if kind == "dag_latent":
        return DagWithLatents(observed=spec.nodes, latent=spec.latent, directed=spec.directed)
    raise ValueError(f"unknown graph kind {kind!r}")


def loads(text: str, kind: str = "admg"):
    return build(parse_graph_spec(text), kind)


def load(path, kind: str = "admg"):
    return loads(Path(path).read_text(), kind)


def dumps(g) -> str:
    lines = ["nodes: " + " ".join(sorted(getattr(g, "observed", None) or g.nodes))]
    if isinstance(g, DagWithLatents):
        if g.latent:
            lines.append("latent: " + " ".join(sorted(g.latent)))
        lines += [f"{a} -> {b}" for a, b in sorted(g.directed)]
        return "\n".join(lines) + "\n"
    if isinstance(g, Cadmg) and g.fixed:
        lines.append("fixed: " + " ".join(sorted(g.fixed)))
    lines += [f"{a} -> {b}" for a, b in sorted(g.directed)]
    lines += [f"{a} <-> {b}" for a, b in sorted(getattr(g, "bidirected", ()))]
    lines += [f"{a} -- {b}" for a, b in sorted(getattr(g, "undirected", ()))]
    return "\n".join(lines) + "\n"


def to_json(g) -> dict:
    out = {"nodes": sorted(getattr(g, "observed", None) or g.nodes)}
    if isinstance(g, DagWithLatents):
        out["latent"] = sorted(g.latent)
    if isinstance(g, Cadmg):
        out["fixed"] = sorted(g.fixed)
    out["directed"] = [list(e) for e in sorted(g.directed)]
    if hasattr(g, "bidirected"):
        out["bidirected"] = [list(e) for e in sorted(g.bidirected)]
    if hasattr(g, "undirected"):
        out["undirected"] = [list(e) for e in sorted(g.undirected)]
    return out
