"""Symbolic verifier and the fixing identification distance."""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Sequence

from .expr import Density
from .fixing import DEFAULT_CAP
from .graphs import Admg, GraphError
from .identify import PairQuery, Status, identify_all


class MissPolicy(str, enum.Enum):
    """Score when the reference identifies the effect but the candidate does not."""

    ERROR = "error"  # counts as a full miss, score 1
    ZERO = "zero"  # no candidate estimand is unsupported, score 0


@dataclass(frozen=True)
class PairScore:
    pair: PairQuery
    value: float
    g_status: Status
    h_status: Status
    truncated: bool = False


@dataclass
class DistanceReport:
    per_pair: list[PairScore]
    total: float
    normalized: float
    direction: tuple[str, str] = ("G", "H")

    @property
    def truncated(self) -> bool:
        return any(s.truncated for s in self.per_pair)

    def to_json(self) -> dict:
        return {
            "reference": self.direction[0],
            "candidate": self.direction[1],
            "total": self.total,
            "normalized": self.normalized,
            "truncated": self.truncated,
            "pairs": [
                {
                    "T": s.pair.treatment,
                    "Y": s.pair.outcome,
                    "score": s.value,
                    "g_status": s.g_status.value,
                    "h_status": s.h_status.value,
                    "truncated": s.truncated,
                }
                for s in self.per_pair
            ],
        }

    def csv_rows(self) -> list[list]:
        ref, cand = self.direction
        return [
            [ref, cand, s.pair.treatment, s.pair.outcome, s.value,
             s.g_status.value, s.h_status.value, s.truncated]
            for s in self.per_pair
        ]


CSV_HEADER = ["ref", "cand", "T", "Y", "score", "g_status", "h_status", "truncated"]


def all_pairs(g: Admg) -> list[PairQuery]:
    return [PairQuery(t, y) for t, y in permutations(g.sorted_nodes(), 2)]


def _same_nodes(g: Admg, h: Admg) -> None:
    if g.nodes != h.nodes:
        diff = sorted(g.nodes ^ h.nodes)
        raise GraphError(f"graphs have different node sets (differ on {diff})")


def verify(
    g_ref: Admg,
    h_cand: Admg,
    q: PairQuery,
    cap: int | None = DEFAULT_CAP,
    policy: MissPolicy = MissPolicy.ERROR,
) -> PairScore:
    """Fraction of the candidate's canonical estimands not produced by the reference."""
    _same_nodes(g_ref, h_cand)
    eg = identify_all(g_ref, q, cap)
    eh = identify_all(h_cand, q, cap)
    sg, sh = eg.as_set(), eh.as_set()
    marginal = frozenset({Density((q.outcome,))})
    if not sg and not sh:
        value = 0.0
    elif not sg:
        value = 1.0
    elif sh == marginal and sg != marginal:
        value = 1.0
    elif not sh:
        value = 1.0 if MissPolicy(policy) is MissPolicy.ERROR else 0.0
    else:
        value = 1.0 - len(sg & sh) / len(sh)
    return PairScore(q, value, eg.status, eh.status, eg.truncated or eh.truncated)


def fid(
    g: Admg,
    h: Admg,
    pairs: Sequence[PairQuery] | None = None,
    cap: int | None = DEFAULT_CAP,
    policy: MissPolicy = MissPolicy.ERROR,
    names: tuple[str, str] = ("G", "H"),
) -> DistanceReport:
    """Directional distance with ``g`` as reference and ``h`` as candidate."""
    _same_nodes(g, h)
    pairs = all_pairs(g) if pairs is None else list(pairs)
    if not pairs:
        raise ValueError("the pair set must not be empty")
    pairs = sorted(pairs, key=lambda q: (q.treatment, q.outcome))
    scores = [verify(g, h, q, cap, policy) for q in pairs]
    total = float(sum(s.value for s in scores))
    return DistanceReport(scores, total, total / len(scores), names)


def fid_symmetric(
    g1: Admg,
    g2: Admg,
    pairs: Sequence[PairQuery] | None = None,
    cap: int | None = DEFAULT_CAP,
    policy: MissPolicy = MissPolicy.ERROR,
    normalized: bool = False,
) -> float:
    a = fid(g1, g2, pairs, cap, policy)
    b = fid(g2, g1, pairs, cap, policy)
    if normalized:
        return (a.normalized + b.normalized) / 2
    return (a.total + b.total) / 2


def report_csv(reports: Iterable[DistanceReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        for row in r.csv_rows():
            w.writerow([f"{x:.6f}" if isinstance(x, float) else str(x).lower() if isinstance(x, bool) else x
                        for x in row])
    return buf.getvalue()


def report_json(report: DistanceReport, **extra) -> str:
    obj = report.to_json()
    obj.update(extra)
    return json.dumps(obj, indent=2, sort_keys=False)
