"""Perturbation sweeps over random ADMGs and their aggregate tables.

A sweep draws reference graphs on a ``(p_dir, n_bi)`` grid and produces
three families of instances:

``single``
    one legal edit of each type per reference graph (or every legal edit
    location with ``single_edit = "exhaustive"``)
``multi``
    ``k`` successful edits with types drawn uniformly, for each ``k``
``mag``
    reference and ``k``-edit candidate both projected to MAGs, compared by
    SHD and symmetric normalized FID

Every instance derives its own PCG64 seed from the config seed and its grid
coordinates, so results do not depend on worker scheduling.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import signal
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .distance import MissPolicy, fid
from .fixing import DEFAULT_CAP
from .graphs import Admg, m_separated
from .mag import admg_to_mag
from .perturb import (
    ALL_EDITS,
    EditType,
    GenConfig,
    apply_edit,
    apply_k_edits,
    edit_neighbours,
    gen_er_admg,
    make_rng,
    shd,
)

log = logging.getLogger(__name__)

DEFAULT_P_DIR = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]
DEFAULT_N_BI = [1, 2, 3]

# stream tags keep the per-family seed sequences apart
_REF, _SINGLE, _MULTI, _MAG = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    n_vars: int = 5
    p_dir: tuple[float, ...] = tuple(DEFAULT_P_DIR)
    n_bi: tuple[int, ...] = tuple(DEFAULT_N_BI)
    graphs_per_cell: int = 20
    k: tuple[int, ...] = (1, 2, 3, 4, 5)
    edit_types: tuple[EditType, ...] = ALL_EDITS
    seed: int = 0
    single_edit: str = "sample"
    mag_k: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7)
    timeout: float = 60.0
    cap: int | None = DEFAULT_CAP
    miss_policy: MissPolicy = MissPolicy.ERROR

    def __post_init__(self):
        if self.graphs_per_cell < 0:
            raise ConfigError("graphs_per_cell must be non-negative")
        if self.single_edit not in ("sample", "exhaustive"):
            raise ConfigError(f"single_edit must be 'sample' or 'exhaustive', got {self.single_edit!r}")
        if any(k < 1 for k in self.k + self.mag_k):
            raise ConfigError("edit counts must be at least 1")
        if not self.edit_types:
            raise ConfigError("edit_types must not be empty")
        for p in self.p_dir:
            for b in self.n_bi:
                GenConfig(self.n_vars, p, b)  # validates the grid

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        kw = dict(d)
        for key in ("p_dir", "n_bi", "k", "mag_k"):
            if key in kw:
                kw[key] = tuple(kw[key])
        if "edit_types" in kw:
            try:
                kw["edit_types"] = tuple(EditType(t) for t in kw["edit_types"])
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if "miss_policy" in kw:
            kw["miss_policy"] = MissPolicy(kw["miss_policy"])
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path: str | os.PathLike) -> "SweepConfig":
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return cls.from_dict(data)


@dataclass(frozen=True)
class RefGraph:
    index: int
    p_index: int
    p_dir: float
    n_bi: int
    replicate: int


def reference_grid(cfg: SweepConfig) -> list[RefGraph]:
    out = []
    for ip, p in enumerate(cfg.p_dir):
        for b in cfg.n_bi:
            for r in range(cfg.graphs_per_cell):
                out.append(RefGraph(len(out), ip, p, b, r))
    return out


def reference_graph(cfg: SweepConfig, ref: RefGraph) -> Admg:
    rng = make_rng([cfg.seed, _REF, ref.p_index, ref.n_bi, ref.replicate])
    return gen_er_admg(GenConfig(cfg.n_vars, ref.p_dir, ref.n_bi), rng)


@dataclass(frozen=True)
class Task:
    family: str
    ref: RefGraph
    k: int = 1
    edit: EditType | None = None  # single family only


def tasks(cfg: SweepConfig) -> list[Task]:
    refs = reference_grid(cfg)
    out = [Task("single", r, 1, e) for r in refs for e in cfg.edit_types]
    out += [Task("multi", r, k) for r in refs for k in cfg.k]
    out += [Task("mag", r, k) for r in refs for k in cfg.mag_k]
    return out


class InstanceTimeout(Exception):
    pass


@contextmanager
def time_limit(seconds: float | None):
    """Wall-clock limit via SIGALRM; a no-op off the main thread or when disabled."""
    if not seconds or not hasattr(signal, "setitimer"):
        yield
        return

    def handler(signum, frame):
        raise InstanceTimeout()

    try:
        old = signal.signal(signal.SIGALRM, handler)
    except ValueError:  # not the main thread
        yield
        return
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def markov_equivalent(g: Admg, h: Admg) -> bool:
    """Same m-separation verdict for every pair and every conditioning set."""
    nodes = g.sorted_nodes()
    for a, b in combinations(nodes, 2):
        rest = [v for v in nodes if v not in (a, b)]
        for r in range(len(rest) + 1):
            for z in combinations(rest, r):
                if m_separated(g, a, b, z) != m_separated(h, a, b, z):
                    return False
    return True


INSTANCE_COLUMNS = [
    "family", "ref", "p_dir", "n_bi", "replicate", "k", "location", "edits",
    "d_gh", "d_hg", "d_sym", "shd", "truncated", "status",
]
MAG_COLUMNS = [
    "ref", "p_dir", "n_bi", "replicate", "k", "edits", "mag_shd", "mag_d_sym",
    "ref_projectable", "cand_projectable", "truncated", "status",
]


def _row(task: Task, **kw) -> dict:
    r = task.ref
    base = dict(family=task.family, ref=r.index, p_dir=r.p_dir, n_bi=r.n_bi,
                replicate=r.replicate, k=task.k, location="", edits="",
                d_gh=None, d_hg=None, d_sym=None, shd=None, truncated=False, status="ok")
    base.update(kw)
    return base


def _compare(cfg: SweepConfig, g: Admg, h: Admg) -> dict:
    a = fid(g, h, cap=cfg.cap, policy=cfg.miss_policy)
    b = fid(h, g, cap=cfg.cap, policy=cfg.miss_policy)
    return dict(d_gh=a.normalized, d_hg=b.normalized, d_sym=(a.normalized + b.normalized) / 2,
                shd=shd(g, h), truncated=a.truncated or b.truncated)


def run_task(cfg: SweepConfig, task: Task) -> list[dict]:
    r = task.ref
    try:
        with time_limit(cfg.timeout):
            g = reference_graph(cfg, r)
            if task.family == "single":
                return _run_single(cfg, task, g)
            if task.family == "multi":
                rng = make_rng([cfg.seed, _MULTI, r.index, task.k])
                h, applied = apply_k_edits(g, task.k, cfg.edit_types, rng)
                return [_row(task, edits=";".join(e.value for e in applied), **_compare(cfg, g, h))]
            return [_run_mag(cfg, task, g)]
    except InstanceTimeout:
        status = "timeout"
    except Exception as exc:  # recorded as a flagged row, never a crash
        log.warning("instance %s failed: %r", task, exc)
        status = f"error:{type(exc).__name__}"
    if task.family == "mag":
        return [dict(ref=r.index, p_dir=r.p_dir, n_bi=r.n_bi, replicate=r.replicate, k=task.k,
                     edits="", mag_shd=None, mag_d_sym=None, ref_projectable=None,
                     cand_projectable=None, truncated=False, status=status)]
    edit = task.edit.value if task.edit else ""
    return [_row(task, edits=edit, status=status)]


def _run_single(cfg: SweepConfig, task: Task, g: Admg) -> list[dict]:
    e = task.edit
    if cfg.single_edit == "exhaustive":
        hs = edit_neighbours(g, e)
    else:
        rng = make_rng([cfg.seed, _SINGLE, task.ref.index, ALL_EDITS.index(e)])
        h = apply_edit(g, e, rng)
        hs = [] if h is None else [h]
    if not hs:
        return [_row(task, edits=e.value, status="inapplicable")]
    return [_row(task, edits=e.value, location=i, **_compare(cfg, g, h)) for i, h in enumerate(hs)]


def _run_mag(cfg: SweepConfig, task: Task, g: Admg) -> dict:
    r = task.ref
    rng = make_rng([cfg.seed, _MAG, r.index, task.k])
    h, applied = apply_k_edits(g, task.k, cfg.edit_types, rng)
    gm, hm = admg_to_mag(g), admg_to_mag(h)
    g_ok, h_ok = markov_equivalent(g, gm), markov_equivalent(h, hm)
    row = dict(ref=r.index, p_dir=r.p_dir, n_bi=r.n_bi, replicate=r.replicate, k=task.k,
               edits=";".join(e.value for e in applied), mag_shd=None, mag_d_sym=None,
               ref_projectable=g_ok, cand_projectable=h_ok, truncated=False, status="ok")
    if not (g_ok and h_ok):
        row["status"] = "non_projectable"
        return row
    cmp = _compare(cfg, gm, hm)
    row.update(mag_shd=cmp["shd"], mag_d_sym=cmp["d_sym"], truncated=cmp["truncated"])
    return row


def _run_chunk(args) -> list[list[dict]]:
    cfg, chunk = args
    return [run_task(cfg, t) for t in chunk]


def run_tasks(cfg: SweepConfig, todo: Sequence[Task], workers: int = 1) -> list[list[dict]]:
    """Results in task order, whatever the number of workers."""
    if workers <= 1 or len(todo) < 2:
        return [run_task(cfg, t) for t in todo]
    # chunk by reference graph so each worker reuses its identification caches
    by_ref: dict[int, list[int]] = {}
    for i, t in enumerate(todo):
        by_ref.setdefault(t.ref.index, []).append(i)
    groups = list(by_ref.values())
    out: list = [None] * len(todo)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunks = [(cfg, [todo[i] for i in grp]) for grp in groups]
        for grp, res in zip(groups, pool.map(_run_chunk, chunks)):
            for i, r in zip(grp, res):
                out[i] = r
    return out


# -- aggregation ---------------------------------------------------------------


def _mean(xs: Sequence[float]) -> float | None:
    return float(np.mean(xs)) if len(xs) else None


def _se(xs: Sequence[float]) -> float | None:
    if len(xs) < 2:
        return None
    return float(np.std(xs, ddof=1) / math.sqrt(len(xs)))


def usable(rows: Iterable[dict]) -> list[dict]:
    return [r for r in rows if r["status"] == "ok"]


def cell_table(rows: list[dict], cfg: SweepConfig, family: str, column_key: str,
               columns: Sequence, value: str) -> list[list]:
    """Rows ``(n_bi, p_dir)`` by ``columns`` of mean ``value``."""
    out = []
    for b in cfg.n_bi:
        for p in cfg.p_dir:
            line = [b, p]
            for c in columns:
                xs = [r[value] for r in rows
                      if r["family"] == family and r["n_bi"] == b and r["p_dir"] == p and r[column_key] == c]
                line.append(_mean(xs))
            out.append(line)
    return out


def edit_type_table(rows: list[dict], cfg: SweepConfig) -> list[list]:
    out = []
    for e in cfg.edit_types:
        sel = [r for r in rows if r["family"] == "single" and r["edits"] == e.value]
        gh = [r["d_gh"] for r in sel]
        hg = [r["d_hg"] for r in sel]
        sym = [r["d_sym"] for r in sel]
        out.append([e.value, len(sel), _mean(gh), _se(gh), _mean(hg), _se(hg), _mean(sym), _se(sym)])
    return out


def grouping_table(rows: list[dict], key: str, groups: Sequence) -> list[list]:
    out = []
    for gval in groups:
        sel = [r for r in rows if r["family"] == "multi" and r[key] == gval]
        out.append([gval, len(sel), _mean([r["d_gh"] for r in sel]), _mean([r["d_hg"] for r in sel]),
                    _mean([r["d_sym"] for r in sel])])
    return out


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    if len(xs) < 2 or np.std(xs) == 0 or np.std(ys) == 0:
        return None
    return float(np.corrcoef(xs, ys)[0, 1])


# -- output ----------------------------------------------------------------------


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.6f}"
    return str(x)


def round_floats(obj, ndigits: int = 6):
    """Round every float inside nested dicts and lists."""
    if isinstance(obj, float):
        return round(obj, ndigits)
    if isinstance(obj, dict):
        return {k: round_floats(v, ndigits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, ndigits) for v in obj]
    return obj


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])


@dataclass
class SweepResult:
    instances: list[dict]
    mag_rows: list[dict]
    summary: dict = field(default_factory=dict)


def run_sweep(cfg: SweepConfig, out_dir: str | os.PathLike | None = None, workers: int = 1) -> SweepResult:
    todo = tasks(cfg)
    log.info("sweep: %d reference graphs, %d tasks", len(reference_grid(cfg)), len(todo))
    results = run_tasks(cfg, todo, workers)
    inst = [row for t, rs in zip(todo, results) if t.family != "mag" for row in rs]
    mags = [row for t, rs in zip(todo, results) if t.family == "mag" for row in rs]
    res = SweepResult(inst, mags, summarize(cfg, inst, mags))
    if out_dir is not None:
        write_outputs(cfg, res, Path(out_dir))
    return res


def summarize(cfg: SweepConfig, inst: list[dict], mags: list[dict]) -> dict:
    ok = usable(inst)
    mag_ok = usable(mags)
    flagged = [r for r in inst + mags if r["status"] not in ("ok", "inapplicable", "non_projectable")]
    return {
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg).items()},
        "reference_graphs": len(reference_grid(cfg)),
        "instances": len(inst),
        "inapplicable": sum(r["status"] == "inapplicable" for r in inst),
        "flagged_excluded": len(flagged),
        "truncated": sum(bool(r["truncated"]) for r in inst + mags),
        "mag_pairs": len(mags),
        "mag_non_projectable": sum(r["status"] == "non_projectable" for r in mags),
        "mag_pearson_shd_vs_sym": pearson([r["mag_shd"] for r in mag_ok], [r["mag_d_sym"] for r in mag_ok]),
        "pooled_by_k_gh": {k: _mean([r["d_gh"] for r in ok if r["family"] == "multi" and r["k"] == k])
                           for k in cfg.k},
    }


def write_outputs(cfg: SweepConfig, res: SweepResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "instances.csv", INSTANCE_COLUMNS, ([r[c] for c in INSTANCE_COLUMNS] for r in res.instances))
    write_csv(out / "mag_pairs.csv", MAG_COLUMNS, ([r[c] for c in MAG_COLUMNS] for r in res.mag_rows))
    ok = usable(res.instances)
    edits = [e.value for e in cfg.edit_types]
    head_cells = ["n_bi", "p_dir"]
    write_csv(out / "single_edit_cells_gh.csv", head_cells + edits,
              cell_table(ok, cfg, "single", "edits", edits, "d_gh"))
    write_csv(out / "single_edit_cells_hg.csv", head_cells + edits,
              cell_table(ok, cfg, "single", "edits", edits, "d_hg"))
    ks = list(cfg.k)
    write_csv(out / "k_edit_cells_gh.csv", head_cells + [f"k{k}" for k in ks],
              cell_table(ok, cfg, "multi", "k", ks, "d_gh"))
    write_csv(out / "k_edit_cells_hg.csv", head_cells + [f"k{k}" for k in ks],
              cell_table(ok, cfg, "multi", "k", ks, "d_hg"))
    write_csv(out / "by_edit_type.csv",
              ["edit_type", "n", "mean_gh", "se_gh", "mean_hg", "se_hg", "mean_sym", "se_sym"],
              edit_type_table(ok, cfg))
    gh = ["n", "mean_gh", "mean_hg", "mean_sym"]
    write_csv(out / "by_n_bi.csv", ["n_bi"] + gh, grouping_table(ok, "n_bi", cfg.n_bi))
    write_csv(out / "by_k.csv", ["k"] + gh, grouping_table(ok, "k", cfg.k))
    write_csv(out / "by_p_dir.csv", ["p_dir"] + gh, grouping_table(ok, "p_dir", cfg.p_dir))
    (out / "summary.json").write_text(json.dumps(round_floats(res.summary), indent=2, sort_keys=True, default=str) + "\n")
