"""Command-line entry point: ``fid <command> ...``.

Exit codes: 0 success, 2 bad usage or input, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Sequence

from .distance import MissPolicy, fid, report_csv
from .fixing import DEFAULT_CAP
from .graphs import GraphError
from .identify import PairQuery, Status, identify_all
from .io import dumps, load
from .mag import ExtensionMode, admg_to_mag, cpdag_fid_range
from .sweep import ConfigError, SweepConfig, round_floats, run_sweep

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3


class InputError(Exception):
    pass


def _cap(text: str) -> int | None:
    if text.lower() in ("none", "inf"):
        return None
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid cap {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("cap must be positive")
    return n


def _pairs(text: str) -> list[PairQuery] | None:
    """``all`` or ``T,Y;T,Y;...``."""
    if text == "all":
        return None
    out = []
    for chunk in text.split(";"):
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 2 or not all(parts):
            raise InputError(f"bad pair {chunk!r}; expected T,Y")
        out.append(PairQuery(*parts))
    return out


def cmd_dist(args) -> int:
    g = load(args.ref)
    h = load(args.cand)
    pairs = _pairs(args.pairs)
    policy = MissPolicy(args.miss_policy)
    fwd = fid(g, h, pairs, args.cap, policy, names=("ref", "cand"))
    reports = [fwd]
    if args.mode == "symmetric":
        reports.append(fid(h, g, pairs, args.cap, policy, names=("cand", "ref")))
    key = "normalized" if args.normalized else "total"
    value = sum(getattr(r, key) for r in reports) / len(reports)
    if args.format == "csv":
        sys.stdout.write(report_csv(reports))
        return EXIT_OK
    out = {
        "mode": args.mode,
        "normalized": args.normalized,
        "value": value,
        "miss_policy": policy.value,
        "reports": [r.to_json() for r in reports],
    }
    print(json.dumps(round_floats(out), indent=2))
    return EXIT_OK


def cmd_identify(args) -> int:
    g = load(args.graph)
    res = identify_all(g, PairQuery(args.treatment, args.outcome), args.cap)
    if res.status is Status.NOT_IDENTIFIABLE:
        print("NOT IDENTIFIABLE")
    else:
        for line in res.rendered():
            print(line)
    if res.truncated:
        print("warning: fixing-sequence enumeration truncated", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = SweepConfig.load(args.config)
    res = run_sweep(cfg, args.out, workers=args.workers)
    s = res.summary
    print(f"{s['instances']} instances, {s['flagged_excluded']} flagged, "
          f"{s['mag_pairs']} MAG pairs -> {args.out}")
    return EXIT_OK


def cmd_project_mag(args) -> int:
    sys.stdout.write(dumps(admg_to_mag(load(args.graph))))
    return EXIT_OK


def cmd_cpdag_range(args) -> int:
    c1 = load(args.c1, kind="cpdag")
    c2 = load(args.c2, kind="cpdag")
    r = cpdag_fid_range(c1, c2, _pairs(args.pairs), args.mode, args.budget, args.seed, args.cap)
    print(f"{r.lo:.6f} {r.hi:.6f}")
    if r.mode == ExtensionMode.SAMPLE.value:
        print("note: sampled extensions are de-duplicated but not uniform over the class", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fid", description="Fixing identification distance between ADMGs.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dist", help="distance between a reference and a candidate graph")
    d.add_argument("ref")
    d.add_argument("cand")
    d.add_argument("--pairs", default="all", help="'all' or 'T,Y;T,Y;...'")
    d.add_argument("--mode", choices=["directional", "symmetric"], default="directional")
    d.add_argument("--normalized", action="store_true")
    d.add_argument("--cap", type=_cap, default=DEFAULT_CAP, help="fixing-sequence cap, or 'none'")
    d.add_argument("--miss-policy", choices=[m.value for m in MissPolicy], default=MissPolicy.ERROR.value)
    d.add_argument("--format", choices=["json", "csv"], default="json")
    d.set_defaults(func=cmd_dist)

    i = sub.add_parser("identify", help="list every canonical estimand of p(y | do(t))")
    i.add_argument("graph")
    i.add_argument("--treatment", "-t", required=True)
    i.add_argument("--outcome", "-y", required=True)
    i.add_argument("--cap", type=_cap, default=DEFAULT_CAP)
    i.set_defaults(func=cmd_identify)

    s = sub.add_parser("sweep", help="run a perturbation sweep from a JSON config")
    s.add_argument("config")
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    s.set_defaults(func=cmd_sweep)

    m = sub.add_parser("project-mag", help="print the Markov-equivalent MAG of an ADMG")
    m.add_argument("graph")
    m.set_defaults(func=cmd_project_mag)

    c = sub.add_parser("cpdag-range", help="min and max normalized FID over DAG extensions")
    c.add_argument("c1")
    c.add_argument("c2")
    c.add_argument("--pairs", default="all")
    c.add_argument("--mode", choices=[m.value for m in ExtensionMode], default="exact")
    c.add_argument("--budget", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--cap", type=_cap, default=DEFAULT_CAP)
    c.set_defaults(func=cmd_cpdag_range)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (GraphError, ConfigError, InputError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # anything else is a bug
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
