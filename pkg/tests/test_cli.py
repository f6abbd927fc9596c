from __future__ import annotations

import csv
import io
import json

import pytest

from fid.cli import main

BACKDOOR = "nodes: X1 X2 X3\nX2 -> X1\nX2 -> X3\nX1 -> X3\n"
CHAIN = "nodes: X1 X2 X3\nX2 -> X1\nX1 -> X3\n"
BOW = "nodes: T Y\nT -> Y\nT <-> Y\n"


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, text in {"g": BACKDOOR, "h": CHAIN, "bow": BOW, "ab": "nodes: A B\nA -- B\n",
                       "bad": "nodes: A B\nA -> B\nA => B\n"}.items():
        path = tmp_path / f"{name}.txt"
        path.write_text(text)
        out[name] = str(path)
    return out


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_dist_same_file_is_zero(files, capsys):
    code, out, _ = run(capsys, "dist", files["g"], files["g"], "--mode", "symmetric", "--normalized")
    assert code == 0
    assert json.loads(out)["value"] == 0.0


def test_dist_backdoor_vs_chain(files, capsys):
    code, out, _ = run(capsys, "dist", files["g"], files["h"], "--pairs", "X1,X3")
    obj = json.loads(out)
    assert code == 0 and obj["value"] == 0.5
    assert obj["reports"][0]["pairs"][0]["score"] == 0.5


def test_dist_csv(files, capsys):
    code, out, _ = run(capsys, "dist", files["g"], files["h"], "--format", "csv", "--mode", "symmetric")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][:4] == ["ref", "cand", "T", "Y"]
    assert len(rows) == 13
    assert all(len(r[4].split(".")[1]) == 6 for r in rows[1:])


def test_dist_miss_policy_flag(tmp_path, files, capsys):
    ty = tmp_path / "ty.txt"
    ty.write_text("nodes: T Y\nT -> Y\n")
    _, out, _ = run(capsys, "dist", str(ty), files["bow"], "--miss-policy", "zero")
    assert json.loads(out)["reports"][0]["total"] == 0.0
    _, out, _ = run(capsys, "dist", str(ty), files["bow"])
    assert json.loads(out)["reports"][0]["total"] == 1.0


def test_parse_error_names_line(files, capsys):
    code, _, err = run(capsys, "dist", files["bad"], files["g"])
    assert code == 2 and "line 3" in err


def test_node_mismatch_is_input_error(files, capsys):
    code, _, err = run(capsys, "dist", files["g"], files["bow"])
    assert code == 2 and err.startswith("error:")


def test_bad_pairs_and_usage(files, capsys):
    assert run(capsys, "dist", files["g"], files["h"], "--pairs", "X1")[0] == 2
    assert run(capsys, "dist", files["g"], files["h"], "--cap", "0")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "dist", files["g"], "/no/such/file")[0] == 2


def test_identify(files, capsys):
    code, out, _ = run(capsys, "identify", files["g"], "-t", "X1", "-y", "X3")
    assert code == 0 and "int{x2}[ p(x1,x2,x3) * p(x2) / p(x1,x2) ]" in out.splitlines()
    assert run(capsys, "identify", files["bow"], "-t", "T", "-y", "Y")[1].strip() == "NOT IDENTIFIABLE"
    assert run(capsys, "identify", files["g"], "-t", "X3", "-y", "X1")[1].strip() == "p(x1)"
    assert run(capsys, "identify", files["g"], "-t", "X1", "-y", "Q")[0] == 2


def test_project_mag(files, capsys):
    code, out, _ = run(capsys, "project-mag", files["bow"])
    assert code == 0 and "T -> Y" in out and "<->" not in out


def test_cpdag_range(files, capsys):
    assert run(capsys, "cpdag-range", files["g"], files["g"])[1].strip() == "0.000000 0.000000"
    lo, hi = map(float, run(capsys, "cpdag-range", files["ab"], files["ab"])[1].split())
    assert lo == 0.0 and hi > 0.0
    code, out, err = run(capsys, "cpdag-range", files["ab"], files["ab"], "--mode", "sample", "--budget", "5")
    assert code == 0 and "not uniform" in err


def test_sweep_from_cli(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_vars": 3, "p_dir": [0.5], "n_bi": [1], "graphs_per_cell": 1,
                               "k": [1], "mag_k": [1], "seed": 1}))
    code, out, _ = run(capsys, "sweep", str(cfg), "--out", str(tmp_path / "o"), "--workers", "1")
    assert code == 0 and (tmp_path / "o" / "instances.csv").exists()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert run(capsys, "sweep", str(bad), "--out", str(tmp_path / "x"))[0] == 2
