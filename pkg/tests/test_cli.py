import json

import pytest

from lipext.cli import main


def _write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_star(capsys):
    assert main(["zext", "solve", "--instance", "@star"]) == 0
    out = capsys.readouterr().out
    assert "3/2" in out and "MET" in out


def test_validate_bad_metric(tmp_path, capsys):
    f = _write(tmp_path, "bad.json", {"dist": [[0, 1, 3], [1, 0, 1], [3, 1, 0]]})
    assert main(["metric", "validate", "--file", f]) == 1
    out = capsys.readouterr()
    assert "triangle" in out.out + out.err


def test_validate_good_metric(tmp_path):
    f = _write(tmp_path, "ok.json", {"dist": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]})
    assert main(["metric", "validate", "--file", f]) == 0


def test_usage_errors(capsys):
    assert main(["metric", "validate", "--bogus"]) == 64
    assert main(["frobnicate"]) == 64
    assert main(["--help"]) == 0


def test_capacity_exit(tmp_path):
    assert main(["metric", "twist", "--n", "9", "--alpha", "1"]) == 2


def test_w1_norm_writes_plan(tmp_path, capsys):
    m = _write(tmp_path, "m.json", {"dist": [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]]})
    f = _write(tmp_path, "f.json", {"base": "X", "values": [1, -1, 1, -1]})
    out = tmp_path / "w1.json"
    assert main(["w1", "norm", "--metric", m, "--f", f, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["value"] == 2 and "plan" in doc and "potential" in doc
    manifest = json.loads((tmp_path / "w1.json.manifest.json").read_text())
    assert manifest["exit_code"] == 0 and manifest["log_base"] == "e"


def test_graphs_and_replay(tmp_path):
    g = tmp_path / "g.json"
    assert main(["graphs", "gen", "--n", "10", "--d", "3", "--seed", "4", "--out", str(g)]) == 0
    assert main(["graphs", "expansion", "--graph", str(g)]) == 0
    first = g.read_text()
    g.unlink()
    assert main(["replay", str(g) + ".manifest.json"]) == 0
    assert g.read_text() == first


def test_holder_csv_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["holder", "--n", "2", "--alpha", "0.8,1.0", "--out", str(a)]) == 0
    assert main(["holder", "--n", "2", "--alpha", "0.8,1.0", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0].split(",")
    assert header[:9] == ["n", "alpha", "r", "s", "rs_condition_ok", "metric_valid", "minL_upper", "exact_bound", "enflo_ok"]


def test_ext_solve(tmp_path, capsys):
    p = _write(
        tmp_path,
        "p.json",
        {
            "metric": {"dist": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]},
            "subset": [0, 2],
            "boundary": {"0": [1, -1], "2": [-1, 1]},
            "target": {"kind": "w1", "metric": {"dist": [[0, 1], [1, 0]]}},
        },
    )
    out = tmp_path / "sol.json"
    assert main(["ext", "solve", "--problem", p, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["constant"] == 1
