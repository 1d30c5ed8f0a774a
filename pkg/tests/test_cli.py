import json
import math
import subprocess
import sys

import pytest

from bandlab.cli import main

TREE = {"kind": "tree", "random": {"nodes": 40, "seed": 3, "depth_bias": 0.5}}


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


def test_delta_on_square(tmp_path, capsys):
    r = math.sqrt(2)
    rows = [[0, 1, r, 1], [1, 0, 1, r], [r, 1, 0, 1], [1, r, 1, 0]]
    path = tmp_path / "sq.csv"
    path.write_text("\n".join(",".join(repr(float(v)) for v in row) for row in rows))
    code, out = run(capsys, "delta", path, "--no-timing")
    report = json.loads(out)
    assert code == 0
    assert set(report) == {"config", "measurements", "criteria", "duration_ms"}
    assert report["measurements"]["four_point_delta"] == pytest.approx(r - 1, abs=1e-12)
    code, out = run(capsys, "delta", path, "--format", "csv")
    assert out.splitlines()[0] == "i,j,k,l,defect"
    assert len(out.splitlines()) == 2


def test_band_sample(tmp_path, capsys):
    band = write(tmp_path / "band.json", {"factor1": TREE, "factor2": TREE, "delta": 1.0})
    out_path = tmp_path / "pts.json"
    code, _ = run(capsys, "band-sample", band, "-n", 12, "--seed", 4, "--radius-cap", 8,
                  "-o", out_path)
    data = json.loads(out_path.read_text())
    assert code == 0
    assert len(data["points"]) == 12
    assert data["band"]["delta"] == 1.0


def test_theorem1_report_is_deterministic(tmp_path, capsys):
    cfg = write(tmp_path / "t1.json", {"band": {"factor1": TREE, "factor2": TREE, "delta": 2.0},
                                       "n": 20, "radius_cap": 15, "seed": 2})
    code1, out1 = run(capsys, "theorem1", cfg, "--no-timing")
    code2, out2 = run(capsys, "theorem1", cfg, "--no-timing")
    assert code1 == code2 == 0
    assert out1 == out2
    report = json.loads(out1)
    assert report["duration_ms"] == 0.0
    for c in report["criteria"]:
        assert {"lhs", "rhs", "relation", "passed"} <= set(c)
        if c["relation"] == "<=":
            assert c["passed"] == (c["lhs"] <= c["rhs"])


def test_failed_criterion_sets_exit_code(tmp_path, capsys):
    cfg = write(tmp_path / "ce.json", {"slope_tolerance": -1.0})
    code, out = run(capsys, "counterexample", cfg)
    assert code == 1
    assert not all(c["passed"] for c in json.loads(out)["criteria"])


def test_counterexample_csv_lists_criteria(tmp_path, capsys):
    cfg = write(tmp_path / "ce.json", {})
    code, out = run(capsys, "counterexample", cfg, "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "name,lhs,relation,rhs,asserted,passed"


def test_bad_config_is_reported(tmp_path, capsys):
    cfg = write(tmp_path / "bad.json", {"nonsense": 1})
    assert main(["theorem1", cfg]) == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_probe(tmp_path, capsys):
    seqs = {"space": {"kind": "h2"},
            "seq1": [[0.0, math.exp(-0.5 * i)] for i in range(1, 41)],
            "seq2": [[4.0, math.exp(-0.5 * i)] for i in range(1, 41)],
            "window": 8, "threshold": 15}
    code, out = run(capsys, "probe", write(tmp_path / "s.json", seqs), "--no-timing")
    report = json.loads(out)
    assert code == 0
    assert report["measurements"]["equivalent"] is False
    assert [v["verdict"] for v in report["measurements"]["verdicts"]] == ["converges"] * 2


def test_console_module_runs(tmp_path):
    cfg = write(tmp_path / "ce.json", {})
    proc = subprocess.run([sys.executable, "-m", "bandlab.cli", "counterexample", cfg,
                           "--no-timing"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["measurements"]["expected_slope"] == pytest.approx(
        (math.sqrt(2) - 1) / 2)
