import csv
import json

import numpy as np
import pytest

from torsec import import_text
from torsec.cli import EXIT_CONFIG, EXIT_OK, EXIT_PRECONDITION, EXIT_RESOURCE, main
from torsec.report import SCHEMA_VERSION, SUMMARY_COLUMNS


def run_cli(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out), "--quiet"])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, report, out


def by_alpha(report):
    return {tuple(a["alpha"]): a for a in report["alphas"]}


def test_examples_listing(capsys):
    assert main(["examples"]) == EXIT_OK
    text = capsys.readouterr().out
    for name in ("constant", "reeb2d", "slowed-vertical", "psi1", "psi2", "figure1-phi1", "figure1-phi2"):
        assert name in text
    assert main(["examples", "--json"]) == EXIT_OK
    cat = json.loads(capsys.readouterr().out)
    assert {"name", "locus", "summary"} <= set(cat[0])


def test_analyze_reeb2d(tmp_path):
    code, rep, _ = run_cli(tmp_path, "analyze", "--flow", "reeb2d", "--alpha", "0,1")
    assert code == EXIT_OK
    a = by_alpha(rep)[(0, 1)]
    assert a["existence"]["verdict"] == "nonempty"
    assert a["cardinality"]["kind"] == "singleton"
    assert a["fried_positive"] and a["alpha_recurrent_count"] == 0
    assert rep["schema_version"] == SCHEMA_VERSION


def test_analyze_slowed_vertical(tmp_path):
    code, rep, _ = run_cli(tmp_path, "analyze", "--flow", "slowed-vertical", "--alpha", "0,1")
    assert code == EXIT_OK
    card = by_alpha(rep)[(0, 1)]["cardinality"]
    assert card["kind"] == "countably_infinite"
    assert card["reason"].startswith("divergent shift")


def test_analyze_psi1(tmp_path):
    code, rep, _ = run_cli(tmp_path, "analyze", "--flow", "psi1", "--alpha", "1,0", "--alpha", "-1,0")
    assert code == EXIT_OK
    a = by_alpha(rep)
    assert a[(1, 0)]["existence"]["verdict"] == "empty"
    assert a[(1, 0)]["existence"]["witness_edges"]
    assert "negative" in a[(1, 0)]["existence"]["reason"]
    assert a[(-1, 0)]["existence"]["verdict"] == "nonempty"
    assert rep["trend_flag"]


@pytest.mark.parametrize("args", [
    ["analyze", "--flow", "constant", "--alpha", "0,x"],
    ["analyze", "--flow", "nosuchflow", "--alpha", "0,1"],
    ["analyze", "--flow", "constant", "--alpha", "0,1,1"],
    ["analyze", "--flow", "constant", "--alpha", "0,1", "--epsilon", "0.01"],
    ["analyze", "--flow", "constant", "--alpha", "0,1", "--epsilon", "0.6"],
    ["analyze", "--flow", "constant", "--alpha", "0,1", "--level", "1.0"],
    ["analyze", "--flow", "constant", "--alpha", "0,1", "--grid", "8", "8", "8"],
    ["analyze", "--flow", "constant", "--alpha", "0,1", "--param", "drift"],
    ["fried-sum", "--flow", "constant"],
    ["analyze", "--alpha", "0,1"],
])
def test_config_errors(tmp_path, args, capsys):
    code, _, _ = run_cli(tmp_path, *args)
    assert code == EXIT_CONFIG
    assert "torsec:" in capsys.readouterr().err


def test_bad_toml(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[flow\nname = ")
    assert run_cli(tmp_path, "run", "--config", str(cfg))[0] == EXIT_CONFIG
    cfg.write_text('[flow]\nname = "constant"\n[extra]\nx = 1\n')
    assert run_cli(tmp_path, "run", "--config", str(cfg))[0] == EXIT_CONFIG


def test_resource_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("TORSEC_MAX_CELLS", "100")
    code, rep, _ = run_cli(tmp_path, "analyze", "--flow", "constant", "--grid", "16", "--alpha", "0,1")
    assert code == EXIT_RESOURCE and rep is None


def test_precondition_failure_still_writes_report(tmp_path):
    code, rep, _ = run_cli(tmp_path, "fried-sum", "--flow", "constant", "--grid", "8",
                           "--pair", "1,0", "0,1", "--pair", "-1,0", "0,-1")
    assert code == EXIT_PRECONDITION
    sums = rep["fried_sums"]
    assert sums[0]["error"]["error"] == "NotQuasiLyapunovError" and sums[0]["map"] is None
    assert sums[1]["alpha1"] == [-1, 0] and sums[1]["alpha2"] == [0, -1]


def test_empty_class_is_skipped_not_failed(tmp_path):
    code, rep, _ = run_cli(tmp_path, "extract", "--flow", "psi1", "--grid", "16", "--alpha", "1,0", "--no-figures")
    assert code == EXIT_OK
    assert "skipped" in by_alpha(rep)[(1, 0)]


def test_run_config_file(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("""
[flow]
name = "slowed-vertical"

[grid]
resolution = 32

[analysis]
commands = ["analyze", "directions", "sections", "extract", "fried-sum"]
alphas = ["0,1", [0, 2]]
window = 2
levels = [0.25, 0.75]
max_sections = 2
fried_pairs = [["0,1", "0,1"]]

[output]
dir = "ignored"
emit_graph = "graph.txt"
""")
    code, rep, out = run_cli(tmp_path, "run", "--config", str(cfg))
    assert code == EXIT_OK
    a = by_alpha(rep)
    assert set(a) == {(0, 1), (0, 2)}
    sec = a[(0, 1)]["sections"]
    assert sec and all(s["round_trip"] and s["negative_crossings"] == 0 for s in sec)
    assert {s["level"] for s in sec} == {0.25, 0.75}
    for s in sec:
        assert (out / s["svg"]).read_text().startswith("<?xml")
    assert a[(0, 2)]["n_alpha"] == 2
    assert "support" in a[(0, 1)] and rep["direction_fan"]
    assert rep["fried_sums"][0]["sum"] == [0, 2]
    g = import_text(out / "graph.txt")
    assert g.n == 32 * 32 and rep["graph"]["edges"] == g.n_edges


def test_summary_csv(tmp_path):
    code, rep, out = run_cli(tmp_path, "analyze", "--flow", "constant", "--grid", "8",
                             "--alpha", "0,1", "--alpha", "0,-1")
    with open(out / "summary.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == list(SUMMARY_COLUMNS)
    assert [r["existence"] for r in rows] == ["nonempty", "empty"]


def test_deterministic_output(tmp_path):
    args = ["run", "--flow", "slowed-vertical", "--grid", "16", "--refine", "1", "--window", "1",
            "--max-sections", "1", "--alpha", "0,1"]
    _, _, o1 = run_cli(tmp_path, *args, name="a")
    _, _, o2 = run_cli(tmp_path, *args, "--workers", "1", name="b")
    files = sorted(p.relative_to(o1) for p in o1.rglob("*") if p.is_file())
    assert any(p.suffix == ".svg" for p in files)
    for p in files:
        assert (o1 / p).read_bytes() == (o2 / p).read_bytes(), p


def test_param_override(tmp_path):
    code, rep, _ = run_cli(tmp_path, "analyze", "--flow", "constant", "--param", "drift=1,0", "--grid", "8",
                           "--alpha", "1,0", "--alpha", "-1,0")
    assert code == EXIT_OK
    a = by_alpha(rep)
    assert a[(1, 0)]["existence"]["verdict"] == "nonempty"
    assert a[(-1, 0)]["existence"]["verdict"] == "empty"
    assert np.allclose(rep["config"]["flow"]["params"]["drift"], [1.0, 0.0])
