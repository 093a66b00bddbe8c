import json
from pathlib import Path

import numpy as np
import pytest

from decrn.cli import main

EX1 = """2 X1 -> 3 X1 + X2 ; k=1 ; tau=1
3 X1 + X2 -> X1 + 2 X2 ; k=1 ; tau=2
X1 + 2 X2 -> 2 X1 ; k=2 ; tau=1
"""
EX2 = """2 X1 <-> X1 + X2 ; k=1,1 ; tau=1,2
X1 + X2 <-> X2 + X3 ; k=1,1 ; tau=3,4
"""


@pytest.fixture()
def ex1_path(tmp_path):
    path = tmp_path / "ex1.crn"
    path.write_text(EX1)
    return path


@pytest.fixture()
def ex2_path(tmp_path):
    path = tmp_path / "ex2.crn"
    path.write_text(EX2)
    return path


def _history(tmp_path, obj, name="hist.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def test_analyze_stdout(ex1_path, capsys):
    assert main(["analyze", str(ex1_path)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["deficiency"] == 0
    assert doc["weakly_reversible"] is True
    assert doc["dim_S"] == 2
    assert [entry["W"] for entry in doc["semilocking"]] == [["X1"], ["X1", "X2"]]


def test_analyze_json_file(ex2_path, tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", str(ex2_path), "--json", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["semilocking"]) == 3
    assert doc["reversible"] is True
    assert doc["conserved_basis"] == [["1", "1", "1"]]


def test_analyze_parse_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.crn"
    bad.write_text("X1 -> ; k=1")
    assert main(["analyze", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "line 1" in err


def test_analyze_capability_exit_3(tmp_path, capsys):
    lines = [f"A{i} -> A{i+1} ; k=1" for i in range(25)]
    big = tmp_path / "big.crn"
    big.write_text("\n".join(lines))
    assert main(["analyze", str(big)]) == 3


def test_certify_example1(ex1_path, tmp_path, capsys):
    out = tmp_path / "cert.json"
    assert main(["certify", str(ex1_path), "--json", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "Persistent"
    assert set(doc["routes"]) == {"FaceClassification", "TwoDimCorollary"}
    assert doc["stability"]["equilibrium"] == pytest.approx(
        [2 ** (1 / 3), 2 ** (-1 / 3)], abs=1e-9
    )


def test_certify_example2_needs_history(ex2_path, tmp_path, capsys):
    # without a history the conserved class is undetermined: precondition error
    assert main(["certify", str(ex2_path)]) == 4
    hist = _history(tmp_path, {"type": "constant", "value": [2, 3, 1]})
    out = tmp_path / "cert.json"
    assert main(["certify", str(ex2_path), "--history", str(hist), "--json", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "Persistent"
    faces = {tuple(e["W"]): e["face"] for e in doc["semilocking"]}
    assert faces[("X1", "X2", "X3")] == "Empty"


def test_certify_precondition_exit_4(tmp_path, capsys):
    path = tmp_path / "ab.crn"
    path.write_text("A -> B ; k=1")
    rc = main(["certify", str(path), "--json", str(tmp_path / "c.json")])
    assert rc == 4
    doc = json.loads((tmp_path / "c.json").read_text())
    assert doc["verdict"] == "Inconclusive"


def test_equilibrium_command(ex2_path, tmp_path, capsys):
    hist = _history(tmp_path, {"type": "constant", "value": [2, 3, 1]})
    assert main(["equilibrium", str(ex2_path), "--history", str(hist)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["point"] == pytest.approx([1.0, 1.0, 1.0], abs=1e-10)
    assert doc["in_class"]["point"] == pytest.approx([2.13986456] * 3, abs=1e-6)


def test_simulate_writes_csv_and_plot_data(ex1_path, tmp_path, capsys):
    hist = _history(tmp_path, {"type": "constant", "value": [1, 2]})
    out = tmp_path / "traj.csv"
    manifest = tmp_path / "run.json"
    rc = main([
        "simulate", str(ex1_path), "--history", str(hist), "--t-end", "5",
        "--dt", "0.005", "--out", str(out), "--plot-data", "--plot",
        "--manifest", str(manifest),
    ])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,x1,x2,V"
    assert len(lines) >= 50
    first = lines[1].split(",")
    assert float(first[0]) == 0.0 and float(first[1]) == 1.0
    # per-species plot data and figure files
    assert (tmp_path / "traj_X1.dat").exists()
    assert (tmp_path / "traj_X2.dat").exists()
    assert (tmp_path / "traj.png").exists()
    doc = json.loads(manifest.read_text())
    outputs = {Path(p).name for p in doc["outputs"]}
    assert outputs == {"traj.csv", "traj_X1.dat", "traj_X2.dat", "traj.png"}
    assert doc["wall_clock_seconds"] == 0.0  # deterministic default
    for name in outputs:
        assert (tmp_path / name).exists()


def test_simulate_csv_has_conserved_columns(ex2_path, tmp_path):
    hist = _history(tmp_path, {"type": "constant", "value": [2, 3, 1]})
    out = tmp_path / "traj.csv"
    rc = main(["simulate", str(ex2_path), "--history", str(hist), "--t-end", "5",
               "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,x1,x2,x3,V,Ca_1"
    row = lines[1].split(",")
    assert float(row[-1]) == pytest.approx(98.0, abs=1e-8)
    # 17 significant digits requested
    assert any(len(cell.split(".")[-1]) >= 15 for cell in lines[2].split(",")[1:4])


def test_simulate_step_cap_exit_4(ex1_path, tmp_path, capsys):
    hist = _history(tmp_path, {"type": "constant", "value": [1, 2]})
    rc = main(["simulate", str(ex1_path), "--history", str(hist), "--dt", "0.5",
               "--t-end", "5", "--out", str(tmp_path / "t.csv")])
    assert rc == 4
    assert "cap" in capsys.readouterr().err


def test_simulate_numeric_failure_exit_5(tmp_path, capsys):
    path = tmp_path / "boom.crn"
    path.write_text("2 A -> 3 A ; k=5 ; tau=1")
    hist = _history(tmp_path, {"type": "constant", "value": [5]})
    rc = main(["simulate", str(path), "--history", str(hist), "--t-end", "20",
               "--dt", "0.01", "--out", str(tmp_path / "t.csv")])
    assert rc == 5


def test_expression_history_via_cli(ex1_path, tmp_path):
    hist = _history(tmp_path, {"type": "expr", "exprs": ["sin(s)+2", "cos(s)+1.5"]})
    out = tmp_path / "traj.csv"
    rc = main(["simulate", str(ex1_path), "--history", str(hist), "--t-end", "2",
               "--out", str(out)])
    assert rc == 0
    first = out.read_text().splitlines()[1].split(",")
    assert float(first[1]) == pytest.approx(2.0)
    assert float(first[2]) == pytest.approx(2.5)


def test_chain_compare_table_and_json(ex1_path, tmp_path, capsys):
    hist = _history(tmp_path, {"type": "constant", "value": [1, 2]})
    out = tmp_path / "chain.json"
    rc = main(["chain-compare", str(ex1_path), "--history", str(hist),
               "--N", "5,10", "--t-end", "5", "--json", str(out)])
    assert rc == 0
    table = capsys.readouterr().out
    assert "sup_gap" in table
    doc = json.loads(out.read_text())
    assert doc["stage_counts"] == [5, 10]
    assert doc["gaps"][1] < doc["gaps"][0]
    assert doc["monotone"] is True


def test_chain_compare_zero_delays_degenerate(tmp_path, capsys):
    path = tmp_path / "flat.crn"
    path.write_text("2 X1 -> 3 X1 + X2 ; k=1 ; tau=0\n3 X1 + X2 -> X1 + 2 X2 ; k=1 ; tau=0\nX1 + 2 X2 -> 2 X1 ; k=2 ; tau=0")
    hist = _history(tmp_path, {"type": "constant", "value": [1, 2]})
    out = tmp_path / "chain.json"
    rc = main(["chain-compare", str(path), "--history", str(hist), "--N", "1,4",
               "--t-end", "2", "--json", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["gaps"] == [0.0, 0.0]


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
