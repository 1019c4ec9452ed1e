import csv
import json

import pytest

from hydro_opt.cli import main


def test_simulate_circuit_a(tmp_path, capsys):
    out = tmp_path / "trace.csv"
    assert main(["simulate", "--circuit", "a", "--point", "65,324,55", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 402
    assert "terminal speed" in capsys.readouterr().out


def test_run_writes_table(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tabu": {"max_evals": 40}}))
    out = tmp_path / "runs.csv"
    rc = main(["run", "--circuit", "a", "--method", "tabu", "--runs", "2", "--seed", "3",
               "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    rows = list(csv.reader(out.open()))
    assert [r[0] for r in rows] == ["run", "1", "2", "Avg", "SD"]


def test_circuit_b_without_calibration_exits_2(tmp_path, capsys):
    rc = main(["simulate", "--circuit", "b", "--point", "43,678,696,276",
               "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    assert "hydro-opt calibrate --target-eff 0.75" in capsys.readouterr().err


def test_circuit_b_with_calibration(tmp_path, calibration_file):
    out = tmp_path / "b.csv"
    rc = main(["simulate", "--circuit", "b", "--point", "43,678,696,276",
               "--calibration", str(calibration_file), "--out", str(out)])
    assert rc == 0
    assert out.read_text().splitlines()[0].endswith("feeder_relief_flow_lpm")


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["simulate", "--circuit", "a", "--point", "65,324", "--out", "x.csv"],
    ["simulate", "--circuit", "a", "--point", "65,324,55.3", "--out", "x.csv"],
    ["simulate", "--circuit", "a", "--point", "65,324,55", "--dt", "0.3", "--out", "x.csv"],
    ["run", "--circuit", "c", "--method", "tabu", "--out", "x.csv"],
    ["calibrate", "--target-eff", "1.5", "--out", "x.json"],
])
def test_usage_errors_exit_1(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    try:
        rc = main(argv)
    except SystemExit as exc:
        rc = exc.code
    assert rc == 1


def test_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tabu": {"bogus": 1}}))
    rc = main(["run", "--circuit", "a", "--method", "tabu", "--config", str(cfg),
               "--out", str(tmp_path / "r.csv")])
    assert rc == 1
