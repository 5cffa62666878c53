import json
import subprocess
import sys

import pytest

from gipkernel.cli import main
from gipkernel.data import read_dataset


def test_simulate_writes_requested_rows(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["simulate", "--robot", "scara.json", "--out", str(out), "--samples", "100", "--seed", "7"]) == 0
    ds = read_dataset(out)
    assert len(ds) == 100 and ds.n == 4


def test_simulate_is_seeded(tmp_path):
    for name in ("a.csv", "b.csv"):
        main(["simulate", "--robot", "rr", "--out", name, "--samples", "20", "--seed", "3",
              "--out-dir", str(tmp_path)])
    assert (tmp_path / "a.csv").read_text() == (tmp_path / "b.csv").read_text()


def test_certify_prints_residuals(capsys):
    assert main(["certify-prop1", "--robot", "rr.json"]) == 0
    out = capsys.readouterr().out
    residuals = [float(line.split("residual ")[1].split()[0]) for line in out.splitlines() if "residual" in line]
    assert len(residuals) == 2 and max(residuals) < 1e-8
    assert "monomial count (full)" in out and "monomial count (gip_rkhs)" in out


def test_certify_reports_published_counts_for_scara(monkeypatch, capsys):
    from gipkernel import cli

    # skip the expensive fit; only the count report is under test here
    monkeypatch.setattr(cli, "certify_polynomial_dynamics", lambda *a, **k: [])
    monkeypatch.setattr(cli, "random_states", lambda *a, **k: None)
    assert main(["certify-prop1", "--robot", "scara"]) == 0
    out = capsys.readouterr().out
    assert "published count for RRPR: 1647" in out
    assert "monomial count (gip_rkhs): 9720" in out


def test_train_and_evaluate_exact_fit(tmp_path, capsys):
    data = tmp_path / "d.csv"
    main(["simulate", "--robot", "rr", "--out", str(data), "--samples", "80", "--noise-std", "0"])
    model = tmp_path / "m.json"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"robot": "rr", "init_noise_var": 1e-10}))
    assert main(["train", "--config", str(cfg), "--data", str(data), "--estimator", "gip",
                 "--out", str(model), "--no-optimize"]) == 0
    capsys.readouterr()
    report = tmp_path / "r.json"
    assert main(["evaluate", "--model", str(model), "--data", str(data), "--out", str(report)]) == 0
    assert "GIP: nMSE per joint" in capsys.readouterr().out
    nmse = json.loads(report.read_text())["GIP"]["nmse"]
    assert max(nmse) < 1e-8


def test_monte_carlo_and_data_efficiency_commands(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "robot": "rr", "estimators": ["FE", "GIP"], "trials": 1, "train_size": 50, "test_size": 30,
        "optimizer": {"epochs": 2, "learning_rate": 0.1},
    }))
    assert main(["monte-carlo", "--config", str(cfg), "--out-dir", str(tmp_path / "mc")]) == 0
    assert (tmp_path / "mc" / "monte_carlo.csv").exists()
    assert main(["data-efficiency", "--config", str(cfg), "--out-dir", str(tmp_path / "de"),
                 "--grid", "20", "50", "--seed", "4"]) == 0
    summary = json.loads((tmp_path / "de" / "data_efficiency_summary.json").read_text())
    assert summary["grid"] == [20, 50] and summary["config"]["seed"] == 4


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["simulate", "--robot", "rr", "--out", "x.csv", "--samples", "5", "--unknown-flag"],
    ["simulate", "--robot", "rr"],
    [],
])
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    assert "usage" in capsys.readouterr().err


def test_missing_files_exit_1(tmp_path, capsys):
    assert main(["evaluate", "--model", str(tmp_path / "none.json"), "--data", str(tmp_path / "none.csv")]) == 1
    assert "error" in capsys.readouterr().err


def test_numerical_failure_exits_2(tmp_path, monkeypatch, capsys):
    from gipkernel import cli
    from gipkernel.errors import NumericalFailureError

    def fail(*args, **kwargs):
        raise NumericalFailureError("Cholesky failed", jitters=[0.0, 1e-10])

    monkeypatch.setattr(cli, "make_estimator", fail)
    data = tmp_path / "d.csv"
    main(["simulate", "--robot", "rr", "--out", str(data), "--samples", "10"])
    assert main(["train", "--data", str(data), "--robot", "rr", "--out", str(tmp_path / "m.json")]) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gipkernel", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "certify-prop1" in proc.stdout
