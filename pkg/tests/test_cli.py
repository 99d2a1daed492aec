import csv
import subprocess
import sys

import pytest

from epigrowth.cli import run


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_simulate_epi(tmp_path):
    assert run(["simulate", "--b", "0.008", "--t-end", "50", "--samples", "11", "--out", str(tmp_path)]) == 0
    rows = read(tmp_path / "trajectory.csv")
    assert len(rows) == 11 and list(rows[0]) == ["t", "s", "i", "r", "v"]


def test_simulate_planner(tmp_path):
    assert run(["simulate", "--kind", "planner", "--t-end", "10", "--out", str(tmp_path)]) == 0
    assert "k" in read(tmp_path / "trajectory.csv")[0]


def test_equilibrium(tmp_path, capsys):
    assert run(["equilibrium", "--b", "0.008", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "equilibrium.txt").read_text()
    assert "R0" in text and "endemic" in text


def test_steady_state(tmp_path, capsys):
    assert run(["steady-state", "--b", "0.008", "--theta", "0.2", "--out", str(tmp_path)]) == 0
    (row,) = read(tmp_path / "steady_state.csv")
    assert row["regime"] == "EndemicNoInvest"
    assert "predicted regime" in capsys.readouterr().out


def test_steady_state_disease_free_preset(tmp_path):
    assert run(["steady-state", "--b", "0.0482", "--theta", "0.3", "--out", str(tmp_path)]) == 0
    (row,) = read(tmp_path / "steady_state.csv")
    assert row["regime"] == "DiseaseFree"


def test_sweeps_and_check_foc(tmp_path):
    out = str(tmp_path)
    assert run(["theta-sweep", "--b", "0.008", "--grid", "0.05:0.2:3", "--gnuplot", "--out", out]) == 0
    assert (tmp_path / "theta_sweep.gp").exists()
    assert run(["check-foc", str(tmp_path / "theta_sweep.csv"), "--b", "0.008"]) == 0
    assert run(["check-foc", str(tmp_path / "theta_sweep.csv"), "--row", "1"]) == 0
    assert run(["b-sweep", "--grid", "0.005:0.13:4", "--out", out]) == 0
    assert len(read(tmp_path / "b_sweep.csv")) == 4


def test_check_foc_flags_tampered_row(tmp_path):
    out = str(tmp_path)
    assert run(["theta-sweep", "--b", "0.008", "--grid", "0.1:0.2:2", "--out", out]) == 0
    path = tmp_path / "theta_sweep.csv"
    rows = read(path)
    rows[0]["c"] = str(float(rows[0]["c"]) * 1.01)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    assert run(["check-foc", str(path)]) == 4


def test_bifurcation_and_validate(tmp_path):
    out = str(tmp_path)
    assert run(["bifurcation", "--out", out]) == 0
    assert len(read(tmp_path / "bifurcation.csv")) == 500
    assert run(["validate", "--out", out]) == 0
    assert "A8.4b" in (tmp_path / "validation.txt").read_text()


@pytest.mark.parametrize("argv", [
    ["steady-state", "--preset", "nope"],
    ["steady-state", "--theta", "-1"],
    ["steady-state", "--tol", "5"],
    ["theta-sweep", "--grid", "0.1:x:3"],
    ["frobnicate"],
    ["check-foc", "/no/such.csv"],
    ["steady-state", "--preset", "section6", "--config", "x.ini"],
])
def test_usage_errors_exit_2(argv, tmp_path, capsys):
    assert run(argv + ["--out", str(tmp_path)] if argv[0] != "frobnicate" else argv) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "epigrowth.cli", "equilibrium", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "R0" in proc.stdout


def test_simulate_without_infection_stays_clean(tmp_path):
    assert run(["simulate", "--b", "0.008", "--i0", "0", "--out", str(tmp_path)]) == 0
    assert all(float(r["i"]) == 0.0 for r in read(tmp_path / "trajectory.csv"))


def test_identical_runs_are_byte_identical(tmp_path):
    argv = ["theta-sweep", "--b", "0.01", "--grid", "0.02:0.2:4", "--seed", "3"]
    assert run(argv + ["--out", str(tmp_path / "a")]) == 0
    assert run(argv + ["--jobs", "2", "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "theta_sweep.csv").read_bytes() == (tmp_path / "b" / "theta_sweep.csv").read_bytes()
