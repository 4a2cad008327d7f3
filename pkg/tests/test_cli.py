import subprocess
import sys

import pytest

from actage.cli import (EXIT_EMPTY, EXIT_PARSE, EXIT_RESOURCE,
                        EXIT_VALIDATION, main)
from actage.engines import compute_report
from actage.config import default_config


def run_cli(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "actage", *argv],
        capture_output=True, text=True, timeout=300,
    )
    return proc


def test_solve_matches_library(tmp_path):
    proc = run_cli("solve", "--engine", "geo-mg")
    assert proc.returncode == 0
    values = dict(line.split(" = ") for line in proc.stdout.strip().splitlines())
    report = compute_report(default_config(), "geo-mg")
    assert float(values["coma"]) == pytest.approx(report.coma, rel=1e-12)
    assert float(values["aoa_task1"]) == pytest.approx(report.aoa[0], rel=1e-12)
    assert float(values["availability_task2"]) == pytest.approx(
        report.availability[1], rel=1e-12)


def test_solve_engines_all_run():
    for engine in ("det", "geo-mg", "geo-direct", "erlang"):
        proc = run_cli("solve", "--engine", engine)
        assert proc.returncode == 0, proc.stderr


def test_solve_resource_exit_code():
    proc = run_cli("solve", "--engine", "det", "--state-cap", "50",
                   "--set", "task1.service_slots=20",
                   "--set", "task2.service_slots=20",
                   "--set", "compute.capacity=40")
    assert proc.returncode == EXIT_RESOURCE
    assert "resource" in proc.stderr.lower()


def test_parse_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("what is this\n")
    proc = run_cli("solve", "--config", str(bad))
    assert proc.returncode == EXIT_PARSE

    proc = run_cli("solve", "--set", "nonsense.key=1")
    assert proc.returncode == EXIT_PARSE


def test_validation_exit_code():
    proc = run_cli("solve", "--set", "task1.gen_prob=0.7",
                   "--set", "task2.gen_prob=0.5")
    assert proc.returncode == EXIT_VALIDATION


def test_empty_result_exit_code(tmp_path):
    proc = run_cli("pareto", "--set", "energy_rate=0.0",
                   "--grid-powers", "3", "--grid-eta", "3",
                   "--out-front", str(tmp_path / "front.csv"))
    assert proc.returncode == EXIT_EMPTY


def test_simulate_csv(tmp_path):
    out = tmp_path / "sim.csv"
    proc = run_cli("simulate", "--slots", "20000", "--seed", "9",
                   "--out", str(out))
    assert proc.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# actage")
    header = lines[1].split(",")
    row = dict(zip(header, lines[2].split(",")))
    assert row["seed"] == "9"
    gen = int(row["generated1"])
    parts = (int(row["gate_rejected1"]) + int(row["uplink_lost1"])
             + int(row["compute_blocked1"]) + int(row["executed1"])
             + int(row["in_flight1"]))
    assert gen == parts


def test_compare_structure_and_ordering(tmp_path):
    out = tmp_path / "compare.csv"
    proc = run_cli("compare", "--points", "3", "--slots", "30000",
                   "--workers", "1", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    lines = out.read_text().splitlines()
    rows = [line.split(",") for line in lines[2:]]
    assert len(rows) == 3 * 2 * 5  # loads x tasks x models
    header = lines[1].split(",")
    model_col = header.index("model")
    flag_col = header.index("det_le_geo")
    geo_rows = [r for r in rows if r[model_col] == "geo-mg"]
    assert geo_rows and all(r[flag_col] == "true" for r in geo_rows)


def test_sweep_structure(tmp_path):
    out = tmp_path / "sweep.csv"
    proc = run_cli("sweep", "--points", "2", "--slots", "20000",
                   "--workers", "1", "--engines", "geo-mg,erlang",
                   "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    lines = out.read_text().splitlines()
    rows = [line.split(",") for line in lines[2:]]
    assert len(rows) == 2 * 4  # eta points x (2 engines + 2 sim modes)


def test_sweep_rejects_bad_range():
    proc = run_cli("sweep", "--start", "0.0", "--stop", "1.0", "--points", "2",
                   "--slots", "5000", "--workers", "1")
    assert proc.returncode == EXIT_VALIDATION


def test_pareto_outputs(tmp_path):
    front = tmp_path / "front.csv"
    points = tmp_path / "points.csv"
    proc = run_cli("pareto", "--grid-powers", "5", "--grid-eta", "5",
                   "--out-front", str(front), "--out-points", str(points))
    assert proc.returncode == 0, proc.stderr
    assert "front_size" in proc.stderr
    plines = points.read_text().splitlines()
    assert len(plines) == 2 + 5 ** 4
    flines = front.read_text().splitlines()
    kinds = {line.split(",")[0] for line in flines[2:]}
    assert kinds == {"front", "baseline"}


def test_main_in_process_exit_codes():
    # main() maps library errors without raising
    assert main(["solve", "--set", "task1.gen_prob=2.0"]) == EXIT_VALIDATION
    assert main(["solve", "--set", "bogus=1"]) == EXIT_PARSE
