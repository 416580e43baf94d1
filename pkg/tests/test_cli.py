import subprocess
import sys

import pytest

from lieflow.cli import main


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "lieflow", *args],
        capture_output=True,
        text=True,
    )


# -- exit-code contract --------------------------------------------------------


def test_exit_zero_on_passing_scenarios(scenario_dir):
    for name in ("scenario_a", "scenario_b", "scenario_c"):
        result = run_cli("verify-aut", str(scenario_dir / f"{name}.yaml"))
        assert result.returncode == 0, result.stdout + result.stderr
        assert "result: PASS" in result.stdout


def test_exit_one_on_verification_failure(scenario_dir):
    result = run_cli("verify-aut", str(scenario_dir / "broken_involutive.yaml"))
    assert result.returncode == 1
    assert "no certificate" in result.stdout


def test_exit_two_on_input_errors(scenario_dir, tmp_path):
    malformed = run_cli("verify-aut", str(scenario_dir / "malformed.yaml"))
    assert malformed.returncode == 2
    assert "line" in malformed.stderr

    invalid = run_cli("verify-aut", str(scenario_dir / "bad_field_x.yaml"))
    assert invalid.returncode == 2
    assert "field_x" in invalid.stderr

    missing = run_cli("verify-aut", str(tmp_path / "nope.yaml"))
    assert missing.returncode == 2


def test_check_involutive_exit_codes(scenario_dir):
    good = run_cli("check-involutive", str(scenario_dir / "scenario_b.yaml"))
    assert good.returncode == 0
    assert "6/6 pairs certified" in good.stdout
    bad = run_cli("check-involutive", str(scenario_dir / "broken_involutive.yaml"))
    assert bad.returncode == 1


def test_solve_gamma_output(scenario_dir):
    result = run_cli("solve-gamma", str(scenario_dir / "scenario_c.yaml"))
    assert result.returncode == 0
    assert "row 1: (0, 2)" in result.stdout
    assert "row 2: (0, x)" in result.stdout


def test_compare_exponential_reports_gap(scenario_dir):
    result = run_cli("compare-exponential", str(scenario_dir / "scenario_c.yaml"))
    assert result.returncode == 0
    line = next(l for l in result.stdout.splitlines() if l.startswith("point [0.5]"))
    gap = float(line.split("naive_gap=")[1].split()[0])
    assert gap >= 0.03


def test_all_subcommand(scenario_dir):
    result = run_cli("all", str(scenario_dir / "scenario_a.yaml"))
    assert result.returncode == 0
    assert "inverse identity" in result.stdout


# -- machine report ------------------------------------------------------------


def test_report_is_byte_identical_across_runs(scenario_dir, tmp_path):
    first = tmp_path / "first.jsonl"
    second = tmp_path / "second.jsonl"
    for path in (first, second):
        result = run_cli(
            "verify-aut", str(scenario_dir / "scenario_c.yaml"), "--report", str(path)
        )
        assert result.returncode == 0
    assert first.read_bytes() == second.read_bytes()


def test_report_record_fields(scenario_dir, tmp_path):
    path = tmp_path / "report.jsonl"
    run_cli("verify-aut", str(scenario_dir / "scenario_a.yaml"), "--report", str(path))
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 6
    import json

    for line in lines:
        record = json.loads(line)
        assert list(record) == [
            "point",
            "generator",
            "direct",
            "cocycle",
            "naive",
            "residual",
            "naive_gap",
            "defect",
            "status",
        ]
        assert record["status"] == "ok"


def test_integrator_override_flags(scenario_dir):
    result = run_cli(
        "verify-aut",
        str(scenario_dir / "scenario_a.yaml"),
        "--method",
        "rk4",
        "--step",
        "0.005",
    )
    assert result.returncode == 0


def test_main_callable_directly(scenario_dir):
    assert main(["verify-aut", str(scenario_dir / "scenario_a.yaml")]) == 0
    assert main(["verify-aut", str(scenario_dir / "broken_involutive.yaml")]) == 1
