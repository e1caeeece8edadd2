"""
Tests for the toeplitz-cli entry point, run as a subprocess.
"""

import json
import subprocess
import sys

import pytest

from toeplitz_rigidity.datasets import save_loop_csv
from toeplitz_rigidity.odd_chern import diagonal_loop

PYTHON_EXEC = sys.executable
CLI_COMMAND = [PYTHON_EXEC, "-m", "toeplitz_rigidity.cli"]


# Helper function to run CLI command via subprocess
def run_cli_command(args_list):
    command = CLI_COMMAND + args_list
    print(f"Running command: {' '.join(command)}")
    result = subprocess.run(command, capture_output=True, text=True, check=False)
    print(f"CLI stdout:\n{result.stdout}")
    print(f"CLI stderr:\n{result.stderr}")
    return result


@pytest.fixture
def winding_csv(tmp_path):
    path = tmp_path / "winding_minus2.csv"
    save_loop_csv(diagonal_loop(-2, 2, 64), path)
    return str(path)


def test_version():
    result = run_cli_command(["--version"])
    assert result.returncode == 0
    assert "toeplitz-cli" in result.stdout


def test_no_command_prints_help():
    result = run_cli_command([])
    assert result.returncode == 2
    assert "usage" in result.stderr


def test_unknown_profile_is_an_input_error():
    result = run_cli_command(["--profile", "fast", "qexpand", "theta2"])
    assert result.returncode == 2
    assert "unknown profile" in result.stderr


def test_invalid_override_is_an_input_error():
    result = run_cli_command(["qexpand", "theta2", "--q-trunc", "0"])
    assert result.returncode == 2
    assert "q_trunc" in result.stderr


def test_missing_dataset_is_an_input_error():
    result = run_cli_command(["fixedpoint", "no_such_dataset", "--dry-run"])
    assert result.returncode == 2
    assert "not found" in result.stderr


def test_dry_run_reports_inputs():
    result = run_cli_command(["fixedpoint", "s3", "--dry-run", "--quiet"])
    assert result.returncode == 0, result.stderr
    data = json.loads(result.stdout)
    assert data["verdict"] == "DRY-RUN"
    assert data["inputs"]["dataset"] == "s3_circle_action"
    assert data["config"]["command"] == "fixedpoint"


def test_check_jacobi_dry_run_shows_default_spec():
    result = run_cli_command(["check-jacobi", "--fn", "fW", "--dataset", "x7_pole", "--dry-run", "--quiet"])
    assert result.returncode == 0, result.stderr
    spec = json.loads(result.stdout)["inputs"]["spec"]
    assert spec["index"] == "0"
    assert spec["weight"] == 5
    assert spec["group"] == "gamma-upper-0-2"


def test_qexpand_ranks_match_the_product_formula():
    result = run_cli_command(["qexpand", "theta2", "--dim-m", "5", "--dim-v", "3", "--q-trunc", "5", "--quiet"])
    assert result.returncode == 0, result.stderr
    data = json.loads(result.stdout)
    assert data["verdict"] == "PASS"
    assert data["rank_mismatches"] == []
    assert "1/2" in data["coefficients"]


def test_transgression_table_as_csv(tmp_path):
    output = tmp_path / "lambda2.csv"
    result = run_cli_command(["transgression", "--j", "2", "--rank-e", "4", "--q-trunc", "5",
                              "--output", str(output), "--quiet"])
    assert result.returncode == 0, result.stderr
    lines = output.read_text().splitlines()
    assert lines[0] == "degree,exponent,coefficient"
    assert "3,1/2,-1/6" in lines


def test_builtin_winding():
    result = run_cli_command(["winding", "--builtin-winding", "3", "--resolution", "64", "--quiet"])
    assert result.returncode == 0, result.stderr
    data = json.loads(result.stdout)
    assert data["verdict"] == "PASS"
    assert data["result"]["nearest"] == 3


def test_winding_from_file(winding_csv):
    result = run_cli_command(["winding", winding_csv, "--format", "yaml", "--quiet"])
    assert result.returncode == 0, result.stderr
    assert "nearest: -2.0" in result.stdout


def test_signature_of_cancelling_poles():
    result = run_cli_command(["signature", "x7", "--count", "10", "--quiet"])
    assert result.returncode == 0, result.stderr
    assert json.loads(result.stdout)["verdict"] == "PASS"


def test_signature_of_the_unit_c1_pairing_fails():
    result = run_cli_command(["signature", "s3", "--count", "10", "--quiet"])
    assert result.returncode == 1, result.stderr
    data = json.loads(result.stdout)
    assert data["verdict"] == "FAIL"
    assert data["odd_start"] == 0
    assert not data["vacuous"]


def test_signature_from_c3_on_is_constant():
    result = run_cli_command(["signature", "s3", "--count", "10", "--odd-start", "1", "--quiet"])
    assert result.returncode == 0, result.stderr
    data = json.loads(result.stdout)
    assert data["verdict"] == "PASS"
    assert data["odd_start"] == 1
    assert data["vacuous"]


def test_odd_start_outside_zero_one_is_an_input_error():
    result = run_cli_command(["signature", "s3", "--odd-start", "2"])
    assert result.returncode == 2
    assert "odd-start" in result.stderr


def test_log_module_needs_a_level():
    result = run_cli_command(["--log-module", "theta", "qexpand", "theta2", "--dry-run", "--quiet"])
    assert result.returncode == 2
    assert "NAME=LEVEL" in result.stderr


def test_log_module_level_is_applied():
    result = run_cli_command(["--log-module", "cli=WARNING", "qexpand", "theta2", "--dry-run", "--quiet"])
    assert result.returncode == 0, result.stderr
    assert "finished with verdict" not in result.stderr


def test_genus_with_violated_hypothesis_is_unasserted():
    result = run_cli_command(["genus", "model_s3", "--which", "W", "--q-trunc", "5", "--tau-samples", "2",
                              "--quiet"])
    assert result.returncode == 0, result.stderr
    assert json.loads(result.stdout)["verdict"] == "UNASSERTED"


def test_selftest_rejects_unknown_checks():
    result = run_cli_command(["selftest", "--only", "theta,bogus"])
    assert result.returncode == 2
    assert "bogus" in result.stderr


def test_selftest_dry_run_lists_checks():
    result = run_cli_command(["selftest", "--only", "k-theory,lambda-ring", "--dry-run", "--quiet"])
    assert result.returncode == 0, result.stderr
    assert json.loads(result.stdout)["inputs"]["checks"] == ["k-theory", "lambda-ring"]


@pytest.mark.slow
def test_selftest_algebraic_checks_pass():
    result = run_cli_command(["selftest", "--only", "k-theory,lambda-ring,quadrature", "--quiet"])
    assert result.returncode == 0, result.stderr
    assert json.loads(result.stdout)["verdict"] == "PASS"
