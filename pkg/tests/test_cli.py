import json
import subprocess
import sys

import pytest

from conftest import fixture_path
from qtorus.cli import main, run


def structured(*argv):
    code, report, msg = run(list(argv) + ["--output", "structured"])
    return code, report, msg


def test_algebra_check_passes():
    code, rep, _ = structured("algebra", "check", "--fixture", fixture_path("torus2_cos"))
    assert code == 0 and rep["pass"]
    assert rep["task"] == "algebra check"
    assert "wall_time" not in rep


def test_norm_and_flags():
    code, rep, _ = structured("norm", "--fixture", fixture_path("cos1"), "--radius", "6",
                              "--seed", "9")
    assert code == 0
    assert rep["provenance"]["radii"] == [4, 6]
    assert rep["provenance"]["seed"] == 9


def test_seminorm_L_expected_value():
    code, rep, _ = structured("seminorm", "L", "--fixture", fixture_path("torus2_cos"))
    assert code == 0
    names = [c["name"] for c in rep["checks"]]
    assert "expected" in names


def test_tol_flag_can_fail_a_check():
    # an absurd negative tolerance makes the expected-value check fail
    code, rep, _ = structured("seminorm", "L", "--fixture", fixture_path("cos1"), "--tol", "-1")
    assert code == 1 and not rep["pass"]


def test_metric_validate_nonpositive_is_check_failure():
    code, rep, _ = structured("metric", "validate", "--fixture", fixture_path("nonpositive2"))
    assert code == 1
    assert not rep["pass"]


def test_nonpositive_metric_is_input_error_elsewhere():
    code, rep, msg = structured("connection", "compute", "--fixture", fixture_path("nonpositive2"))
    assert code == 2 and rep is None and "positivity" in msg


def test_complex_theta_rejected():
    code, rep, msg = structured("algebra", "check", "--fixture", fixture_path("bad_complex_theta"))
    assert code == 2 and "complex" in msg


def test_bad_inputs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, msg = structured("norm", "--fixture", str(bad))
    assert code == 2 and "line 1" in msg
    code, _, msg = structured("norm", "--fixture", str(tmp_path / "missing.json"))
    assert code == 2
    code, _, msg = structured("seminorm", "Q", "--fixture", fixture_path("cos1"))
    assert code == 2 and "expected one of" in msg
    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({"theta": {"n": 1}}))
    code, _, msg = structured("norm", "--fixture", str(empty))
    assert code == 2 and "element" in msg


def test_connection_check_cos():
    code, rep, _ = structured("connection", "check", "--fixture", fixture_path("cos1"))
    assert code == 0
    assert {c["name"] for c in rep["checks"]} == {"torsion", "self_adjoint", "compatibility"}


def test_inequality_and_timing():
    code, rep, _ = structured("inequality", "lemma45", "--fixture", fixture_path("conformal2"),
                              "--timing")
    assert code == 0
    assert rep["wall_time"] > 0


def test_determinism():
    argv = ("seminorm", "D", "--fixture", fixture_path("identity2"))
    assert structured(*argv) == structured(*argv)


def test_text_output(capsys):
    assert main(["algebra", "check", "--fixture", fixture_path("torus2_cos")]) == 0
    out = capsys.readouterr().out
    assert "algebra check" in out and "PASS" in out.upper()


def test_console_script_structured_json():
    proc = subprocess.run(
        [sys.executable, "-m", "qtorus.cli", "algebra", "check", "--fixture",
         fixture_path("identity2"), "--output", "structured"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["pass"] is True


@pytest.mark.parametrize("argv", [["--help"], []])
def test_usage(argv):
    with pytest.raises(SystemExit):
        main(argv)
