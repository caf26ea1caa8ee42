import json

import pytest
from click.testing import CliRunner

from plcad.cli import EXIT_FAIL, EXIT_OK, EXIT_USER, main

CIRCLE = ["--vars", "x,y", "--poly", "x^2 + y^2 - 1"]


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args, input=None):
        return runner.invoke(main, list(args), input=input)

    return invoke


def test_circle_text(run, example_path):
    result = run(example_path("circle.cad"))
    assert result.exit_code == EXIT_OK, result.stderr
    lines = result.stdout.splitlines()
    assert len(lines) == 13, "one line per cell"
    assert lines[0].startswith("(1,1)  dim 2  sample (-2, 0)")
    assert any(line.startswith("(3,3)") and line.endswith("signs [-]") for line in lines)


def test_flags_alone_define_the_job(run):
    result = run(*CIRCLE, "--output", "json")
    assert result.exit_code == EXIT_OK, result.stderr
    data = json.loads(result.stdout)
    assert data["schema"] == "plcad-cad/1" and data["result"] == "CAD"
    assert data["counts"] == [5, 13]
    assert [len(c["children"]) for c in data["tree"]["children"]] == [1, 3, 5, 3, 1]


def test_stdin_input(run):
    result = run("-", input="vars: x\npoly: x - 1\n")
    assert result.exit_code == EXIT_OK, result.stderr
    assert len(result.stdout.splitlines()) == 3


def test_json_is_stable(run, example_path):
    first = run(example_path("circle_line_ec.cad"), "--output", "json", "--seed", "3")
    second = run(example_path("circle_line_ec.cad"), "--output", "json", "--seed", "3")
    assert first.exit_code == EXIT_OK, first.stderr
    assert first.stdout == second.stdout
    data = json.loads(first.stdout)
    assert data["operator"] == "mccallum-ec" and data["ec"] == 1


def test_not_well_oriented_exits_1(run, example_path):
    result = run(example_path("not_well_oriented.cad"))
    assert result.exit_code == EXIT_FAIL
    assert result.stdout.startswith("FAIL:")
    assert "internal error" not in result.stderr


def test_fail_as_json(run, example_path):
    result = run(example_path("not_well_oriented.cad"), "--output", "json")
    assert result.exit_code == EXIT_FAIL
    data = json.loads(result.stdout)
    assert data["result"] == "FAIL"
    assert "internal error" not in result.stderr
    assert data["cell"]["index"] == [2, 1, 2] and data["level"] == 4


def test_collins_completes_the_failing_input(run, example_path):
    result = run(example_path("not_well_oriented.cad"), "--operator", "collins")
    assert result.exit_code == EXIT_OK, result.stderr


def test_delineating_fixture_completes(run, example_path):
    result = run(example_path("mdp.cad"))
    assert result.exit_code == EXIT_OK, result.stderr
    assert len(result.stdout.splitlines()) == 23


@pytest.mark.parametrize(
    "args, message",
    [
        (["--poly", "x"], "variables undeclared"),
        (["--vars", "x", "--poly", "x + q"], "unknown variable"),
        (CIRCLE + ["--ec", "2"], "out of range"),
        (["--vars", "x", "--poly", "x", "--output", "svg"], "two variables"),
        (["--vars", "x", "--poly", "3"], "nothing to decompose"),
        (CIRCLE + ["--max-cells", "3"], "budget exceeded"),
        (CIRCLE + ["--induced", "3"], "--induced"),
    ],
)
def test_user_errors_exit_2(run, args, message):
    result = run(*args)
    assert result.exit_code == EXIT_USER, f"expected exit 2, got {result.exit_code}"
    assert result.stderr.startswith("error:")
    assert message in result.stderr


def test_bad_environment_exits_2(run, monkeypatch):
    monkeypatch.setenv("PLCAD_WORKERS", "lots")
    result = run(*CIRCLE)
    assert result.exit_code == EXIT_USER
    assert "PLCAD_WORKERS" in result.stderr


def test_missing_file_is_a_usage_error(run, tmp_path):
    result = run(str(tmp_path / "absent.cad"))
    assert result.exit_code == 2


def test_verify_reports_to_stderr(run):
    result = run(*CIRCLE, "--verify", "2", "--seed", "1")
    assert result.exit_code == EXIT_OK, result.stderr
    assert "partition: ok" in result.stderr
    assert "cylindricity: ok" in result.stderr


def test_verify_in_json(run, monkeypatch):
    monkeypatch.setenv("PLCAD_VERIFY_TRIALS", "100")
    result = run(*CIRCLE, "--output", "json", "--verify")
    assert result.exit_code == EXIT_OK, result.stderr
    names = [r["name"] for r in json.loads(result.stdout)["verification"]]
    assert names == ["sign-invariance", "partition", "cylindricity"]


def test_show_projection(run):
    result = run(*CIRCLE, "--show-projection")
    lines = result.stdout.splitlines()
    assert lines[0] == "# P[y]: x^2 + y^2 - 1"
    assert lines[1] == "# P[x]: x - 1, x + 1"
    assert len(lines) == 15


def test_induced(run):
    result = run(*CIRCLE, "--induced", "1")
    assert result.exit_code == EXIT_OK, result.stderr
    assert len(result.stdout.splitlines()) == 5


def test_svg(run, example_path):
    result = run(example_path("circle.cad"), "--output", "svg")
    assert result.exit_code == EXIT_OK, result.stderr
    assert result.stdout.startswith("<?xml")
    assert result.stdout.count("<circle") == 13, "one marker per cell sample"
    again = run(example_path("circle.cad"), "--output", "svg")
    assert again.stdout == result.stdout
