import io
import json
from pathlib import Path

import pytest

from stochsym import __version__
from stochsym.cli import COMMANDS, run
from stochsym.errors import ValidationError
from stochsym.problem import build_problem, load_problem

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"


def cli(*argv):
    out = io.StringIO()
    code, rep = run([*map(str, argv)], out)
    return code, out.getvalue(), rep


def write(tmp_path, text, name="p.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


# ---- problem files


def test_example_problem_loads():
    p = load_problem(PROBLEMS / "example1.yaml")
    assert p.space.state == ("y",)
    assert p.change.new_state == ("x",)
    assert p.numeric.dt[0] == 2.0**-6 and p.numeric.x0 == (1.0,)


def test_unnamed_new_coordinate_gets_fresh_name():
    p = build_problem({
        "variables": {"state": ["x"]},
        "sde": {"drift": ["0"], "noise": [["1"]]},
        "change": {"forward": ["2*x"], "inverse": ["x = y/2"]},
    })
    assert p.change.new_state == ("y",)


@pytest.mark.parametrize("data, fragment", [
    ({"variables": {"state": ["x"]}}, "sde"),
    ({"variables": {"state": ["x"]}, "sde": {"drift": ["0"], "noise": [["1"]]}, "extra": 1}, "unknown sections"),
    ({"variables": {"state": ["x"]}, "sde": {"drift": ["0"], "noise": [["1"]]}, "numeric": {"speed": 1}}, "numeric"),
    ({"variables": {"state": ["x"]}, "sde": {"drift": ["0"], "noise": ["1"]}}, "rows"),
    ({"variables": {"state": ["x"]}, "sde": {"drift": ["0"], "noise": [["1"]]}, "numeric": {"domain": {"x": [2, 1]}}},
     "empty interval"),
])
def test_invalid_problems(data, fragment):
    with pytest.raises(ValidationError, match=fragment):
        build_problem(data)


def test_missing_section_for_command():
    p = build_problem({"variables": {"state": ["x"]}, "sde": {"drift": ["0"], "noise": [["1"]]}})
    with pytest.raises(ValidationError, match="symmetry"):
        p.require("symmetry")


# ---- exit codes


@pytest.mark.parametrize("command, problem, code", [
    ("check", "example1.yaml", 0),
    ("check", "example2.yaml", 0),
    ("check", "non_symmetry.yaml", 1),
    ("check", "random_field.json", 0),
    ("check", "strat_example1.yaml", 0),
    ("unal", "unal_square.yaml", 0),
    ("unal", "non_symmetry.yaml", 2),
    ("tau-check", "tau.yaml", 1),
    ("reduce", "no_quadrature.yaml", 3),
    ("solve", "no_quadrature.yaml", 3),
    ("reduce", "non_symmetry.yaml", 1),
    ("reduce", "tau.yaml", 2),
])
def test_exit_codes(command, problem, code):
    assert cli(command, PROBLEMS / problem)[0] == code


@pytest.mark.parametrize("problem", sorted(p.name for p in PROBLEMS.iterdir()))
@pytest.mark.parametrize("command", COMMANDS)
def test_every_command_terminates_cleanly(command, problem):
    code, out, _ = cli(command, PROBLEMS / problem, "--no-numeric")
    assert code in (0, 1, 2, 3)
    assert "== INPUT ==" in out or "input error" in out


def test_syntax_error_and_missing_file(tmp_path):
    bad = write(tmp_path, "variables: {state: [x]}\nsde: {drift: ['x +'], noise: [['1']]}\n")
    assert cli("check", bad)[0] == 2
    assert cli("check", tmp_path / "absent.yaml")[0] == 2
    assert cli("check", write(tmp_path, "a: [1", "broken.yaml"))[0] == 2


def test_time_only_tau_passes(tmp_path):
    p = write(tmp_path, "variables: {state: [x]}\nsde: {drift: ['x'], noise: [['1']]}\ntau: {expr: 't^2'}\n")
    assert cli("tau-check", p)[0] == 0


# ---- reports


def test_check_output_sections():
    code, out, _ = cli("check", PROBLEMS / "example1.yaml")
    assert code == 0
    for head in ("== INPUT ==", "== RESIDUALS ==", "== VERDICT =="):
        assert head in out
    assert "symmetry: yes (symbolic)" in out


def test_non_symmetry_reports_witness():
    _, out, rep = cli("check", PROBLEMS / "non_symmetry.yaml")
    assert "nonzero" in out
    assert "witness" in rep.result["residuals"]["noise[x,w]"]


def test_reduce_and_solve_example_two():
    _, out, _ = cli("reduce", PROBLEMS / "example2.yaml")
    assert "drift: exp(-t)" in out and "noise: 1" in out
    _, out, _ = cli("solve", PROBLEMS / "example2.yaml")
    assert "exp(-t)" in out and "w" in out


def test_quiet_suppresses_text():
    assert cli("check", PROBLEMS / "example1.yaml", "--quiet")[1] == ""


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_json_round_trip(tmp_path):
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    code1, _, _ = cli("check", PROBLEMS / "example2.yaml", "--json", first, "--seed", 4)
    code2, _, _ = cli("check", first, "--json", second)
    a, b = json.loads(first.read_text()), json.loads(second.read_text())
    assert code1 == code2 == 0
    assert a["problem"]["numeric"]["seed"] == 4
    assert a["sections"] == b["sections"] and a["result"] == b["result"]


def test_overrides_reach_zero_test():
    _, _, rep = cli("check", PROBLEMS / "example1.yaml", "--seed", 9, "--samples", 64, "--tol", 1e-8)
    n = rep.problem.numeric
    assert (n.seed, n.samples, n.tol) == (9, 64, 1e-8)


def test_too_few_samples_is_input_error():
    assert cli("check", PROBLEMS / "example1.yaml", "--samples", 8)[0] == 2


@pytest.mark.slow
def test_verify_change_runs_monte_carlo(tmp_path):
    out_json = tmp_path / "v.json"
    code, out, _ = cli("verify-change", PROBLEMS / "example1.yaml", "--json", out_json)
    assert code == 0 and "== NUMERIC ==" in out
    again, _, _ = cli("verify-change", out_json)
    assert again == 0
