import json

import pytest

from conftest import TIGHT_CTT, TOY_CTT
from cttsolve.cli import main

FEASIBLE_TOY_SOLUTION = """\
c1 rA 0 1
c1 rA 0 2
c1 rA 1 0
c2 rA 1 1
c2 rA 1 2
c3 rB 1 1
c3 rB 1 2
"""


@pytest.fixture
def toy_path(tmp_path):
    path = tmp_path / "toy.ctt"
    path.write_text(TOY_CTT)
    return str(path)


@pytest.fixture
def tight_path(tmp_path):
    path = tmp_path / "tight.ctt"
    path.write_text(TIGHT_CTT)
    return str(path)


class TestValidate:
    def test_valid_instance(self, toy_path, capsys):
        assert main(["validate", toy_path]) == 0
        assert "valid" in capsys.readouterr().out

    def test_syntax_error_exit_2(self, tmp_path, capsys):
        path = tmp_path / "broken.ctt"
        path.write_text(TOY_CTT.replace("END.\n", ""))
        assert main(["validate", str(path)]) == 2
        assert "line" in capsys.readouterr().err

    def test_semantic_error_exit_1(self, tmp_path, capsys):
        path = tmp_path / "bad.ctt"
        path.write_text(TOY_CTT.replace("Courses: 3", "Courses: 4"))
        assert main(["validate", str(path)]) == 1

    def test_missing_file_exit_2(self):
        assert main(["validate", "/nonexistent.ctt"]) == 2

    def test_usage_error_exit_2(self):
        assert main(["frobnicate"]) == 2


class TestStats:
    def test_fields(self, toy_path, capsys):
        assert main(["stats", toy_path]) == 0
        out = capsys.readouterr().out
        assert "events: 7" in out
        assert "conflict edges: 2" in out
        assert "frequency:" in out
        assert "utilisation:" in out


class TestEvaluate:
    def test_feasible_solution(self, toy_path, tmp_path, capsys):
        sol = tmp_path / "toy.sol"
        sol.write_text(FEASIBLE_TOY_SOLUTION)
        assert main(["evaluate", toy_path, str(sol)]) == 0
        out = capsys.readouterr().out
        assert "objective:" in out
        assert "capacity:" in out

    def test_infeasible_solution_exit_1(self, toy_path, tmp_path, capsys):
        sol = tmp_path / "bad.sol"
        sol.write_text("c1 rA 0 0\n")  # forbidden period and missing events
        assert main(["evaluate", toy_path, str(sol)]) == 1
        assert "violation" in capsys.readouterr().err

    def test_weight_override_changes_objective(self, toy_path, tmp_path,
                                               capsys):
        sol = tmp_path / "toy.sol"
        sol.write_text(FEASIBLE_TOY_SOLUTION)
        main(["evaluate", toy_path, str(sol)])
        base = capsys.readouterr().out
        main(["evaluate", toy_path, str(sol), "--weights", "0,0,0,0"])
        zeroed = capsys.readouterr().out
        assert "objective: 0" in zeroed
        assert base != zeroed


class TestBuildAndSolveMps:
    def test_build_then_solve(self, tight_path, tmp_path, capsys):
        mps = tmp_path / "tight.mps"
        assert main(["build", tight_path, "--formulation", "monolithic",
                     "-o", str(mps)]) == 0
        assert mps.exists()
        capsys.readouterr()
        assert main(["solve-mps", str(mps)]) == 0
        out = capsys.readouterr().out
        assert "status: optimal" in out
        assert "objective: 14" in out

    def test_build_to_stdout(self, toy_path, capsys):
        assert main(["build", toy_path, "--formulation", "surface"]) == 0
        assert "ENDATA" in capsys.readouterr().out


class TestSolve:
    def test_exact_strategy(self, tight_path, tmp_path, capsys):
        out_file = tmp_path / "tight.sol"
        assert main(["solve", tight_path, "--strategy", "exact",
                     "-o", str(out_file)]) == 0
        out = capsys.readouterr().out
        assert "status: optimal" in out
        assert out_file.exists()
        capsys.readouterr()
        assert main(["evaluate", tight_path, str(out_file)]) == 0
        assert "objective: 14" in capsys.readouterr().out

    def test_contract_json_report(self, tight_path, capsys):
        assert main(["solve", tight_path, "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["strategy"] == "contract"
        assert payload["instance"] == "tight"

    def test_deterministic_output(self, tight_path, capsys):
        argv = ["solve", tight_path, "--strategy", "contract",
                "--surface-nodes", "200", "--dive-nodes", "50", "--json"]
        assert main(argv) == 0
        first = capsys.readouterr().out
        assert main(argv) == 0
        assert capsys.readouterr().out == first

    def test_infeasible_exit_1(self, tmp_path):
        text = """\
Name: stuck
Courses: 2
Rooms: 1
Days: 1
Periods_per_day: 2
Curricula: 1
Constraints: 0

COURSES:
c1 t1 2 1 5
c2 t2 2 1 5

ROOMS:
r1 9

CURRICULA:
q1 2 c1 c2

UNAVAILABILITY_CONSTRAINTS:

END.
"""
        path = tmp_path / "stuck.ctt"
        path.write_text(text)
        assert main(["solve", str(path), "--strategy", "contract"]) == 1
