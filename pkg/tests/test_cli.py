"""
Command line tests
Every subcommand end to end, plus exit codes for bad input
"""
import json

import pytest

from app.main import build_parser, main
from app.utils.results_store import ResultsStore


def write_results(path, rates, n=10):
    rows = []
    for planner, rate in rates.items():
        for env_seed in range(n):
            rows.append({"planner": planner, "budget": 50, "env_seed": env_seed, "rep": 0,
                         "solved": int(env_seed < round(rate * n)), "steps": 5, "mean_regret": 0.0})
    ResultsStore(path).append(rows)
    return str(path)


SPEC = """
[experiment]
name = cli
env_seeds = 0-1
budgets = 2
maze_width = 5
maze_height = 5
horizon = 10
step_cap = 10

[planner:bts]
algorithm = BTS
"""


class TestCommands:
    """Successful runs"""

    def test_gen_maze(self, capsys):
        assert main(["gen-maze", "--seed", "3", "--width", "7", "--height", "7"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 7
        assert all(len(line) == 7 for line in lines)
        text = "\n".join(lines)
        assert text.count("S") == 1 and text.count("G") == 1

    def test_gen_maze_is_reproducible(self, capsys):
        main(["gen-maze", "--seed", "8", "--width", "9", "--height", "9"])
        first = capsys.readouterr().out
        main(["gen-maze", "--seed", "8", "--width", "9", "--height", "9"])
        assert capsys.readouterr().out == first

    def test_plan_table(self, capsys):
        rc = main(["plan", "--seed", "1", "--env-seed", "2", "--width", "7", "--height", "7",
                   "--algorithm", "TSTS", "--budget", "5"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "predicted" in out and "sigma" in out
        for name in ("UP", "DOWN", "LEFT", "RIGHT"):
            assert name in out
        assert "committed:" in out

    def test_plan_on_needle_tree(self, capsys):
        rc = main(["plan", "--seed", "0", "--env", "needle", "--depth", "3", "--budget", "4",
                   "--oracle", "fixed", "--fixed-sigma", "0.5"])
        assert rc == 0
        assert "committed:" in capsys.readouterr().out

    def test_episode_json(self, capsys):
        rc = main(["episode", "--seed", "4", "--env-seed", "1", "--width", "7", "--height", "7",
                   "--budget", "5", "--error-scale", "0", "--step-cap", "60"])
        result = json.loads(capsys.readouterr().out)
        assert rc == 0
        assert result["solved"] is True
        assert result["steps"] == len(result["actions"])

    def test_bound_check_passes(self, capsys):
        rc = main(["bound-check", "--seed", "0", "--depth", "2", "--repetitions", "50"])
        out = capsys.readouterr().out
        assert rc == 0
        assert out.strip().endswith("PASS")

    def test_bound_check_json(self, capsys):
        rc = main(["bound-check", "--seed", "0", "--depth", "2", "--budgets", "1-3", "--repetitions", "20", "--json"])
        report = json.loads(capsys.readouterr().out)
        assert rc == 0
        assert [row["T"] for row in report["rows"]] == [1, 2, 3]

    def test_bound_check_failure_exit_code(self, capsys):
        rc = main(["bound-check", "--seed", "0", "--depth", "2", "--repetitions", "10",
                   "--rule", "adversarial", "--focus", "0", "--mass", "1.0", "--budgets", "1-2"])
        assert rc == 3
        assert "FAIL" in capsys.readouterr().out

    def test_dump_tree_json(self, capsys):
        rc = main(["dump-tree", "--seed", "0", "--env", "needle", "--depth", "3", "--budget", "3",
                   "--format", "json"])
        data = json.loads(capsys.readouterr().out)
        assert rc == 0
        assert data["stats"]["iterations"] == 3

    @pytest.mark.integration
    def test_experiment(self, tmp_path, capsys):
        spec_path = tmp_path / "cli.ini"
        spec_path.write_text(SPEC)
        output = tmp_path / "cli.csv"
        rc = main(["experiment", str(spec_path), "--output", str(output), "--workers", "1"])
        assert rc == 0
        assert output.exists()
        assert "2 cells computed" in capsys.readouterr().out


    def test_calibrate_writes_record(self, tmp_path, capsys):
        output = tmp_path / "calibration.json"
        rc = main(["calibrate", "--seeds", "0-1", "--width", "7", "--height", "7", "--horizon", "20",
                   "--step-cap", "60", "--iterations", "2", "--output", str(output)])
        printed = json.loads(capsys.readouterr().out)
        stored = json.loads(output.read_text())
        assert rc == 0
        assert stored["seeds"] == [0, 1]
        assert printed["error_scale"] == stored["error_scale"]
        assert 0.0 <= stored["greedy_success"] <= 1.0

    def test_check_results_pass(self, tmp_path, capsys):
        comparison = write_results(tmp_path / "comparison.csv", {
            "greedy": 0.3, "bts": 0.8, "tsts": 0.7, "bayes-uct2": 0.7, "bts-mcts": 0.8, "bts-quantile": 0.9
        })
        baseline = write_results(tmp_path / "baseline.csv", {"puct-fixed": 0.5, "bts-noised": 0.7})
        rc = main(["check-results", comparison, baseline, "--json"])
        checks = json.loads(capsys.readouterr().out)
        assert rc == 0
        assert [c["status"] for c in checks] == ["PASS"] * 4

    def test_check_results_failure_exit_code(self, tmp_path, capsys):
        path = write_results(tmp_path / "r.csv", {"greedy": 0.9, "bts": 0.8, "puct": 0.5})
        rc = main(["check-results", path, "--label", "puct_fixed=puct"])
        out = capsys.readouterr().out
        assert rc == 3
        assert "FAIL" in out and "SKIP" in out

class TestErrors:
    """Exit codes for invalid input"""

    def test_invalid_planner_option(self, capsys):
        assert main(["plan", "--seed", "0", "--budget", "0", "--width", "7", "--height", "7"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_invalid_commitment(self):
        assert main(["plan", "--seed", "0", "--commitment", "maybe", "--width", "7", "--height", "7"]) == 2

    def test_even_maze_width(self):
        assert main(["gen-maze", "--seed", "0", "--width", "8"]) == 2

    def test_missing_spec_file(self, tmp_path):
        assert main(["experiment", str(tmp_path / "nope.ini")]) == 2

    def test_bad_label_override(self, tmp_path):
        path = write_results(tmp_path / "r.csv", {"bts": 0.5})
        assert main(["check-results", path, "--label", "champion=bts"]) == 2

    def test_seed_is_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["plan"])

    def test_unknown_algorithm(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["plan", "--seed", "0", "--algorithm", "MAGIC"])
