"""
Settings, monitoring, seed derivation and results store tests
"""
import json
from unittest.mock import MagicMock, patch

import pytest
from pydantic import ValidationError

from app.config import Settings, get_settings
from app.errors import InvalidArgumentError, ResultsStoreError
from app.utils.monitoring import OperationStatus, SearchMonitor, global_monitor, monitor_operation
from app.utils.results_store import CSV_COLUMNS, EXTRA_COLUMNS, ResultsStore
from app.utils.seeding import derive_rng, derive_seed, standard_seed_split


def make_row(planner="bts", budget=5, env_seed=0, rep=0, solved=1, steps=12, regret=0.5, reward=-11.0):
    return {
        "planner": planner, "budget": budget, "env_seed": env_seed, "rep": rep,
        "solved": solved, "steps": steps, "mean_regret": regret, "wall_ms": "",
        "total_reward": reward
    }


class TestSettings:
    """Environment-driven settings"""

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("BAYESPLAN_BINS_M", raising=False)
        settings = Settings(_env_file=None)
        assert settings.bins_m == 50
        assert settings.log_level == "INFO"
        assert settings.get_maze_config() == {"width": 15, "height": 15, "horizon": 50}

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv("BAYESPLAN_BINS_M", "200")
        monkeypatch.setenv("BAYESPLAN_EXACT_POSTERIOR_OPS", "true")
        monkeypatch.setenv("BAYESPLAN_LOG_LEVEL", "debug")
        settings = Settings(_env_file=None)
        assert settings.get_posterior_config() == {"bins_m": 200, "exact": True}
        assert settings.log_level == "DEBUG"

    @pytest.mark.parametrize("name,value", [
        ("BAYESPLAN_BINS_M", "1"),
        ("BAYESPLAN_MAZE_WIDTH", "8"),
        ("BAYESPLAN_MAX_WORKERS", "0"),
        ("BAYESPLAN_LOG_LEVEL", "loud"),
        ("BAYESPLAN_PREDICTOR_ERROR_FLOOR", "-0.1"),
        ("BAYESPLAN_STEP_CAP", "0")
    ])
    def test_invalid_values(self, monkeypatch, name, value):
        monkeypatch.setenv(name, value)
        with pytest.raises(ValidationError):
            Settings(_env_file=None)

    def test_harness_config(self):
        config = Settings(_env_file=None).get_harness_config()
        assert set(config) == {"step_cap", "max_workers", "results_dir", "record_wall_time", "error_floor"}

    def test_singleton(self):
        assert get_settings() is get_settings()


class TestSearchMonitor:
    """Operation log and health report"""

    @pytest.fixture(autouse=True)
    def setup_monitor(self):
        self.monitor = SearchMonitor()

    def test_operation_stats(self):
        print("\n🔍 Testing operation statistics...")
        self.monitor.log_operation("search", OperationStatus.SUCCESS, {"budget": 10}, duration_ms=10.0)
        self.monitor.log_operation("search", OperationStatus.SUCCESS, {"budget": 10}, duration_ms=30.0)
        self.monitor.log_operation("episode", OperationStatus.FAILURE, {}, duration_ms=5.0, error="boom")

        stats = self.monitor.get_operation_stats()
        assert stats["total_operations"] == 3
        assert stats["success_rate"] == pytest.approx(200.0 / 3)
        assert stats["operation_types"]["search"] == {"count": 2, "avg_time": 20.0, "failures": 0}
        assert stats["operation_types"]["episode"]["failures"] == 1
        print("    ✅ Per-type counts tracked")

    def test_empty_stats(self):
        assert self.monitor.get_operation_stats() == {"total_operations": 0, "operation_types": {}}

    def test_log_is_bounded(self):
        monitor = SearchMonitor(max_logs=3)
        for _ in range(5):
            monitor.log_operation("search", OperationStatus.SUCCESS, {})
        assert len(monitor.operation_logs) == 3

    def test_health_check(self):
        report = self.monitor.health_check()
        assert report["status"] in ("healthy", "warning")
        assert report["process_rss_mb"] > 0

    def test_health_warning_threshold(self):
        with patch("app.utils.monitoring.get_settings", return_value=MagicMock(memory_warning_percent=0.0)):
            report = self.monitor.health_check()
        assert report["status"] == "warning"
        assert report["alerts"]

    def test_health_check_failure(self, mocker):
        mocker.patch("app.utils.monitoring.psutil.virtual_memory", side_effect=RuntimeError("no procfs"))
        report = self.monitor.health_check()
        assert report["status"] == "critical"
        assert "no procfs" in report["error"]

    def test_decorator_records_failures(self):
        @monitor_operation("unit_failure")
        def explode():
            raise ValueError("bad input")

        with pytest.raises(ValueError):
            explode()
        last = global_monitor.operation_logs[-1]
        assert last.operation_type == "unit_failure"
        assert last.status == OperationStatus.FAILURE
        assert last.error == "bad input"

    def test_decorator_records_success(self):
        @monitor_operation("unit_success")
        def compute():
            return 42

        assert compute() == 42
        last = global_monitor.operation_logs[-1]
        assert last.status == OperationStatus.SUCCESS
        assert last.details["result_type"] == "int"


class TestSeeding:
    """Seed derivation"""

    def test_derive_seed_is_stable(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
        assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
        assert 0 <= derive_seed(0) < 2 ** 64

    def test_streams_are_independent_of_call_order(self):
        a = derive_rng(5, 0, 1).random(4)
        derive_rng(5, 0, 0).random(100)
        assert list(derive_rng(5, 0, 1).random(4)) == list(a)

    def test_negative_component_rejected(self):
        with pytest.raises(InvalidArgumentError):
            derive_seed(1, -1)

    def test_standard_split(self):
        train, test = standard_seed_split(0)
        assert len(train) == 150
        assert len(test) == 500
        assert not set(train) & set(test)
        assert standard_seed_split(0) == (train, test)


class TestResultsStore:
    """CSV append, resume keys and summaries"""

    def test_append_and_keys(self, tmp_path):
        store = ResultsStore(tmp_path / "runs" / "out.csv")
        store.ensure_writable()
        store.append([make_row(rep=0), make_row(rep=1), make_row(planner="puct", budget=10)])
        assert store.csv_path.read_text().splitlines()[0] == ",".join(CSV_COLUMNS + EXTRA_COLUMNS)
        assert store.completed_keys() == {("bts", 5, 0, 0), ("bts", 5, 0, 1), ("puct", 10, 0, 0)}

    def test_append_nothing_creates_no_file(self, tmp_path):
        store = ResultsStore(tmp_path / "empty.csv")
        store.append([])
        assert not store.csv_path.exists()
        assert store.completed_keys() == set()
        assert store.summarize() == []

    def test_numeric_planner_names_stay_strings(self, tmp_path):
        store = ResultsStore(tmp_path / "out.csv")
        store.append([make_row(planner="7")])
        assert store.completed_keys() == {("7", 5, 0, 0)}

    def test_summary(self, tmp_path):
        store = ResultsStore(tmp_path / "out.csv")
        store.append([
            make_row(rep=0, solved=1, steps=10, regret=0.0),
            make_row(rep=1, solved=0, steps=20, regret=1.0)
        ])
        summary = store.write_summary()
        assert len(summary) == 1
        entry = summary[0]
        assert entry["n"] == 2
        assert entry["solved_mean"] == pytest.approx(0.5)
        assert entry["steps_mean"] == pytest.approx(15.0)
        assert entry["steps_stderr"] == pytest.approx(5.0)
        assert json.loads(store.summary_path.read_text()) == summary

    def test_unreadable_file(self, tmp_path):
        path = tmp_path / "broken.csv"
        path.write_text(",".join(CSV_COLUMNS + EXTRA_COLUMNS) + '\n"unterminated\n')
        with pytest.raises(ResultsStoreError):
            ResultsStore(path).completed_keys()
