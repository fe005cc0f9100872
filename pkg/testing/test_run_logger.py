import logging

import pytest

from run_logger import DEFAULT_CONFIG, RunLogger, setup_logging


class TestRunLogger:

    def test_totals_per_phase(self):
        timer = RunLogger("test_timer")

        @timer.time_function("phase_a", "TEST")
        def work(x):
            return x * 2

        assert work(2) == 4
        assert work(3) == 6
        assert timer.calls == {"phase_a": 2}
        assert timer.totals["phase_a"] >= 0

    def test_bare_decorator_uses_function_name(self):
        timer = RunLogger("test_timer")

        @timer.time_function
        def sample():
            return "done"

        assert sample() == "done"
        assert sample.__name__ == "sample"
        assert list(timer.calls) == ["sample"]

    def test_failures_are_timed_and_reraised(self, caplog):
        timer = RunLogger("test_timer")

        @timer.time_function("broken")
        def broken():
            raise ValueError("bad input")

        with caplog.at_level(logging.INFO, logger="test_timer"):
            with pytest.raises(ValueError):
                broken()
        assert timer.calls == {"broken": 1}
        assert "FAILED" in caplog.text

    def test_reset(self):
        timer = RunLogger("test_timer")
        timer.time_function(len)([1])
        timer.reset()
        assert timer.totals == {} and timer.calls == {}


class TestSetupLogging:

    def test_log_file_lands_in_run_directory(self, tmp_path):
        logger = setup_logging(DEFAULT_CONFIG, log_dir=tmp_path)
        logger.info("hello from the test")
        for handler in logging.getLogger("simlogger").handlers:
            handler.flush()
        assert "hello from the test" in (tmp_path / "run.log").read_text()

    def test_missing_config_falls_back(self, tmp_path):
        logger = setup_logging(tmp_path / "absent.json", logger_name="fallback_test")
        assert logger.handlers
