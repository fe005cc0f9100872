"""
run_logger.py - logging setup and run timing for the simulator
logging is configured from run_logger_config.json via dictConfig; the log file lands in the run's output directory
"""

import functools
import json
import logging
import logging.config
import os
import time
from pathlib import Path
from typing import Callable, Optional, Union

DEFAULT_CONFIG = Path(__file__).with_name("run_logger_config.json")


#MARK: setup_logging
def setup_logging(
    config_file: Optional[Union[str, Path]] = DEFAULT_CONFIG,
    config_dict: Optional[dict] = None,
    logger_name: str = "simlogger",
    log_dir: Optional[Union[str, Path]] = None):
    """
    Tries to create a logger from config dict or file (json)

    Priority: config_dict > config_file > fallback console logger
    With log_dir set, the "file" handler writes to <log_dir>/run.log
    """
    # try config_dict first
    if config_dict:
        try:
            logging.config.dictConfig(config_dict)
            return logging.getLogger(logger_name)
        except (ValueError, TypeError, KeyError) as e:
            print(f"Warning: Could not load logging config from dict ({e}). Trying config file.")

    # then config_file
    if config_file:
        try:
            with open(config_file) as conf:
                config = json.load(conf)
            file_handler = config.get("handlers", {}).get("file")
            if file_handler is not None:
                target_dir = Path(log_dir) if log_dir is not None else Path(file_handler["filename"]).parent
                os.makedirs(target_dir, exist_ok=True)
                file_handler["filename"] = str(target_dir / Path(file_handler["filename"]).name)
            logging.config.dictConfig(config)
            return logging.getLogger(logger_name)
        except (OSError, ValueError, ImportError, KeyError) as e:
            print(f"Warning: Could not load logging config from file ({e}). Using fallback.")

    # if all fails, fallback to simple console logger
    logger = logging.getLogger(logger_name)
    if not logger.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s - (line: %(lineno)d) [%(filename)s] [FALLBACK]",
            datefmt="%Y-%m-%dT%H:%M:%S"
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        logger.setLevel(logging.INFO)
    return logger


#MARK: RunLogger
class RunLogger:
    """
    wall-clock timing of the long phases of a run (context, calibration, sweeps, oracle runs)
    every timed call is logged; totals per phase are kept for the end-of-run report

        @timer.time_function
        @timer.time_function("sweep", "EXPERIMENT")
    """

    def __init__(self, logger_name: str = "simlogger"):
        self.logger = logging.getLogger(logger_name)
        self.totals: dict[str, float] = {}
        self.calls: dict[str, int] = {}

    def time_function(self, func_or_name=None, category: str = "GENERAL"):
        if callable(func_or_name):
            return self._timed(func_or_name, func_or_name.__name__, category)
        return lambda func: self._timed(func, func_or_name or func.__name__, category)

    def _timed(self, func: Callable, phase: str, category: str) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            status = "error"
            try:
                result = func(*args, **kwargs)
                status = "success"
                return result
            finally:
                elapsed = time.perf_counter() - start
                self.totals[phase] = self.totals.get(phase, 0.0) + elapsed
                self.calls[phase] = self.calls.get(phase, 0) + 1
                level = logging.INFO if status == "success" else logging.ERROR
                suffix = "" if status == "success" else " - FAILED"
                self.logger.log(level, f"TIMING [{category}] {phase}: {elapsed:.3f}s{suffix}",
                                extra={"phase": phase, "category": category,
                                       "execution_time": elapsed, "status": status})
        return wrapper

    def report(self) -> None:
        """one line per timed phase, slowest first"""
        for phase, total in sorted(self.totals.items(), key=lambda item: -item[1]):
            self.logger.info(f"phase {phase}: {self.calls[phase]} call(s), {total:.2f}s total")

    def reset(self) -> None:
        self.totals.clear()
        self.calls.clear()


# shared instance, used as a decorator across the simulator
timer = RunLogger()
