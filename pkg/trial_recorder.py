# ==========================
# trial_recorder.py
# ==========================
"""
trial_recorder.py - listens on the event bus during a run
logs per-point summaries and (optionally) writes one csv row per trial
"""

import csv
import logging
from pathlib import Path
from typing import Optional, Union

from event_bus import EventBus
from events import Event, PointCompletedEvent, RunFinishedEvent, RunStartedEvent, TrialCompletedEvent

TRIAL_COLUMNS = ("trial_id", "scheme", "sweep_value", "num_sensors", "num_features", "objective",
                 "surrogate_lb", "true_class", "predicted_class", "correct", "rho", "eta",
                 "fallback", "pi_hat")


#MARK: TrialRecorder
class TrialRecorder:
    """
    subscribes to the run, trial and point events of one run
    with path set, every TrialCompletedEvent becomes a row of the trials csv
    """
    def __init__(self, bus: EventBus, path: Optional[Union[str, Path]] = None):
        self.bus = bus
        self.path = Path(path) if path is not None else None
        self.logger = logging.getLogger(self.__class__.__name__)
        self.rows_written = 0
        self.fallbacks = 0
        self.runs: list[dict] = []
        self._file = None
        self._writer = None

        if self.path is not None:
            self._file = open(self.path, "w", newline="")
            self._writer = csv.writer(self._file, lineterminator="\n")
            self._writer.writerow(TRIAL_COLUMNS)

        bus.subscribe(RunStartedEvent, self._on_started)
        bus.subscribe(TrialCompletedEvent, self._on_trial)
        bus.subscribe(PointCompletedEvent, self._on_point)
        bus.subscribe(RunFinishedEvent, self._on_finished)
        self.logger.debug(f"trial recorder started (file: {self.path})")

    def _on_started(self, event: Event):
        self.runs.append(dict(event.data))
        self.logger.info(f"{event.data['kind']} run started ({event.data['ordering']} ordering)")

    def _on_trial(self, event: Event):
        outcome = event.data
        self.fallbacks += outcome.fallback
        if self._writer is None:
            return
        self._writer.writerow([
            outcome.trial_id,
            outcome.scheme.value,
            repr(outcome.sweep_value),
            outcome.num_selected,
            outcome.num_features,
            repr(outcome.objective),
            repr(outcome.surrogate_lb),
            outcome.true_class,
            outcome.predicted_class,
            int(outcome.correct),
            repr(outcome.rho),
            repr(outcome.eta),
            int(outcome.fallback),
            ";".join(repr(p) for p in outcome.pi_hat),
        ])
        self.rows_written += 1

    def _on_point(self, event: Event):
        summary = event.data
        self.logger.info(f"{summary.scheme.value:>20} @ {summary.sweep_axis}={summary.sweep_value:g}: "
                         f"acc {summary.accuracy:.4f} +- {summary.std_err:.4f}, "
                         f"|S| {summary.mean_num_sensors:.2f}, D~ {summary.mean_num_features:.1f}")
        if summary.fallbacks:
            self.logger.warning(f"{summary.scheme.value} @ {summary.sweep_value:g}: "
                                f"{summary.fallbacks}/{summary.trials} trials fell back to a uniform guess")

    def _on_finished(self, event: Event):
        self.logger.info(f"{event.data.get('kind')} run finished ({event.data.get('rows', 0)} rows)")
        self.close()

    def close(self):
        if self._file is not None:
            self._file.close()
            self._file = None
            self._writer = None
            self.logger.info(f"{self.rows_written} trial records written to {self.path}")
