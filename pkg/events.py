# ==========================
# events.py
# ==========================
"""
events.py - events the monte-carlo harness publishes
only events somebody consumes (recorder, progress logging) live here
"""

from datetime import datetime
from typing import Any


#MARK: Event
class Event:
    """base event class - all events inherit from this"""
    def __init__(self, data: Any = None):
        self.timestamp = datetime.now()
        self.data = data
        self.event_type = self.__class__.__name__

    def __repr__(self):
        return f"{self.event_type}(data={self.data}, time={self.timestamp})"


#MARK: run events
class RunStartedEvent(Event):
    """a sweep / validation run begins, data = {'kind', 'ordering'}"""
    pass


class RunFinishedEvent(Event):
    """run done, data = {'kind', 'ordering', 'rows'}"""
    pass


#MARK: trial events
class TrialCompletedEvent(Event):
    """one scheme finished one trial, data = TrialOutcome"""
    pass


class PointCompletedEvent(Event):
    """all trials of one (scheme, sweep value) aggregated, data = PointSummary"""
    pass
