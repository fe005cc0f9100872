# ==========================
# event_bus.py
# ==========================
"""
event_bus.py - synchronous publish/subscribe for the simulation harness
the harness is single-threaded, so delivery happens inline in subscription order
"""

import logging
import weakref
from collections import deque
from typing import Callable, Deque, Dict, List

from events import Event

logger = logging.getLogger(__name__)


#MARK: EventBus
class EventBus:
    """
    routes harness events to observers (trial recorder, progress logging)
    subscribers are held weakly: a recorder that goes away simply stops receiving
    """

    def __init__(self, max_history: int = 100):
        self._subscribers: Dict[type, List[weakref.ref]] = {}

        # the last few events, for debugging a run
        self.event_history: Deque[Event] = deque(maxlen=max_history)

    def subscribe(self, event_type: type, callback: Callable):
        """callback(event) for every published event whose type is exactly event_type"""
        # WeakMethod for bound methods, weakref.ref for plain functions
        if hasattr(callback, "__self__") and callback.__self__ is not None:
            weak_callback = weakref.WeakMethod(callback)
        else:
            weak_callback = weakref.ref(callback)
        self._subscribers.setdefault(event_type, []).append(weak_callback)
        logger.debug(f"subscription: {getattr(callback, '__name__', callback)} -> {event_type.__name__}")

    def publish(self, event: Event):
        """
        Publish an event to all live subscribers of its exact type.
        Subscriber errors are logged, never raised into the harness.
        """
        self.event_history.append(event)

        event_type = type(event)
        alive_callbacks = []
        for weak_callback in self._subscribers.get(event_type, []):
            callback = weak_callback()
            if callback is None:
                continue
            alive_callbacks.append(weak_callback)
            try:
                callback(event)
            except Exception as e:
                logger.error(f"error in subscriber {getattr(callback, '__name__', callback)} for {event.event_type}: {e}")
        # drop dead references
        if event_type in self._subscribers:
            self._subscribers[event_type] = alive_callbacks
