"""
In-process bus for run lifecycle events.

Run and sweep services publish dataclass events (see `run_events`); handlers get a
plain dict copy of the event fields. A handler that raises is logged and skipped,
the remaining handlers still run and the run itself is never interrupted.
"""
from __future__ import annotations

import dataclasses
from typing import Any, Callable, Dict, List, Type

from lewisim.core.logger import logger

RunEventHandler = Callable[[Dict[str, Any]], None]


def event_payload(event: Any) -> Dict[str, Any]:
	if dataclasses.is_dataclass(event) and not isinstance(event, type):
		return dataclasses.asdict(event)
	return dict(vars(event))


class EventBus:
	def __init__(self):
		self._subscribers: Dict[str, List[RunEventHandler]] = {}

	def subscribe(self, kind: str, handler: RunEventHandler) -> None:
		self._subscribers.setdefault(kind, []).append(handler)

	def subscribe_event(self, event_type: Type[Any], handler: RunEventHandler) -> None:
		self.subscribe(event_type.__name__, handler)

	def handlers_for(self, kind: str) -> List[RunEventHandler]:
		return list(self._subscribers.get(kind, []))

	def publish(self, kind: str, payload: Dict[str, Any]) -> int:
		"""Deliver `payload` to every handler of `kind`; returns how many handlers failed."""
		failed = 0
		for handler in self.handlers_for(kind):
			try:
				handler(dict(payload))
			except Exception as exc:
				failed += 1
				logger.bind(event=kind, run_id=payload.get("run_id")).warning(
					f"run event handler {getattr(handler, '__name__', handler)!r} failed: {exc}"
				)
		return failed

	def publish_event(self, event: Any) -> int:
		return self.publish(type(event).__name__, event_payload(event))


event_bus = EventBus()
