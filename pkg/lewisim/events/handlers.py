from typing import Dict

from lewisim.core.logger import logger
from lewisim.events.event_bus import event_bus
from lewisim.events.run_events import (
	ProbeReportedEvent,
	RunCompletedEvent,
	RunFailedEvent,
	RunStartedEvent,
	SweepCellFinishedEvent,
)


def handle_run_started(payload: Dict) -> None:
	logger.info(f"run {payload['run_id']} started ({payload['regime']}, seed {payload['seed']}) -> {payload['location']}")


def handle_run_completed(payload: Dict) -> None:
	logger.info(
		f"run {payload['run_id']} completed after {payload['updates']} updates: "
		f"acc train/test {payload['acc_train']:.4f}/{payload['acc_test']:.4f}"
	)


def handle_run_failed(payload: Dict) -> None:
	logger.error(f"run {payload['run_id']} failed at update {payload['update']}: {payload['error_type']}: {payload['reason']}")


def handle_probe_reported(payload: Dict) -> None:
	logger.debug(f"probe for {payload['run_id']} @{payload['update']}: adapt_test {payload['adapt_test']:.4f}")


def handle_sweep_cell_finished(payload: Dict) -> None:
	logger.info(f"sweep cell {payload['param']}={payload['value']} seed {payload['seed']}: {payload['status']}")


_registered = False


def register_event_handlers() -> None:
	global _registered
	if _registered:
		return
	event_bus.subscribe_event(RunStartedEvent, handle_run_started)
	event_bus.subscribe_event(RunCompletedEvent, handle_run_completed)
	event_bus.subscribe_event(RunFailedEvent, handle_run_failed)
	event_bus.subscribe_event(ProbeReportedEvent, handle_probe_reported)
	event_bus.subscribe_event(SweepCellFinishedEvent, handle_sweep_cell_finished)
	_registered = True
