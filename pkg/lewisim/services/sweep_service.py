"""
Parameter sweeps: the cartesian product of values x seeds, one run per cell, cells
executed in worker processes and merged into one summary CSV by the parent.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

from lewisim.core.config import settings
from lewisim.core.errors import ConfigurationError
from lewisim.core.logger import logger
from lewisim.events.event_bus import event_bus
from lewisim.events.run_events import SweepCellFinishedEvent
from lewisim.schemas.artifacts import SUMMARY_COLUMNS, SweepSummaryRow
from lewisim.schemas.run_config import RunConfig, parse_run_config, set_by_path
from lewisim.services.metrics_log import to_csv
from lewisim.services.storage import ArtifactStore
from lewisim.workers.sweep_worker import run_sweep_cell

SWEEP_SUMMARY = "summary.csv"


def parse_values(text: str) -> List[Any]:
	"""Comma separated values; each is read as JSON when possible, else kept as a string."""
	values: List[Any] = []
	for raw in text.split(","):
		raw = raw.strip()
		if not raw:
			continue
		try:
			values.append(json.loads(raw))
		except json.JSONDecodeError:
			values.append(raw)
	return values


def parse_seeds(text: str) -> List[int]:
	try:
		return [int(s) for s in text.split(",") if s.strip()]
	except ValueError as exc:
		raise ConfigurationError(f"seeds must be integers: {exc}", field="seeds") from exc


def worker_count(requested: Optional[int] = None) -> int:
	n = requested if requested is not None else settings.sweep_workers
	return n if n and n > 0 else (os.cpu_count() or 1)


class SweepService:
	def __init__(self, store: ArtifactStore):
		self.store = store

	def plan(self, config: RunConfig, param: str, values: Sequence[Any], seeds: Sequence[int]) -> List[Dict[str, Any]]:
		if not values:
			raise ConfigurationError("the value list is empty", field="values")
		if not seeds:
			raise ConfigurationError("the seed list is empty", field="seeds")
		data = config.model_dump(mode="json")
		# path must exist in the resolved config; also validates the first cell early
		parse_run_config(set_by_path(data, param, values[0]))
		root = self.store.location("")
		return [
			{"config": data, "param": param, "value": value, "seed": int(seed), "root": root}
			for value in values
			for seed in seeds
		]

	def run(
		self,
		config: RunConfig,
		param: str,
		values: Sequence[Any],
		seeds: Sequence[int],
		workers: Optional[int] = None,
	) -> List[SweepSummaryRow]:
		cells = self.plan(config, param, values, seeds)
		n_workers = min(worker_count(workers), len(cells))
		logger.info(f"sweep over {param}: {len(values)} values x {len(seeds)} seeds on {n_workers} workers")
		if n_workers == 1:
			raw = [run_sweep_cell(cell) for cell in cells]
		else:
			with ProcessPoolExecutor(max_workers=n_workers) as pool:
				raw = list(pool.map(run_sweep_cell, cells))
		rows = [SweepSummaryRow.model_validate(r) for r in raw]
		for row in rows:
			event_bus.publish_event(SweepCellFinishedEvent(row.param, str(row.value), row.seed, row.status))
		self.store.write_text(SWEEP_SUMMARY, to_csv((r.model_dump() for r in rows), SUMMARY_COLUMNS))
		return rows
