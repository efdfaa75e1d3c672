# Sweep cell worker: runs one (value, seed) cell inside a worker process
from __future__ import annotations

from typing import Any, Dict

from lewisim.core.logger import logger
from lewisim.events.handlers import register_event_handlers
from lewisim.schemas.artifacts import SweepSummaryRow
from lewisim.schemas.run_config import parse_run_config, set_by_path
from lewisim.services.run_service import RunService
from lewisim.services.storage import get_artifact_store


def cell_key(param: str, value: Any, seed: int) -> str:
	return f"{param}={str(value).replace('/', '_')}/seed={seed}"


def run_sweep_cell(payload: Dict[str, Any]) -> Dict[str, Any]:
	"""Run one cell and return its summary row as a plain dict; never raises."""
	register_event_handlers()
	param, value, seed = payload["param"], payload["value"], int(payload["seed"])
	key = cell_key(param, value, seed)
	row = SweepSummaryRow(param=param, value=value, seed=seed, status="failed")
	try:
		store = get_artifact_store(payload["root"]).child(key)
		row.run_dir = store.location("")
		data = set_by_path(payload["config"], param, value)
		data["seed"] = seed
		outcome = RunService(store).train(parse_run_config(data))
		result = outcome.result
		row.status = "completed"
		row.generalization = result.generalization
		row.toposim = None if result.toposim is None or result.toposim.undefined else result.toposim.mean
		row.adapt_test = None if result.last_probe is None else result.last_probe.adapt_test
		row.acc_train, row.acc_test = result.acc_train, result.acc_test
	except Exception as exc:
		logger.error(f"sweep cell {key} failed: {type(exc).__name__}: {exc}")
		row.error = f"{type(exc).__name__}: {exc}"
	return row.model_dump(mode="json")
