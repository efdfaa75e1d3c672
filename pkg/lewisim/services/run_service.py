"""
Run orchestration: writes the manifest and split file, drives a TrainingSession and
leaves the run directory either COMPLETED or FAILED.
"""
from __future__ import annotations

import json
import platform
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import metadata
from typing import Any, Dict, List, Optional

from lewisim.core.context import clear_run_context, set_run_context
from lewisim.core.errors import NumericFailure
from lewisim.core.logger import logger
from lewisim.core.rng import RngStreams
from lewisim.domain.agents.checkpoint import Checkpoint, dump_checkpoint
from lewisim.domain.env.services import dump_split, split_dataset
from lewisim.events.event_bus import event_bus
from lewisim.events.run_events import ProbeReportedEvent, RunCompletedEvent, RunFailedEvent, RunStartedEvent
from lewisim.schemas.artifacts import (
	CSV_COLUMNS,
	REGIME_COLUMNS,
	MetricsRow,
	ProbeReport,
	RegimeRow,
	RunManifest,
)
from lewisim.schemas.run_config import RunConfig
from lewisim.services.metrics_log import to_csv
from lewisim.services.storage import ArtifactStore
from lewisim.services.training.factory import object_space_of
from lewisim.services.training.regimes import RunResult, run_training

MANIFEST = "manifest.json"
METRICS = "metrics.csv"
REGIME = "regime.csv"
PROBES = "probe_reports.jsonl"
SPLITS = "splits.txt"
SUMMARY = "summary.json"
COMPLETED = "COMPLETED"
FAILED = "FAILED"
CHECKPOINTS = "checkpoints/"


def code_version() -> str:
	try:
		return metadata.version("lewisim")
	except metadata.PackageNotFoundError:
		return "0+unknown"


def design_decisions(config: RunConfig) -> Dict[str, Any]:
	"""Choices the run depends on that are not visible in the config itself."""
	return {
		"listener_reinit": "before every speaker update; inner batches resampled",
		"early_stopping": "validation loss on the val split, best weights restored",
		"entropy_bonus": f"{config.entropy_coef} x per-step entropy of the sampled trajectory",
		"weight_decay": "decoupled, scaled by lr",
		"dropout_site": "listener final LSTM state",
		"model_selection": "best validation per-attribute accuracy",
		"baseline": "minibatch mean reward",
		"test_probe_distribution": "full object space",
		"toposim_messages": "sampled",
		"input_distance": "hamming",
	}


def run_id_of(config: RunConfig) -> str:
	prefix = config.name or f"{config.game.kind}-{config.regime.kind}"
	return f"{prefix}-s{config.seed}-{config.config_hash()[:8]}"


class ArtifactRecorder:
	"""Recorder that mirrors every row into the run directory as soon as it arrives."""

	def __init__(self, store: ArtifactStore, run_id: str):
		self.store = store
		self.run_id = run_id
		self.metrics: List[MetricsRow] = []
		self.regime: List[RegimeRow] = []

	def record_metrics(self, row: MetricsRow) -> None:
		self.metrics.append(row)
		self.store.write_text(METRICS, to_csv((r.as_record() for r in self.metrics), CSV_COLUMNS))

	def record_regime(self, row: RegimeRow) -> None:
		self.regime.append(row)
		self.store.write_text(REGIME, to_csv((r.model_dump() for r in self.regime), REGIME_COLUMNS))

	def record_probe(self, report: ProbeReport) -> None:
		self.store.append_line(PROBES, report.model_dump_json())
		event_bus.publish_event(ProbeReportedEvent(self.run_id, report.update, report.info_test, report.adapt_test))

	def save_checkpoint(self, name: str, speaker, listener, meta: Dict[str, object]) -> None:
		data = dump_checkpoint(Checkpoint(speaker.state_dict(), listener.state_dict(), dict(meta)))
		self.store.write_bytes(f"{CHECKPOINTS}{name}.npz", data)


@dataclass
class RunOutcome:
	run_id: str
	location: str
	result: Optional[RunResult] = None
	error: Optional[BaseException] = None

	@property
	def ok(self) -> bool:
		return self.error is None


def summary_of(result: RunResult) -> Dict[str, Any]:
	return {
		"updates": result.updates,
		"acc_train": result.acc_train,
		"acc_test": result.acc_test,
		"best_val_accuracy": result.best_val_accuracy,
		"generalization": result.generalization,
		"toposim": None if result.toposim is None else result.toposim.to_dict(),
		"last_probe": None if result.last_probe is None else result.last_probe.model_dump(exclude={"curve_train", "curve_test"}),
		"listener_updates": result.state.listener_updates,
		"reinit_count": result.state.reinit_count,
	}


class RunService:
	def __init__(self, store: ArtifactStore):
		self.store = store

	def _clear_previous(self) -> None:
		# markers go first so an interrupted clear never looks completed
		for key in (COMPLETED, FAILED, MANIFEST, METRICS, REGIME, PROBES, SPLITS, SUMMARY):
			self.store.delete(key)
		for key in self.store.list(CHECKPOINTS):
			self.store.delete(key)

	def _start(self, config: RunConfig, run_id: str) -> None:
		self._clear_previous()
		manifest = RunManifest(
			run_id=run_id,
			config=config.model_dump(mode="json"),
			config_hash=config.config_hash(),
			seed=config.seed,
			code_version=code_version(),
			platform=platform.platform(),
			started_at=datetime.now(timezone.utc),
			design_decisions=design_decisions(config),
		)
		self.store.write_text(MANIFEST, manifest.model_dump_json(indent=2) + "\n")

	def train(self, config: RunConfig) -> RunOutcome:
		"""Run `config` to completion; failures are recorded, then re-raised."""
		run_id = run_id_of(config)
		location = self.store.location("")
		self._start(config, run_id)
		set_run_context(run_id=run_id, seed=config.seed)
		try:
			with logger.contextualize(run_id=run_id, seed=config.seed, regime=config.regime.kind):
				event_bus.publish_event(RunStartedEvent(run_id, config.seed, config.regime.kind, location))
				try:
					streams = RngStreams(config.seed)
					space = object_space_of(config)
					sizes = (config.split.train, config.split.val, config.split.test)
					split = split_dataset(space, sizes, streams.child_seed("env"))
					self.store.write_text(SPLITS, dump_split(split))
					result = run_training(config, ArtifactRecorder(self.store, run_id), streams, split)
				except Exception as exc:
					update = exc.update if isinstance(exc, NumericFailure) else None
					self.store.write_json(FAILED, {
						"run_id": run_id,
						"reason": str(exc),
						"error_type": type(exc).__name__,
						"update": update,
						"finished_at": datetime.now(timezone.utc).isoformat(),
					})
					event_bus.publish_event(RunFailedEvent(run_id, str(exc), type(exc).__name__, update))
					raise
				self.store.write_json(SUMMARY, summary_of(result))
				self.store.write_json(COMPLETED, {"run_id": run_id, "finished_at": datetime.now(timezone.utc).isoformat()})
				event_bus.publish_event(
					RunCompletedEvent(run_id, result.updates, result.acc_train, result.acc_test, result.generalization)
				)
		finally:
			clear_run_context()
		return RunOutcome(run_id=run_id, location=location, result=result)

	def status(self) -> str:
		if self.store.exists(COMPLETED):
			return "completed"
		if self.store.exists(FAILED):
			return "failed"
		return "incomplete"

	def failure(self) -> Optional[Dict[str, Any]]:
		return json.loads(self.store.read_text(FAILED)) if self.store.exists(FAILED) else None
