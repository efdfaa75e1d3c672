from __future__ import annotations

from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

# fixed metric log layout
CSV_COLUMNS: Tuple[str, ...] = (
	"update",
	"split_loss_train",
	"split_loss_test",
	"acc_train",
	"acc_test",
	"info_train",
	"info_test",
	"adapt_train",
	"adapt_test",
	"speaker_entropy",
	"toposim",
)

REGIME_COLUMNS: Tuple[str, ...] = (
	"update",
	"listener_updates",
	"reinit_count",
	"inner_updates",
	"best_val_loss",
	"exact_acc_train",
	"exact_acc_test",
	"acc_val",
)

SUMMARY_COLUMNS: Tuple[str, ...] = (
	"param",
	"value",
	"seed",
	"status",
	"generalization",
	"toposim",
	"adapt_test",
	"acc_train",
	"acc_test",
	"run_dir",
	"error",
)


class MetricsRow(BaseModel):
	model_config = ConfigDict(extra="forbid")

	update: int
	split_loss_train: Optional[float] = None
	split_loss_test: Optional[float] = None
	acc_train: Optional[float] = None
	acc_test: Optional[float] = None
	info_train: Optional[float] = None
	info_test: Optional[float] = None
	adapt_train: Optional[float] = None
	adapt_test: Optional[float] = None
	speaker_entropy: Optional[float] = None
	toposim: Optional[float] = None

	def as_record(self) -> Dict[str, Any]:
		data = self.model_dump()
		return {c: data[c] for c in CSV_COLUMNS}


class RegimeRow(BaseModel):
	model_config = ConfigDict(extra="forbid")

	update: int
	listener_updates: int
	reinit_count: int
	inner_updates: Optional[int] = None
	best_val_loss: Optional[float] = None
	exact_acc_train: Optional[float] = None
	exact_acc_test: Optional[float] = None
	acc_val: Optional[float] = None


class ProbeReport(BaseModel):
	"""Probe-listener estimates in nats; adapt_* = total_* - info_* on the same samples."""

	update: Optional[int] = None
	info_train: float
	adapt_train: float
	total_train: float
	info_test: float
	adapt_test: float
	total_test: float
	n_samples: int
	probe_updates_train: int
	probe_updates_test: int
	stop_reason_train: str
	stop_reason_test: str
	curve_train: List[Tuple[int, float]] = Field(default_factory=list)
	curve_test: List[Tuple[int, float]] = Field(default_factory=list)


class RunManifest(BaseModel):
	run_id: str
	config: Dict[str, Any]
	config_hash: str
	seed: int
	code_version: str
	platform: str
	started_at: datetime
	design_decisions: Dict[str, Any]


class SweepSummaryRow(BaseModel):
	param: str
	value: Any
	seed: int
	status: str
	generalization: Optional[float] = None
	toposim: Optional[float] = None
	adapt_test: Optional[float] = None
	acc_train: Optional[float] = None
	acc_test: Optional[float] = None
	run_dir: Optional[str] = None
	error: Optional[str] = None
