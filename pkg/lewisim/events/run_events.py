from dataclasses import dataclass
from typing import Optional


@dataclass
class RunStartedEvent:
	run_id: str
	seed: int
	regime: str
	location: str


@dataclass
class RunCompletedEvent:
	run_id: str
	updates: int
	acc_train: float
	acc_test: float
	generalization: Optional[float]


@dataclass
class RunFailedEvent:
	run_id: str
	reason: str
	error_type: str
	update: Optional[int]


@dataclass
class ProbeReportedEvent:
	run_id: str
	update: Optional[int]
	info_test: float
	adapt_test: float


@dataclass
class SweepCellFinishedEvent:
	param: str
	value: str
	seed: int
	status: str
