from dataclasses import dataclass, field
from typing import Any, List, Optional

from lewisim.schemas.run_config import RunConfig

from .base import Command


@dataclass
class TrainRun(Command):
	"""Train one run of `config` into the directory `out`."""
	config: RunConfig
	out: str


@dataclass
class RunSweep(Command):
	config: RunConfig
	param: str
	values: List[Any]
	seeds: List[int]
	out: str
	workers: Optional[int] = None


@dataclass
class ProbeCheckpoint(Command):
	"""Fit probes against a checkpointed speaker and save the report under `out`."""
	config: RunConfig
	checkpoint: str
	seed: int
	out: Optional[str] = None


@dataclass
class RenderPlot(Command):
	csv: List[str] = field(default_factory=list)
	kind: str = "losses"
	out: str = "plot.svg"
