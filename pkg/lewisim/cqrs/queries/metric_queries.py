from dataclasses import dataclass
from lewisim.schemas.run_config import RunConfig

from .base import Query


@dataclass
class TopoSimOfCheckpoint(Query):
	config: RunConfig
	checkpoint: str
	seed: int


@dataclass
class RunStatus(Query):
	run_dir: str
