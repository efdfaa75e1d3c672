from __future__ import annotations

from pathlib import Path
from typing import Optional, Tuple

from lewisim.core.errors import ArtifactError, ContractViolation
from lewisim.core.rng import RngStreams
from lewisim.domain.agents.checkpoint import Checkpoint, load_checkpoint
from lewisim.domain.env.entities import DatasetSplit
from lewisim.domain.env.services import read_split_file, split_dataset
from lewisim.schemas.run_config import RunConfig
from lewisim.services.training.factory import architecture_of, build_listener, build_speaker, object_space_of


def read_checkpoint(path: str | Path) -> Checkpoint:
	try:
		data = Path(path).read_bytes()
	except OSError as exc:
		raise ArtifactError(f"cannot read checkpoint {path}: {exc}") from exc
	return load_checkpoint(data)


def restore_agents(config: RunConfig, checkpoint: Checkpoint) -> Tuple[object, object]:
	"""Speaker and listener of `config`'s architecture holding the checkpointed weights."""
	expected = architecture_of(config)
	for key, value in expected.items():
		if key in checkpoint.meta and checkpoint.meta[key] != value:
			raise ArtifactError(f"checkpoint {key}={checkpoint.meta[key]!r} does not match the config ({value!r})")
	streams = RngStreams(config.seed)
	speaker = build_speaker(config, streams.generator("speaker_init"))
	listener = build_listener(config, streams.generator("listener_init", 0))
	try:
		speaker.load_state_dict(checkpoint.speaker)
		listener.load_state_dict(checkpoint.listener)
	except ContractViolation as exc:
		raise ArtifactError(f"checkpoint does not fit the configured agents: {exc}") from exc
	return speaker.eval(), listener.eval()


def split_for_checkpoint(config: RunConfig, checkpoint_path: str | Path) -> DatasetSplit:
	"""The split saved next to the run, or the one the config's seed would draw."""
	run_dir = Path(checkpoint_path).resolve().parent
	for candidate in (run_dir / "splits.txt", run_dir.parent / "splits.txt"):
		if candidate.is_file():
			return read_split_file(candidate, seed=config.seed)
	space = object_space_of(config)
	sizes = (config.split.train, config.split.val, config.split.test)
	return split_dataset(space, sizes, RngStreams(config.seed).child_seed("env"))


def load_for_evaluation(config: RunConfig, checkpoint_path: str | Path) -> Tuple[object, object, Optional[DatasetSplit]]:
	checkpoint = read_checkpoint(checkpoint_path)
	speaker, listener = restore_agents(config, checkpoint)
	return speaker, listener, split_for_checkpoint(config, checkpoint_path)
