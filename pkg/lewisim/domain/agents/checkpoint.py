"""
Checkpoint codec: one numpy .npz archive per snapshot.

Keys are `speaker/<param>` and `listener/<param>` for the parameter tensors, plus
`__meta__`, a 0-d unicode array holding a JSON document with the format version,
the run config hash, architecture dimensions, layer-norm flags and game kind.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from lewisim.core.errors import ArtifactError

CHECKPOINT_FORMAT = 1
_META_KEY = "__meta__"


@dataclass
class Checkpoint:
	speaker: Dict[str, np.ndarray]
	listener: Dict[str, np.ndarray]
	meta: Dict[str, Any] = field(default_factory=dict)


def dump_checkpoint(checkpoint: Checkpoint) -> bytes:
	arrays: Dict[str, np.ndarray] = {}
	for prefix, state in (("speaker", checkpoint.speaker), ("listener", checkpoint.listener)):
		for name, value in state.items():
			arrays[f"{prefix}/{name}"] = np.asarray(value, dtype=np.float64)
	meta = dict(checkpoint.meta)
	meta["format"] = CHECKPOINT_FORMAT
	arrays[_META_KEY] = np.array(json.dumps(meta, sort_keys=True))
	buf = io.BytesIO()
	np.savez(buf, **arrays)
	return buf.getvalue()


def load_checkpoint(data: bytes) -> Checkpoint:
	try:
		with np.load(io.BytesIO(data), allow_pickle=False) as archive:
			arrays = {k: archive[k] for k in archive.files}
	except Exception as exc:  # zipfile / format errors surface as many types
		raise ArtifactError(f"unreadable checkpoint: {exc}") from exc
	if _META_KEY not in arrays:
		raise ArtifactError("checkpoint has no metadata")
	try:
		meta = json.loads(str(arrays.pop(_META_KEY)))
	except json.JSONDecodeError as exc:
		raise ArtifactError(f"checkpoint metadata is not JSON: {exc}") from exc
	if meta.get("format") != CHECKPOINT_FORMAT:
		raise ArtifactError(f"unsupported checkpoint format {meta.get('format')!r}")
	speaker: Dict[str, np.ndarray] = {}
	listener: Dict[str, np.ndarray] = {}
	for key, value in arrays.items():
		prefix, _, name = key.partition("/")
		if prefix == "speaker":
			speaker[name] = value
		elif prefix == "listener":
			listener[name] = value
		else:
			raise ArtifactError(f"unexpected checkpoint entry {key!r}")
	return Checkpoint(speaker=speaker, listener=listener, meta=meta)
