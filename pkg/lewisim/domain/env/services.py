from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from lewisim.core.errors import ArtifactError, ConfigurationError, ContractViolation
from lewisim.domain.env import rules as env_rules
from lewisim.domain.env.entities import DatasetSplit, Object, ObjectSpace, ObjectSpaceSpec


def build_object_space(spec: ObjectSpaceSpec) -> ObjectSpace:
	return ObjectSpace(spec)


def split_dataset(space: ObjectSpace, sizes: Tuple[int, int, int], seed: int) -> DatasetSplit:
	"""Draw disjoint train/val/test index sets uniformly without replacement."""
	n_train, n_val, n_test = (int(s) for s in sizes)
	if not env_rules.sizes_fit((n_train, n_val, n_test), space.size):
		raise ConfigurationError(
			f"split sizes {sizes} exceed the object space of {space.size}", field="split"
		)
	rng = np.random.default_rng(seed)
	total = n_train + n_val + n_test
	if total == space.size:
		drawn = rng.permutation(space.size)
	else:
		drawn = rng.choice(space.size, size=total, replace=False)
	drawn = drawn.astype(np.int64)
	return DatasetSplit(
		train=drawn[:n_train],
		val=drawn[n_train:n_train + n_val],
		test=drawn[n_train + n_val:],
		seed=int(seed),
		sizes=(n_train, n_val, n_test),
	)


def encode_objects(attrs: np.ndarray, spec: ObjectSpaceSpec) -> np.ndarray:
	"""(n, K) attribute matrix -> (n, sum cardinalities) concatenated one-hot rows."""
	attrs = np.asarray(attrs, dtype=np.int64)
	if attrs.ndim != 2 or attrs.shape[1] != spec.n_attributes:
		raise ContractViolation(f"expected (n, {spec.n_attributes}) attributes, got {attrs.shape}")
	out = np.zeros((attrs.shape[0], spec.input_dim))
	offset = 0
	for k, c in enumerate(spec.cardinalities):
		col = attrs[:, k]
		if np.any(col < 0) or np.any(col >= c):
			raise ContractViolation(f"attribute {k} outside [0, {c})")
		out[np.arange(attrs.shape[0]), offset + col] = 1.0
		offset += c
	return out


def encode_object(obj: Object, spec: ObjectSpaceSpec) -> np.ndarray:
	obj.validate(spec)
	return encode_objects(np.asarray([obj.attrs]), spec)[0]


def decode_one_hot(vectors: np.ndarray, spec: ObjectSpaceSpec) -> np.ndarray:
	"""Argmax per attribute block; inverse of encode_objects."""
	vectors = np.atleast_2d(np.asarray(vectors))
	if vectors.shape[1] != spec.input_dim:
		raise ContractViolation(f"expected width {spec.input_dim}, got {vectors.shape[1]}")
	cols: List[np.ndarray] = []
	offset = 0
	for c in spec.cardinalities:
		cols.append(np.argmax(vectors[:, offset:offset + c], axis=1))
		offset += c
	return np.stack(cols, axis=1).astype(np.int64)


def sample_batch(part: np.ndarray, batch_size: int, rng: np.random.Generator) -> np.ndarray:
	"""I.i.d. uniform draws with replacement from one split part (object indices)."""
	part = np.asarray(part, dtype=np.int64)
	if part.size == 0:
		raise ContractViolation("cannot sample from an empty split")
	if batch_size < 1:
		raise ContractViolation("batch size must be >= 1")
	return part[rng.integers(0, part.size, size=batch_size)]


@dataclass(frozen=True)
class ObjectSource:
	"""Where a batch of objects is drawn from: a split part or the whole space."""

	space: ObjectSpace
	indices: np.ndarray | None = None

	@classmethod
	def from_indices(cls, space: ObjectSpace, indices: np.ndarray) -> "ObjectSource":
		return cls(space=space, indices=np.asarray(indices, dtype=np.int64))

	@classmethod
	def full(cls, space: ObjectSpace) -> "ObjectSource":
		return cls(space=space, indices=None)

	@property
	def size(self) -> int:
		return self.space.size if self.indices is None else int(self.indices.size)

	def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
		"""n object indices, uniform with replacement."""
		if self.indices is None:
			if n < 1:
				raise ContractViolation("batch size must be >= 1")
			return rng.integers(0, self.space.size, size=n).astype(np.int64)
		return sample_batch(self.indices, n, rng)

	def attributes(self, indices: np.ndarray) -> np.ndarray:
		return self.space.decode(indices)

	def one_hot(self, indices: np.ndarray) -> np.ndarray:
		return encode_objects(self.space.decode(indices), self.space.spec)


_SECTIONS = ("train", "val", "test")


def dump_split(split: DatasetSplit) -> str:
	lines: List[str] = []
	for name in _SECTIONS:
		lines.append(f"#{name}")
		lines.extend(str(int(i)) for i in split.part(name))
	return "\n".join(lines) + "\n"


def load_split(text: str, seed: int = 0) -> DatasetSplit:
	parts: Dict[str, List[int]] = {}
	current = None
	for raw in text.splitlines():
		line = raw.strip()
		if not line:
			continue
		if line.startswith("#"):
			current = line[1:]
			if current not in _SECTIONS:
				raise ArtifactError(f"unknown split section {line!r}")
			parts[current] = []
			continue
		if current is None:
			raise ArtifactError("split file must start with a section header")
		try:
			parts[current].append(int(line))
		except ValueError as exc:
			raise ArtifactError(f"bad index line {line!r}") from exc
	missing = [s for s in _SECTIONS if s not in parts]
	if missing:
		raise ArtifactError(f"split file missing sections {missing}")
	arrays = {k: np.asarray(v, dtype=np.int64) for k, v in parts.items()}
	if not env_rules.pairwise_disjoint(*arrays.values()):
		raise ArtifactError("split sections overlap")
	return DatasetSplit(
		train=arrays["train"], val=arrays["val"], test=arrays["test"], seed=seed,
		sizes=(arrays["train"].size, arrays["val"].size, arrays["test"].size),
	)


def read_split_file(path: str | Path, seed: int = 0) -> DatasetSplit:
	try:
		return load_split(Path(path).read_text(encoding="utf-8"), seed=seed)
	except OSError as exc:
		raise ArtifactError(f"cannot read split file {path}: {exc}") from exc


def objects_from_indices(space: ObjectSpace, indices: Sequence[int]) -> List[Object]:
	return [space.object_at(int(i)) for i in indices]
