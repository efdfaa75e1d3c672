from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from lewisim.core.errors import ConfigurationError, ContractViolation

# indices are stored as int64; leave headroom for arithmetic on them
MAX_SPACE_SIZE = 2 ** 62


@dataclass(frozen=True)
class ObjectSpaceSpec:
	"""K attributes, attribute i taking cardinalities[i] values."""

	cardinalities: Tuple[int, ...]

	def __post_init__(self) -> None:
		cards = tuple(int(c) for c in self.cardinalities)
		object.__setattr__(self, "cardinalities", cards)
		if len(cards) < 1:
			raise ConfigurationError("at least one attribute is required", field="space.cardinalities")
		if any(c < 2 for c in cards):
			raise ConfigurationError("every attribute needs at least 2 values", field="space.cardinalities")

	@property
	def n_attributes(self) -> int:
		return len(self.cardinalities)

	@property
	def input_dim(self) -> int:
		return int(sum(self.cardinalities))


@dataclass(frozen=True)
class Object:
	attrs: Tuple[int, ...]

	def __post_init__(self) -> None:
		object.__setattr__(self, "attrs", tuple(int(a) for a in self.attrs))

	def validate(self, spec: ObjectSpaceSpec) -> None:
		if len(self.attrs) != spec.n_attributes:
			raise ContractViolation(f"object has {len(self.attrs)} attributes, spec has {spec.n_attributes}")
		for i, (a, c) in enumerate(zip(self.attrs, spec.cardinalities)):
			if not 0 <= a < c:
				raise ContractViolation(f"attribute {i} value {a} outside [0, {c})")


class ObjectSpace:
	"""Mixed-radix bijection between integer indices and objects.

	Attribute 0 is the most significant digit, so for cardinalities (3, 3)
	index 4 is the object (1, 1).
	"""

	def __init__(self, spec: ObjectSpaceSpec):
		size = 1
		for c in spec.cardinalities:
			size *= c
			if size > MAX_SPACE_SIZE:
				raise ConfigurationError(f"object space exceeds {MAX_SPACE_SIZE} objects", field="space.cardinalities")
		self.spec = spec
		self.size = size
		# place value of each attribute digit
		radix = np.ones(spec.n_attributes, dtype=np.int64)
		for i in range(spec.n_attributes - 2, -1, -1):
			radix[i] = radix[i + 1] * spec.cardinalities[i + 1]
		self._radix = radix
		self._cards = np.asarray(spec.cardinalities, dtype=np.int64)

	def __len__(self) -> int:
		return self.size

	def index_of(self, obj: Object) -> int:
		obj.validate(self.spec)
		return int(np.dot(np.asarray(obj.attrs, dtype=np.int64), self._radix))

	def object_at(self, index: int) -> Object:
		return Object(tuple(int(a) for a in self.decode(np.asarray([index]))[0]))

	def decode(self, indices: np.ndarray) -> np.ndarray:
		"""(n,) indices -> (n, K) attribute matrix."""
		indices = np.asarray(indices, dtype=np.int64)
		if indices.size and (indices.min() < 0 or indices.max() >= self.size):
			raise ContractViolation(f"object index outside [0, {self.size})")
		return (indices[:, None] // self._radix[None, :]) % self._cards[None, :]

	def encode(self, attrs: np.ndarray) -> np.ndarray:
		"""(n, K) attribute matrix -> (n,) indices."""
		attrs = np.asarray(attrs, dtype=np.int64)
		if attrs.ndim != 2 or attrs.shape[1] != self.spec.n_attributes:
			raise ContractViolation(f"expected (n, {self.spec.n_attributes}) attributes, got {attrs.shape}")
		if np.any(attrs < 0) or np.any(attrs >= self._cards[None, :]):
			raise ContractViolation("attribute value outside its cardinality")
		return attrs @ self._radix


@dataclass(frozen=True)
class DatasetSplit:
	train: np.ndarray
	val: np.ndarray
	test: np.ndarray
	seed: int = 0
	sizes: Tuple[int, int, int] = field(default=(0, 0, 0))

	def part(self, name: str) -> np.ndarray:
		if name not in ("train", "val", "test"):
			raise ContractViolation(f"unknown split part {name!r}")
		return getattr(self, name)
