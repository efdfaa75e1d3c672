from __future__ import annotations

from typing import Optional


class LewisimError(Exception):
	"""Base class for every error raised on purpose by lewisim."""


class ContractViolation(LewisimError, ValueError):
	"""A caller broke an operation's pre-condition (shapes, ranges, indices)."""


class ConfigurationError(LewisimError, ValueError):
	"""Invalid run or process configuration.

	`field` carries the dotted path of the offending configuration entry when known.
	"""

	def __init__(self, message: str, field: Optional[str] = None):
		super().__init__(message if field is None else f"{field}: {message}")
		self.field = field


class NumericFailure(LewisimError, ArithmeticError):
	"""A NaN or infinity appeared where only finite values are allowed."""

	def __init__(self, message: str, node_id: Optional[int] = None, update: Optional[int] = None):
		super().__init__(message)
		self.node_id = node_id
		self.update = update

	def at_update(self, update: int) -> "NumericFailure":
		self.update = update
		return self

	def __str__(self) -> str:
		parts = [super().__str__()]
		if self.node_id is not None:
			parts.append(f"node={self.node_id}")
		if self.update is not None:
			parts.append(f"update={self.update}")
		return " ".join(parts)


class UndefinedCorrelation(LewisimError):
	"""Rank correlation requested on a sequence with zero variance."""


class ArtifactError(LewisimError):
	"""An artifact (checkpoint, CSV, game file, split file) is missing or malformed."""
