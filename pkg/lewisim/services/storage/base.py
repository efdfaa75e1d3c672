"""
Abstract base class for run artifact storage.
"""

import json
from abc import ABC, abstractmethod
from typing import Any, List


class ArtifactStore(ABC):
	"""Key/value store for run artifacts; keys are relative POSIX paths like "checkpoints/final.npz"."""

	@abstractmethod
	def write_bytes(self, key: str, data: bytes) -> str:
		"""
		Write bytes under `key`, replacing any previous value atomically.

		Returns:
			Location of the stored artifact
		"""
		pass

	@abstractmethod
	def read_bytes(self, key: str) -> bytes:
		"""
		Read the artifact stored under `key`.

		Raises:
			ArtifactError if the artifact is missing or unreadable
		"""
		pass

	@abstractmethod
	def exists(self, key: str) -> bool:
		pass

	@abstractmethod
	def delete(self, key: str) -> None:
		pass

	@abstractmethod
	def list(self, prefix: str = "") -> List[str]:
		"""Keys under `prefix`, sorted."""
		pass

	@abstractmethod
	def location(self, key: str) -> str:
		pass

	def write_text(self, key: str, text: str) -> str:
		return self.write_bytes(key, text.encode("utf-8"))

	def read_text(self, key: str) -> str:
		return self.read_bytes(key).decode("utf-8")

	def write_json(self, key: str, payload: Any) -> str:
		return self.write_text(key, json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")

	def read_json(self, key: str) -> Any:
		return json.loads(self.read_text(key))

	def append_line(self, key: str, line: str) -> str:
		"""Append one line; implemented as read-modify-replace so the file is never half written."""
		current = self.read_text(key) if self.exists(key) else ""
		return self.write_text(key, current + line.rstrip("\n") + "\n")
