"""
Local file system artifact store.
"""

import os
import tempfile
from pathlib import Path
from typing import List

from lewisim.core.config import settings
from lewisim.core.errors import ArtifactError
from lewisim.core.logger import logger
from .base import ArtifactStore


class LocalArtifactStore(ArtifactStore):
	"""Artifacts under one root directory, written via temp file + os.replace."""

	def __init__(self, root: str = None):
		"""
		Initialize local storage.

		Args:
			root: Directory holding the artifacts (defaults to the configured output root)
		"""
		self.root = Path(root or settings.output_root)
		self.root.mkdir(parents=True, exist_ok=True)

	def _path(self, key: str) -> Path:
		path = (self.root / key).resolve()
		if self.root.resolve() not in path.parents and path != self.root.resolve():
			raise ArtifactError(f"artifact key escapes the store root: {key}")
		return path

	def write_bytes(self, key: str, data: bytes) -> str:
		path = self._path(key)
		try:
			path.parent.mkdir(parents=True, exist_ok=True)
			fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
			try:
				with os.fdopen(fd, "wb") as f:
					f.write(data)
				os.replace(tmp, path)
			except BaseException:
				if os.path.exists(tmp):
					os.unlink(tmp)
				raise
		except PermissionError as e:
			raise ArtifactError(f"Permission denied writing to {path}") from e
		except OSError as e:
			raise ArtifactError(f"File system error writing {path}: {e}") from e
		return str(path)

	def read_bytes(self, key: str) -> bytes:
		path = self._path(key)
		try:
			return path.read_bytes()
		except FileNotFoundError as e:
			raise ArtifactError(f"artifact not found: {path}") from e
		except OSError as e:
			raise ArtifactError(f"cannot read {path}: {e}") from e

	def exists(self, key: str) -> bool:
		return self._path(key).is_file()

	def delete(self, key: str) -> None:
		path = self._path(key)
		try:
			path.unlink()
		except FileNotFoundError:
			logger.debug(f"Nothing to delete at {path}")

	def list(self, prefix: str = "") -> List[str]:
		base = self._path(prefix) if prefix else self.root
		if base.is_file():
			return [prefix]
		if not base.exists():
			return []
		return sorted(p.relative_to(self.root).as_posix() for p in base.rglob("*") if p.is_file() and not p.name.startswith("."))

	def location(self, key: str) -> str:
		return str(self._path(key))

	def child(self, key: str) -> "LocalArtifactStore":
		"""Store rooted at a sub-directory (one run inside a sweep)."""
		return LocalArtifactStore(str(self._path(key)))
