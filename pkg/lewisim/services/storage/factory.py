"""
Artifact store factory.
"""

from lewisim.core.config import settings
from lewisim.core.errors import ConfigurationError
from .base import ArtifactStore
from .local_storage import LocalArtifactStore


def get_artifact_store(root: str = None) -> ArtifactStore:
	"""Return the configured artifact store rooted at `root` (or the output root)."""
	backend = settings.storage_backend.lower()
	if backend == "local":
		return LocalArtifactStore(root)
	raise ConfigurationError(f"unsupported storage backend {backend!r}", field="LEWISIM_STORAGE_BACKEND")
