from .base import ArtifactStore
from .local_storage import LocalArtifactStore
from .factory import get_artifact_store

__all__ = ["ArtifactStore", "LocalArtifactStore", "get_artifact_store"]
