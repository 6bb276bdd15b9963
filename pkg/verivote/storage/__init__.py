"""
Artifact storage: backends, on-disk formats and the election workspace.
"""

from verivote.storage.base import (
    ArtifactCorruptError,
    ArtifactError,
    ArtifactHeaderError,
    ArtifactNotFoundError,
    ArtifactStore,
)
from verivote.storage.config import StorageSettings, storage_settings
from verivote.storage.factory import get_store

__all__ = [
    "ArtifactCorruptError",
    "ArtifactError",
    "ArtifactHeaderError",
    "ArtifactNotFoundError",
    "ArtifactStore",
    "StorageSettings",
    "get_store",
    "storage_settings",
]
