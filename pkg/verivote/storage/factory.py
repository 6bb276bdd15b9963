"""
Artifact store factory.
"""

import logging
from pathlib import Path
from typing import Optional, Union

from verivote.storage.base import ArtifactError, ArtifactStore
from verivote.storage.config import storage_settings
from verivote.storage.local_backend import LocalArtifactStore
from verivote.storage.memory_backend import MemoryArtifactStore

logger = logging.getLogger(__name__)


def get_store(storage_type: Optional[str] = None, root: Optional[Union[str, Path]] = None) -> ArtifactStore:
    """
    Return the artifact store selected by argument or configuration.

    Args:
        storage_type: 'local' or 'memory'. If None, read from StorageSettings
        root: Root directory of a local store. If None, read from StorageSettings

    Raises:
        ArtifactError: If the storage type is unknown
    """
    storage_type = (storage_type or storage_settings.storage_type).lower()
    logger.info(f"Initializing artifact store: {storage_type}")

    if storage_type == "local":
        return LocalArtifactStore(root if root is not None else storage_settings.storage_root)
    if storage_type == "memory":
        return MemoryArtifactStore()
    raise ArtifactError(f"Unknown storage type: {storage_type}. Supported: local, memory",
                        field="storage_type", value=storage_type)
