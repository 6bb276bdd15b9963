"""
In-memory artifact store for tests and single-process simulations.
"""

import threading
from typing import Dict, List

from verivote.storage.base import ArtifactNotFoundError, ArtifactStore, normalize_key


class MemoryArtifactStore(ArtifactStore):
    def __init__(self):
        self._objects: Dict[str, bytes] = {}
        self._lock = threading.Lock()

    def write_bytes(self, key: str, data: bytes) -> str:
        key = normalize_key(key)
        with self._lock:
            self._objects[key] = bytes(data)
        return f"memory://{key}"

    def read_bytes(self, key: str) -> bytes:
        key = normalize_key(key)
        with self._lock:
            if key not in self._objects:
                raise ArtifactNotFoundError(f"artifact not found: {key}", key=key)
            return self._objects[key]

    def exists(self, key: str) -> bool:
        with self._lock:
            return normalize_key(key) in self._objects

    def delete(self, key: str) -> bool:
        with self._lock:
            return self._objects.pop(normalize_key(key), None) is not None

    def list_keys(self, prefix: str = "") -> List[str]:
        with self._lock:
            return sorted(k for k in self._objects if k.startswith(prefix))
