"""
Artifact store on the local filesystem, rooted at the election's output
directory.
"""

import logging
import os
from pathlib import Path
from typing import List, Union

from verivote.storage.base import ArtifactError, ArtifactNotFoundError, ArtifactStore, normalize_key

logger = logging.getLogger(__name__)


class LocalArtifactStore(ArtifactStore):
    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    def _path(self, key: str) -> Path:
        return self.root / normalize_key(key)

    def write_bytes(self, key: str, data: bytes) -> str:
        path = self._path(key)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            # atomic replace
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_bytes(data)
            os.replace(tmp, path)
        except OSError as e:
            raise ArtifactError(f"Failed to write {key}: {e}", key=key) from e
        logger.debug(f"Wrote {len(data)} bytes to {path}")
        return str(path)

    def read_bytes(self, key: str) -> bytes:
        path = self._path(key)
        try:
            return path.read_bytes()
        except FileNotFoundError as e:
            raise ArtifactNotFoundError(f"artifact not found: {path}", key=key) from e
        except OSError as e:
            raise ArtifactError(f"Failed to read {key}: {e}", key=key) from e

    def exists(self, key: str) -> bool:
        return self._path(key).is_file()

    def delete(self, key: str) -> bool:
        path = self._path(key)
        if not path.is_file():
            return False
        path.unlink()
        return True

    def list_keys(self, prefix: str = "") -> List[str]:
        if not self.root.is_dir():
            return []
        keys = (p.relative_to(self.root).as_posix() for p in self.root.rglob("*") if p.is_file())
        return sorted(k for k in keys if k.startswith(prefix) and not k.endswith(".tmp"))
