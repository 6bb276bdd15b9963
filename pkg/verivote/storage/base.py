"""
Abstract base class for artifact stores.

Election artifacts (boards, tokens, ledgers, reports) are addressed by a
relative key such as ``boards/bb3.txt``; a store maps keys to bytes.
"""

from abc import ABC, abstractmethod
from typing import List, Optional

from verivote.errors import VerivoteError


class ArtifactStore(ABC):
    """Abstract base class for artifact storage backends."""

    @abstractmethod
    def write_bytes(self, key: str, data: bytes) -> str:
        """
        Store an artifact, replacing any previous content.

        Args:
            key: Relative artifact key
            data: Artifact content

        Returns:
            Location of the stored artifact

        Raises:
            ArtifactError: If the key is invalid or the write fails
        """
        pass

    @abstractmethod
    def read_bytes(self, key: str) -> bytes:
        """
        Read an artifact.

        Raises:
            ArtifactNotFoundError: If no artifact is stored under key
        """
        pass

    @abstractmethod
    def exists(self, key: str) -> bool:
        pass

    @abstractmethod
    def delete(self, key: str) -> bool:
        """
        Delete an artifact.

        Returns:
            True if deleted, False if it did not exist
        """
        pass

    @abstractmethod
    def list_keys(self, prefix: str = "") -> List[str]:
        """Sorted keys starting with prefix"""
        pass

    def write_text(self, key: str, text: str) -> str:
        return self.write_bytes(key, text.encode("utf-8"))

    def read_text(self, key: str) -> str:
        try:
            return self.read_bytes(key).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ArtifactCorruptError(f"{key} is not valid UTF-8", key=key) from exc


def normalize_key(key: str) -> str:
    """
    Raises:
        ArtifactError: If the key is empty, absolute or leaves the store
    """
    parts = [p for p in key.replace("\\", "/").split("/") if p not in ("", ".")]
    if not parts or key.startswith("/") or ".." in parts:
        raise ArtifactError(f"invalid artifact key: {key!r}", key=key)
    return "/".join(parts)


class ArtifactError(VerivoteError):
    """Base exception for artifact storage and format errors"""

    def __init__(self, message: str, key: Optional[str] = None, stage: Optional[str] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.key = key
        self.stage = stage


class ArtifactNotFoundError(ArtifactError):
    """Raised when a stage input is missing"""
    pass


class ArtifactHeaderError(ArtifactError):
    """Raised when an artifact was written for different parameters"""
    pass


class ArtifactCorruptError(ArtifactError):
    """Raised when an artifact's body does not match its hash or does not parse"""
    pass
