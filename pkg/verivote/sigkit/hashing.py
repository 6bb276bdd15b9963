"""
Record hash H(rid, v) and the XOR aggregate of record hashes.
"""

import hashlib
from dataclasses import dataclass
from typing import Iterable, Optional

from verivote.constants import RECORD_HASH_SIZE, RECORD_RID_WIDTH, RECORD_VOTE_WIDTH
from verivote.groups import Scalar
from verivote.sigkit.base import SignatureError


@dataclass(frozen=True)
class RecordHash:
    digest: bytes

    def __post_init__(self):
        if len(self.digest) != RECORD_HASH_SIZE:
            raise SignatureError(f"record hash must be {RECORD_HASH_SIZE} bytes", value=len(self.digest))

    @classmethod
    def zero(cls) -> "RecordHash":
        return cls(bytes(RECORD_HASH_SIZE))

    def __xor__(self, other: "RecordHash") -> "RecordHash":
        return RecordHash(bytes(a ^ b for a, b in zip(self.digest, other.digest)))

    def hex(self) -> str:
        return self.digest.hex()

    def to_bytes(self) -> bytes:
        return self.digest


def canonical_record(rid: Scalar, v: int) -> bytes:
    return rid.value.to_bytes(RECORD_RID_WIDTH, "big") + v.to_bytes(RECORD_VOTE_WIDTH, "big")


def record_hash(rid: Scalar, v: int, m: Optional[int] = None) -> RecordHash:
    """
    SHA-256 over 32-byte big-endian rid || 4-byte big-endian v.

    Raises:
        SignatureError: If v is negative, at least m, or too wide for the encoding
    """
    upper = m if m is not None else 1 << (8 * RECORD_VOTE_WIDTH)
    if not 0 <= v < upper:
        raise SignatureError(f"vote {v} out of range [0, {upper})", field="v", value=v)
    return RecordHash(hashlib.sha256(canonical_record(rid, v)).digest())


def xor_fold(digests: Iterable[RecordHash]) -> RecordHash:
    acc = bytearray(RECORD_HASH_SIZE)
    for d in digests:
        for i, byte in enumerate(d.digest):
            acc[i] ^= byte
    return RecordHash(bytes(acc))
