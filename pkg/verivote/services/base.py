"""
Errors, public descriptors and signed-message encodings shared by the
protocol parties.
"""

from dataclasses import dataclass
from typing import Tuple

from verivote.constants import DST_BOOTH_COUNT, DST_BOOTH_HASH, DST_RECEIPT, DST_RECORD
from verivote.errors import VerivoteError
from verivote.groups import GroupElement
from verivote.sigkit.hashing import RecordHash
from verivote.utils.encoding import int_to_bytes, pack_fields, small_int

# w = u + v is kept unreduced and can exceed q
_W_WIDTH = 64


class ProtocolError(VerivoteError):
    """Base exception for protocol state violations"""
    pass


class TokenNotFreshError(ProtocolError):
    """Raised when a chit was already used, audited, or its nonce spent"""
    pass


class TokenDestroyedError(ProtocolError):
    """Raised when the secrets part of a token is read after scanning"""
    pass


class PhaseOrderError(ProtocolError):
    """Raised when a voting session step is driven out of order"""
    pass


class TokenRejectedError(ProtocolError):
    """Raised when a token fails the EVM's signature or commitment checks"""
    pass


class AcknowledgmentDeclinedError(ProtocolError):
    """Raised when the voter refuses the w' check and the session aborts"""
    pass


class UnknownRecordError(ProtocolError):
    """Raised when an acknowledgment or request names no stored record"""
    pass


@dataclass(frozen=True)
class PollingOfficerPublic:
    """A polling officer's public key g^x_k and pre-issued nonce commitments R_j"""
    booth: int
    key: GroupElement
    nonce_commitments: Tuple[GroupElement, ...]

    def nonce_commitment(self, index: int) -> GroupElement:
        try:
            return self.nonce_commitments[index]
        except IndexError:
            raise ProtocolError(f"booth {self.booth} has no nonce {index}", field="nonce_index",
                                value=index) from None


def booth_name(booth: int) -> str:
    return f"booth-{booth:03d}"


def receipt_payload(c_rid_bytes: bytes, c_v_bytes: bytes, w: int, w_prime: int) -> bytes:
    """Bytes the EVM ring-signs on a voter receipt"""
    return pack_fields(DST_RECEIPT, c_rid_bytes, c_v_bytes, int_to_bytes(w, _W_WIDTH), small_int(w_prime))


def record_payload(h: RecordHash) -> bytes:
    return pack_fields(DST_RECORD, h.to_bytes())


def booth_hash_payload(booth: int, aggregate: RecordHash) -> bytes:
    return pack_fields(DST_BOOTH_HASH, booth_name(booth).encode(), aggregate.to_bytes())


def booth_count_payload(booth: int, count: int) -> bytes:
    return pack_fields(DST_BOOTH_COUNT, booth_name(booth).encode(), small_int(count))
