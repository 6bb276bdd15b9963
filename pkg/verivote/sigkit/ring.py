"""
Schnorr ring signatures (Abe-Ohkubo-Suzuki construction).

A ring signature convinces a verifier that one member of a published key
set signed, without revealing which. The EVMs of a constituency form one
ring and the polling officers another.
"""

import hashlib
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from verivote.constants import DST_RING
from verivote.groups import GroupContext, GroupElement, GroupError, Scalar, hash_to_scalar
from verivote.sigkit.base import RingError, SignatureError
from verivote.utils.encoding import pack_fields, unpack_fields
from verivote.utils.randomness import RandomSource

logger = logging.getLogger(__name__)


def ring_digest(ring: Sequence[GroupElement]) -> bytes:
    return hashlib.sha256(pack_fields(*(key.to_bytes() for key in ring))).digest()


@dataclass(frozen=True)
class GroupSignature:
    """Ring signature; the ring itself is identified by its digest"""
    message_digest: bytes
    ring_digest: bytes
    challenge: Scalar
    responses: Tuple[Scalar, ...]

    def to_bytes(self) -> bytes:
        return pack_fields(
            self.message_digest,
            self.ring_digest,
            self.challenge.to_bytes(),
            b"".join(s.to_bytes() for s in self.responses),
        )

    @classmethod
    def from_bytes(cls, ctx: GroupContext, data: bytes) -> "GroupSignature":
        try:
            message_digest, ring_id, challenge, responses = unpack_fields(data, expected=4)
            width = ctx.scalar_width
            if len(responses) % width or not responses:
                raise SignatureError("ring responses have the wrong length")
            return cls(
                message_digest,
                ring_id,
                ctx.scalar_from_bytes(challenge),
                tuple(ctx.scalar_from_bytes(responses[i:i + width])
                      for i in range(0, len(responses), width)),
            )
        except GroupError as exc:
            raise SignatureError(f"malformed ring signature: {exc}") from exc


def _link(ctx: GroupContext, ring_id: bytes, message_digest: bytes, commitment: GroupElement) -> Scalar:
    return hash_to_scalar(ctx, DST_RING, ring_id, message_digest, commitment.to_bytes())


def ring_sign(ctx: GroupContext, ring: Sequence[GroupElement], member_index: int,
              member_secret: Scalar, message: bytes, rng: RandomSource) -> GroupSignature:
    """
    Sign on behalf of the ring.

    Raises:
        RingError: If member_index is out of range or the secret does not
            match ring[member_index]
    """
    n = len(ring)
    if not 0 <= member_index < n:
        raise RingError(f"member index {member_index} outside ring of {n}", field="member_index")
    if ring[member_index] != ctx.g ** member_secret:
        raise RingError("secret does not match the ring member's public key", field="member_secret")

    ring_id = ring_digest(ring)
    message_digest = hashlib.sha256(message).digest()
    challenges: List[Scalar] = [ctx.scalar(0)] * n
    responses: List[Scalar] = [ctx.scalar(0)] * n

    k = ctx.random_scalar(rng)
    challenges[(member_index + 1) % n] = _link(ctx, ring_id, message_digest, ctx.g ** k)

    for offset in range(1, n):
        i = (member_index + offset) % n
        responses[i] = ctx.random_scalar(rng)
        commitment = ctx.g ** responses[i] * ring[i] ** challenges[i]
        challenges[(i + 1) % n] = _link(ctx, ring_id, message_digest, commitment)

    responses[member_index] = k - member_secret * challenges[member_index]
    return GroupSignature(message_digest, ring_id, challenges[0], tuple(responses))


def ring_verify(ctx: GroupContext, ring: Sequence[GroupElement], message: bytes, sig: GroupSignature) -> bool:
    n = len(ring)
    if n == 0 or len(sig.responses) != n:
        return False
    ring_id = ring_digest(ring)
    message_digest = hashlib.sha256(message).digest()
    if sig.ring_digest != ring_id or sig.message_digest != message_digest:
        return False

    c = sig.challenge
    for i in range(n):
        commitment = ctx.g ** sig.responses[i] * ring[i] ** c
        c = _link(ctx, ring_id, message_digest, commitment)
    return c == sig.challenge
