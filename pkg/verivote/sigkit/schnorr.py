"""
Schnorr signatures over G_q.

Used for the election authority's signature on a token's commitment part.
"""

from dataclasses import dataclass

from verivote.constants import DST_SCHNORR
from verivote.groups import GroupContext, GroupElement, Scalar, hash_to_scalar
from verivote.sigkit.base import KeyPair, SignatureError
from verivote.utils.encoding import pack_fields
from verivote.utils.randomness import RandomSource


@dataclass(frozen=True)
class SchnorrSignature:
    challenge: Scalar
    response: Scalar

    def to_bytes(self) -> bytes:
        return self.challenge.to_bytes() + self.response.to_bytes()

    @classmethod
    def from_bytes(cls, ctx: GroupContext, data: bytes) -> "SchnorrSignature":
        width = ctx.scalar_width
        if len(data) != 2 * width:
            raise SignatureError("Schnorr signature has the wrong length", value=len(data))
        return cls(ctx.scalar_from_bytes(data[:width]), ctx.scalar_from_bytes(data[width:]))


def _challenge(ctx: GroupContext, public: GroupElement, nonce: GroupElement, message: bytes) -> Scalar:
    return hash_to_scalar(ctx, DST_SCHNORR, public.to_bytes(), nonce.to_bytes(), message)


def sign(ctx: GroupContext, keys: KeyPair, message: bytes, rng: RandomSource) -> SchnorrSignature:
    k = ctx.random_scalar(rng, nonzero=True)
    nonce = ctx.g ** k
    c = _challenge(ctx, keys.public, nonce, message)
    return SchnorrSignature(c, k + c * keys.secret)


def verify(ctx: GroupContext, public: GroupElement, message: bytes, sig: SchnorrSignature) -> bool:
    if public.is_identity():
        return False
    nonce = ctx.g ** sig.response / public ** sig.challenge
    return _challenge(ctx, public, nonce, message) == sig.challenge


def signed_payload(*parts: bytes) -> bytes:
    """Canonical byte string a multi-field message is signed as"""
    return pack_fields(*parts)


