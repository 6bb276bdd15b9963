"""
Blind Schnorr signatures under per-token ephemeral keys.

The polling officer of booth k holds x_k. Each token carries r_p and the
ephemeral public key p = (g^x_k)^r_p, so the ephemeral secret is
x_k * r_p mod q. The signer's first move is issued ahead of polling: the
officer publishes nonce commitments R_j = g^k_j and each token is bound to
one of them.

    blind:   R' = R * g^alpha * p^beta,  c' = H(p, R', m),  c = c' + beta
    sign:    s = k_j + c * x_k * r_p
    unblind: (c', s' = s + alpha)
    verify:  H(p, g^s' * p^-c', m) == c'

The signer only ever sees c, which is uniformly distributed whatever m is.
"""

from dataclasses import dataclass

from verivote.constants import DST_BLIND
from verivote.groups import GroupContext, GroupElement, GroupError, Scalar, hash_to_scalar
from verivote.sigkit.base import MalformedBlindingError, SignatureError
from verivote.utils.randomness import RandomSource


@dataclass(frozen=True)
class BlindingFactor:
    alpha: Scalar
    beta: Scalar

    def to_bytes(self) -> bytes:
        return self.alpha.to_bytes() + self.beta.to_bytes()

    @classmethod
    def from_bytes(cls, ctx: GroupContext, data: bytes) -> "BlindingFactor":
        width = ctx.scalar_width
        if len(data) != 2 * width:
            raise MalformedBlindingError("blinding factor has the wrong length", value=len(data))
        try:
            return cls(ctx.scalar_from_bytes(data[:width]), ctx.scalar_from_bytes(data[width:]))
        except GroupError as exc:
            raise MalformedBlindingError(f"blinding factor is not canonical: {exc}") from exc

    @classmethod
    def random(cls, ctx: GroupContext, rng: RandomSource) -> "BlindingFactor":
        return cls(ctx.random_scalar(rng, nonzero=True), ctx.random_scalar(rng, nonzero=True))


@dataclass(frozen=True)
class EphemeralPublic:
    """What the blinder needs to know about the signer: p and R"""
    key: GroupElement
    nonce_commitment: GroupElement


@dataclass(frozen=True)
class EphemeralSigner:
    """Signer side for one token: x_k * r_p and the one-time nonce k_j"""
    secret: Scalar
    nonce: Scalar

    def __repr__(self):
        return "EphemeralSigner(<secret>)"


@dataclass(frozen=True)
class BlindedSignature:
    """sigma': the signer's response on the blinded challenge"""
    challenge: Scalar
    response: Scalar

    def to_bytes(self) -> bytes:
        return self.challenge.to_bytes() + self.response.to_bytes()

    @classmethod
    def from_bytes(cls, ctx: GroupContext, data: bytes) -> "BlindedSignature":
        width = ctx.scalar_width
        if len(data) != 2 * width:
            raise SignatureError("blinded signature has the wrong length", value=len(data))
        return cls(ctx.scalar_from_bytes(data[:width]), ctx.scalar_from_bytes(data[width:]))


@dataclass(frozen=True)
class UnblindedSignature:
    """sigma_ack: (c', s') together with the ephemeral key it verifies under"""
    challenge: Scalar
    response: Scalar
    key: GroupElement

    def to_bytes(self) -> bytes:
        return self.challenge.to_bytes() + self.response.to_bytes() + self.key.to_bytes()

    @classmethod
    def from_bytes(cls, ctx: GroupContext, data: bytes) -> "UnblindedSignature":
        width = ctx.scalar_width
        if len(data) != 2 * width + ctx.element_width:
            raise SignatureError("unblinded signature has the wrong length", value=len(data))
        return cls(
            ctx.scalar_from_bytes(data[:width]),
            ctx.scalar_from_bytes(data[width:2 * width]),
            ctx.element_from_bytes(data[2 * width:]),
        )


def _challenge(ctx: GroupContext, key: GroupElement, commitment: GroupElement, message: Scalar) -> Scalar:
    return hash_to_scalar(ctx, DST_BLIND, key.to_bytes(), commitment.to_bytes(), message.to_bytes())


def blind(ctx: GroupContext, message: Scalar, blinding: BlindingFactor, public: EphemeralPublic) -> bytes:
    """Return brid, the blinded challenge the signer will see"""
    blinded_commitment = public.nonce_commitment * ctx.g ** blinding.alpha * public.key ** blinding.beta
    c_prime = _challenge(ctx, public.key, blinded_commitment, message)
    return (c_prime + blinding.beta).to_bytes()


def parse_blinded(ctx: GroupContext, blinded: bytes) -> Scalar:
    try:
        return ctx.scalar_from_bytes(blinded)
    except GroupError as exc:
        raise MalformedBlindingError(f"blinded message is malformed: {exc}") from exc


def bsign(ctx: GroupContext, signer: EphemeralSigner, blinded: bytes) -> BlindedSignature:
    c = parse_blinded(ctx, blinded)
    return BlindedSignature(c, signer.nonce + c * signer.secret)


def unblind(ctx: GroupContext, sig_blinded: BlindedSignature, blinding: BlindingFactor,
            key: GroupElement) -> UnblindedSignature:
    return UnblindedSignature(
        challenge=sig_blinded.challenge - blinding.beta,
        response=sig_blinded.response + blinding.alpha,
        key=key,
    )


def bverify(ctx: GroupContext, key: GroupElement, message: Scalar, sig: UnblindedSignature) -> bool:
    if sig.key != key or key.is_identity():
        return False
    commitment = ctx.g ** sig.response / key ** sig.challenge
    return _challenge(ctx, key, commitment, message) == sig.challenge
