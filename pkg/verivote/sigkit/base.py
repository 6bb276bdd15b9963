"""
Key pairs and the error family shared by every signature scheme.
"""

from dataclasses import dataclass

from verivote.errors import VerivoteError
from verivote.groups import GroupContext, GroupElement, Scalar
from verivote.utils.randomness import RandomSource


class SignatureError(VerivoteError):
    """Base exception for signing, verification and encryption"""
    pass


class NonInvertibleError(SignatureError):
    """Raised when x + m = 0 mod q in a Boneh-Boyen signature"""
    pass


class MalformedBlindingError(SignatureError):
    """Raised for a blinding factor or blinded message that cannot be parsed"""
    pass


class RingError(SignatureError):
    """Raised for a bad ring index or a secret that does not match the ring"""
    pass


class DecryptionError(SignatureError):
    """Raised when a hybrid ciphertext fails authentication or parsing"""
    pass


@dataclass(frozen=True)
class KeyPair:
    secret: Scalar
    public: GroupElement

    def __repr__(self):
        # never render the secret
        return f"KeyPair(public={self.public!r})"


def keygen(ctx: GroupContext, rng: RandomSource) -> KeyPair:
    secret = ctx.random_scalar(rng, nonzero=True)
    return KeyPair(secret, ctx.g ** secret)


def keypair_from_secret(ctx: GroupContext, secret: Scalar) -> KeyPair:
    return KeyPair(secret, ctx.g ** secret)
