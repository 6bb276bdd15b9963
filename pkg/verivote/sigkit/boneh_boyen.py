"""
Boneh-Boyen short signatures: sig = g^(1/(x+m)), checked with
e(sig, y * g^m) == e(g, g).
"""

from typing import Union

from verivote.groups import GroupContext, GroupElement, NonInvertibleScalarError, Scalar
from verivote.sigkit.base import KeyPair, NonInvertibleError, keygen
from verivote.utils.randomness import RandomSource

Message = Union[Scalar, int]


def bb_keygen(ctx: GroupContext, rng: RandomSource) -> KeyPair:
    return keygen(ctx, rng)


def bb_sign(ctx: GroupContext, secret: Scalar, message: Message) -> GroupElement:
    """
    Raises:
        NonInvertibleError: If secret + message = 0 mod q
    """
    try:
        exponent = (secret + message).inverse()
    except NonInvertibleScalarError as exc:
        raise NonInvertibleError("x + m is not invertible; redraw the key or message",
                                 field="message") from exc
    return ctx.g ** exponent


def bb_verify(ctx: GroupContext, public: GroupElement, message: Message, sig: GroupElement) -> bool:
    return ctx.pair(sig, public * ctx.g ** message) == ctx.gt
