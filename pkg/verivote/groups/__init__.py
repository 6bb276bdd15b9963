"""
Prime-order groups with a symmetric bilinear pairing.
"""

from verivote.groups.base import (
    ContextMismatchError,
    GroupBackend,
    GroupError,
    NonInvertibleScalarError,
    PairingUnavailableError,
    UnsupportedProfileError,
)
from verivote.groups.context import (
    BackendId,
    GroupContext,
    SecurityProfile,
    WireWidths,
    hash_to_scalar,
)
from verivote.groups.elements import GroupElement, Scalar, TargetElement
from verivote.groups.factory import setup_group


def exp(base: GroupElement, k) -> GroupElement:
    """base^k; the identity when k = 0"""
    return base ** k


def pair(ctx: GroupContext, a: GroupElement, b: GroupElement) -> TargetElement:
    return ctx.pair(a, b)


__all__ = [
    "BackendId",
    "ContextMismatchError",
    "GroupBackend",
    "GroupContext",
    "GroupElement",
    "GroupError",
    "NonInvertibleScalarError",
    "PairingUnavailableError",
    "Scalar",
    "SecurityProfile",
    "TargetElement",
    "UnsupportedProfileError",
    "WireWidths",
    "exp",
    "hash_to_scalar",
    "pair",
    "setup_group",
]
