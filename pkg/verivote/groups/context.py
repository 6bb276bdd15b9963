"""
GroupContext: the immutable public parameters every other module works in.
"""

import hashlib
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

from verivote.groups.base import ContextMismatchError, GroupBackend, PairingUnavailableError
from verivote.groups.elements import Exponent, GroupElement, Scalar, TargetElement
from verivote.utils.encoding import pack_fields
from verivote.utils.randomness import RandomSource


class SecurityProfile(str, Enum):
    """Named parameter sets"""
    TOY = "toy"
    TEST = "test"
    PRODUCTION = "production"


class BackendId(str, Enum):
    MOCK = "mock"
    PRODUCTION = "production"


@dataclass(frozen=True)
class WireWidths:
    """Serialized sizes, in bytes, of the three primitive value kinds"""
    element: int
    scalar: int
    signature: int


@dataclass(frozen=True, eq=False)
class GroupContext:
    """Prime-order group G_q with generators g, h and a symmetric pairing.

    log_g(h) is unknown to every party: the production profile hashes a
    public seed onto the curve, the mock profiles keep it inside the
    backend where only test oracles can reach it.
    """

    profile: SecurityProfile
    backend_id: BackendId
    backend: GroupBackend
    g: GroupElement
    h: GroupElement
    seed: bytes
    pairing_enabled: bool = True

    @property
    def q(self) -> int:
        return self.backend.q

    @property
    def scalar_width(self) -> int:
        return self.backend.scalar_width

    @property
    def element_width(self) -> int:
        return self.backend.element_width

    @property
    def target_width(self) -> int:
        return self.backend.target_width

    def widths(self) -> WireWidths:
        # Schnorr-type signatures are two scalars
        return WireWidths(
            element=self.element_width,
            scalar=self.scalar_width,
            signature=2 * self.scalar_width,
        )

    @cached_property
    def fingerprint(self) -> str:
        """Short identifier of (backend, q, g, h) written into artifact headers"""
        digest = hashlib.sha256(
            pack_fields(self.backend.fingerprint.encode(), self.g.to_bytes(), self.h.to_bytes())
        ).hexdigest()
        return digest[:16]

    # Scalars

    def scalar(self, value: int) -> Scalar:
        return Scalar(value, self.q)

    def random_scalar(self, rng: RandomSource, nonzero: bool = False) -> Scalar:
        if nonzero:
            return Scalar(1 + rng.randbelow(self.q - 1), self.q)
        return Scalar(rng.randbelow(self.q), self.q)

    def scalar_from_bytes(self, data: bytes) -> Scalar:
        return Scalar.from_bytes(data, self.q)

    # Group elements

    @cached_property
    def identity(self) -> GroupElement:
        return GroupElement(self.backend, self.backend.identity())

    def exp(self, base: GroupElement, k: Exponent) -> GroupElement:
        self.check_element(base)
        return base ** k

    def element_from_bytes(self, data: bytes) -> GroupElement:
        return GroupElement(self.backend, self.backend.decode(bytes(data)))

    def hash_to_element(self, data: bytes) -> GroupElement:
        return GroupElement(self.backend, self.backend.hash_to_element(data))

    def check_element(self, element: GroupElement):
        if not isinstance(element, GroupElement):
            raise TypeError(f"expected a group element, got {type(element).__name__}")
        if element.backend is not self.backend and element.backend.fingerprint != self.backend.fingerprint:
            raise ContextMismatchError("element belongs to a different group context")

    # Pairing

    def pair(self, a: GroupElement, b: GroupElement) -> TargetElement:
        if not self.pairing_enabled:
            raise PairingUnavailableError("pairing is disabled for this context")
        self.check_element(a)
        self.check_element(b)
        return TargetElement(self.backend, self.backend.pair(a.raw, b.raw))

    @cached_property
    def gt(self) -> TargetElement:
        """e(g, g), a generator of G_T"""
        return self.pair(self.g, self.g)

    @cached_property
    def target_identity(self) -> TargetElement:
        return TargetElement(self.backend, self.backend.target_one())

    def target_from_bytes(self, data: bytes) -> TargetElement:
        return TargetElement(self.backend, self.backend.target_decode(bytes(data)))


def hash_to_scalar(ctx: GroupContext, domain: bytes, *parts: bytes) -> Scalar:
    """SHA-512 of a domain-separated, length-prefixed encoding, reduced mod q"""
    digest = hashlib.sha512(pack_fields(domain, ctx.fingerprint.encode(), *parts)).digest()
    return Scalar(int.from_bytes(digest, "big"), ctx.q)
