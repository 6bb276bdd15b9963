"""
Abstract base class for prime-order group backends.

A backend implements a cyclic group G of prime order q with a symmetric
bilinear pairing e: G x G -> G_T. Elements handed around by the backend are
opaque "raw" values; the wrappers in verivote.groups.elements give them
operators and bind them to their backend.
"""

from abc import ABC, abstractmethod
from functools import cached_property
from typing import Any

from verivote.errors import VerivoteError


class GroupError(VerivoteError):
    """Base exception for group operations"""
    pass


class PairingUnavailableError(GroupError):
    """Raised when a pairing is requested but cannot be computed"""
    pass


class UnsupportedProfileError(GroupError):
    """Raised for an unknown security profile"""
    pass


class ContextMismatchError(GroupError):
    """Raised when values from two different group contexts are combined"""
    pass


class NonInvertibleScalarError(GroupError):
    """Raised when inverting the zero scalar"""
    pass


class GroupBackend(ABC):
    """Abstract prime-order group with a symmetric pairing."""

    backend_id: str = "abstract"

    def __init__(self, q: int, name: str):
        self.q = q
        self.name = name

    @property
    def scalar_width(self) -> int:
        """Bytes needed to serialize a scalar in Z_q"""
        return (self.q.bit_length() + 7) // 8

    @property
    @abstractmethod
    def element_width(self) -> int:
        """Fixed size of a serialized group element"""
        pass

    @property
    @abstractmethod
    def target_width(self) -> int:
        """Fixed size of a serialized target-group element"""
        pass

    @cached_property
    def fingerprint(self) -> str:
        """Identifier equal for backends that produce interchangeable elements"""
        return f"{self.backend_id}:{self.name}:{self.q:x}"

    @abstractmethod
    def generator(self) -> Any:
        pass

    @abstractmethod
    def identity(self) -> Any:
        pass

    @abstractmethod
    def mul(self, a: Any, b: Any) -> Any:
        pass

    @abstractmethod
    def exp(self, a: Any, k: int) -> Any:
        """
        Raise an element to a non-negative exponent already reduced mod q.
        """
        pass

    @abstractmethod
    def inv(self, a: Any) -> Any:
        pass

    @abstractmethod
    def eq(self, a: Any, b: Any) -> bool:
        pass

    @abstractmethod
    def is_identity(self, a: Any) -> bool:
        pass

    @abstractmethod
    def encode(self, a: Any) -> bytes:
        """
        Serialize an element to exactly element_width bytes.
        """
        pass

    def hash_key(self, a: Any) -> bytes:
        """Bytes that determine the element, for hashing"""
        return self.encode(a)

    @abstractmethod
    def decode(self, data: bytes) -> Any:
        """
        Parse an element.

        Raises:
            GroupError: If the bytes are not a canonical encoding of an
                element of the prime-order group
        """
        pass

    @abstractmethod
    def hash_to_element(self, data: bytes) -> Any:
        """
        Map bytes to an element whose discrete log nobody knows.
        """
        pass

    @abstractmethod
    def pair(self, a: Any, b: Any) -> Any:
        """
        Compute e(a, b).

        Raises:
            PairingUnavailableError: If neither operand carries what the
                pairing needs
        """
        pass

    @abstractmethod
    def target_one(self) -> Any:
        pass

    @abstractmethod
    def target_mul(self, a: Any, b: Any) -> Any:
        pass

    @abstractmethod
    def target_exp(self, a: Any, k: int) -> Any:
        pass

    @abstractmethod
    def target_eq(self, a: Any, b: Any) -> bool:
        pass

    @abstractmethod
    def target_encode(self, a: Any) -> bytes:
        pass

    @abstractmethod
    def target_decode(self, data: bytes) -> Any:
        pass
