"""
Value types for scalars, group elements and target-group elements.
"""

from dataclasses import dataclass
from typing import Union

from verivote.groups.base import (
    ContextMismatchError,
    GroupBackend,
    GroupError,
    NonInvertibleScalarError,
)


@dataclass(frozen=True)
class Scalar:
    """An element of Z_q, always stored reduced."""

    value: int
    q: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.q)

    def _coerce(self, other) -> int:
        if isinstance(other, Scalar):
            if other.q != self.q:
                raise ContextMismatchError("scalars from different groups")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return NotImplemented
        return Scalar(self.value + value, self.q)

    __radd__ = __add__

    def __sub__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return NotImplemented
        return Scalar(self.value - value, self.q)

    def __rsub__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return NotImplemented
        return Scalar(value - self.value, self.q)

    def __mul__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return NotImplemented
        return Scalar(self.value * value, self.q)

    __rmul__ = __mul__

    def __neg__(self):
        return Scalar(-self.value, self.q)

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def inverse(self) -> "Scalar":
        if self.value == 0:
            raise NonInvertibleScalarError("zero has no inverse")
        return Scalar(pow(self.value, -1, self.q), self.q)

    @property
    def width(self) -> int:
        return (self.q.bit_length() + 7) // 8

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(self.width, "big")

    @classmethod
    def from_bytes(cls, data: bytes, q: int) -> "Scalar":
        width = (q.bit_length() + 7) // 8
        if len(data) != width:
            raise GroupError(f"scalar encoding must be {width} bytes, got {len(data)}")
        value = int.from_bytes(data, "big")
        if value >= q:
            raise GroupError("non-canonical scalar encoding")
        return cls(value, q)

    def __repr__(self):
        return f"Scalar({self.value})"


Exponent = Union[Scalar, int]


def _same_backend(a: GroupBackend, b: GroupBackend) -> bool:
    return a is b or a.fingerprint == b.fingerprint


def _exponent(backend: GroupBackend, k: Exponent) -> int:
    if isinstance(k, Scalar):
        if k.q != backend.q:
            raise ContextMismatchError("exponent from a different group")
        return k.value
    if isinstance(k, int):
        return k % backend.q
    raise TypeError(f"unsupported exponent type {type(k).__name__}")


class GroupElement:
    """An element of G bound to the backend that produced it."""

    __slots__ = ("backend", "raw", "_encoded")

    def __init__(self, backend: GroupBackend, raw):
        self.backend = backend
        self.raw = raw
        self._encoded = None

    def _check(self, other: "GroupElement"):
        if not isinstance(other, GroupElement):
            raise TypeError(f"cannot combine a group element with {type(other).__name__}")
        if not _same_backend(self.backend, other.backend):
            raise ContextMismatchError("group elements from different contexts")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(self.backend, self.backend.mul(self.raw, other.raw))

    def __truediv__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(self.backend, self.backend.mul(self.raw, self.backend.inv(other.raw)))

    def __pow__(self, k: Exponent) -> "GroupElement":
        return GroupElement(self.backend, self.backend.exp(self.raw, _exponent(self.backend, k)))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.backend, self.backend.inv(self.raw))

    def is_identity(self) -> bool:
        return self.backend.is_identity(self.raw)

    def to_bytes(self) -> bytes:
        if self._encoded is None:
            self._encoded = self.backend.encode(self.raw)
        return self._encoded

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        if not _same_backend(self.backend, other.backend):
            return False
        return self.backend.eq(self.raw, other.raw)

    def __hash__(self) -> int:
        return hash(self.backend.hash_key(self.raw))

    def __repr__(self):
        return f"GroupElement({self.to_bytes().hex()[:16]}...)"


class TargetElement:
    """An element of the pairing target group G_T."""

    __slots__ = ("backend", "raw")

    def __init__(self, backend: GroupBackend, raw):
        self.backend = backend
        self.raw = raw

    def _check(self, other: "TargetElement"):
        if not isinstance(other, TargetElement):
            raise TypeError(f"cannot combine a target element with {type(other).__name__}")
        if not _same_backend(self.backend, other.backend):
            raise ContextMismatchError("target elements from different contexts")

    def __mul__(self, other: "TargetElement") -> "TargetElement":
        self._check(other)
        return TargetElement(self.backend, self.backend.target_mul(self.raw, other.raw))

    def __pow__(self, k: Exponent) -> "TargetElement":
        return TargetElement(self.backend, self.backend.target_exp(self.raw, _exponent(self.backend, k)))

    def inverse(self) -> "TargetElement":
        return self ** (self.backend.q - 1)

    def to_bytes(self) -> bytes:
        return self.backend.target_encode(self.raw)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TargetElement):
            return NotImplemented
        if not _same_backend(self.backend, other.backend):
            return False
        return self.backend.target_eq(self.raw, other.raw)

    def __hash__(self) -> int:
        return hash(self.to_bytes())

    def __repr__(self):
        return f"TargetElement({self.to_bytes().hex()[:16]}...)"
