"""
Exponent-tracking group backend.

Elements are represented by their discrete logarithm with respect to the
generator, so every group operation is modular arithmetic on Z_q and the
pairing is multiplication of logarithms. This gives the algebra of a
symmetric pairing group at negligible cost; it offers no security and is
only meant for tests and simulation.

Optionally a (modulus, generator_value) pair renders elements as residues
of an order-q subgroup of Z_p*, which is how small hand-worked examples
are usually written down.
"""

import hashlib
import logging
from typing import Optional

from verivote.groups.base import GroupBackend, GroupError

logger = logging.getLogger(__name__)


class MockBackend(GroupBackend):
    """Group of order q where raw elements are exponents mod q."""

    backend_id = "mock"

    def __init__(self, q: int, name: str, modulus: Optional[int] = None,
                 generator_value: Optional[int] = None):
        super().__init__(q, name)
        if (modulus is None) != (generator_value is None):
            raise GroupError("modulus and generator_value must be given together")
        if modulus is not None and pow(generator_value, q, modulus) != 1:
            raise GroupError("generator_value does not have order q", value=generator_value)
        self.modulus = modulus
        self.generator_value = generator_value

    @property
    def element_width(self) -> int:
        return self.scalar_width

    @property
    def target_width(self) -> int:
        return self.scalar_width

    def generator(self) -> int:
        return 1

    def identity(self) -> int:
        return 0

    def mul(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def exp(self, a: int, k: int) -> int:
        return (a * k) % self.q

    def inv(self, a: int) -> int:
        return (-a) % self.q

    def eq(self, a: int, b: int) -> bool:
        return a == b

    def is_identity(self, a: int) -> bool:
        return a == 0

    def encode(self, a: int) -> bytes:
        return a.to_bytes(self.element_width, "big")

    def decode(self, data: bytes) -> int:
        if len(data) != self.element_width:
            raise GroupError(f"element encoding must be {self.element_width} bytes, got {len(data)}")
        value = int.from_bytes(data, "big")
        if value >= self.q:
            raise GroupError("element encoding out of range")
        return value

    def hash_to_element(self, data: bytes) -> int:
        digest = hashlib.sha512(data).digest()
        return int.from_bytes(digest, "big") % self.q

    def pair(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def target_one(self) -> int:
        return 0

    def target_mul(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def target_exp(self, a: int, k: int) -> int:
        return (a * k) % self.q

    def target_eq(self, a: int, b: int) -> bool:
        return a == b

    def target_encode(self, a: int) -> bytes:
        return a.to_bytes(self.target_width, "big")

    def target_decode(self, data: bytes) -> int:
        if len(data) != self.target_width:
            raise GroupError("target encoding has the wrong width")
        value = int.from_bytes(data, "big")
        if value >= self.q:
            raise GroupError("target encoding out of range")
        return value

    # Oracle access for tests; never reachable through GroupContext

    def discrete_log(self, a: int) -> int:
        return a

    def residue(self, a: int) -> int:
        """Render an element as a residue mod the configured modulus"""
        if self.modulus is None:
            raise GroupError("backend has no residue rendering configured")
        return pow(self.generator_value, a, self.modulus)

    def from_residue(self, value: int) -> int:
        """Find the exponent of a residue by exhaustive search (small groups only)"""
        if self.modulus is None:
            raise GroupError("backend has no residue rendering configured")
        current = 1
        for k in range(self.q):
            if current == value % self.modulus:
                return k
            current = (current * self.generator_value) % self.modulus
        raise GroupError("value is not in the order-q subgroup", value=value)
