"""
BLS12-381 group backend built on py_ecc.

BLS12-381 has an asymmetric pairing e: G1 x G2 -> G_T. The protocol is
written for a symmetric pairing, so an element is a "twin": a G1 point
together with, when its discrete log with respect to the generator is
known to whoever created it, the G2 point with the same log. Elements
derived from the generator by exponentiation stay twins; elements that
involve the independent generator h (commitments) only carry G1. Every
pairing the protocol evaluates has at least one twin operand, and
e(a, b) = e_asym(b.g2, a.g1) = e_asym(a.g2, b.g1) for twins.
"""

import hashlib
import logging
from typing import NamedTuple, Optional, Tuple

from py_ecc import optimized_bls12_381 as bls
from py_ecc.bls.point_compression import (
    compress_G1,
    compress_G2,
    decompress_G1,
    decompress_G2,
)

from verivote.constants import DST_HASH_TO_GROUP
from verivote.groups.base import GroupBackend, GroupError, PairingUnavailableError

logger = logging.getLogger(__name__)

G1_BYTES = 48
G2_BYTES = 96
FQ_BYTES = 48

# Cofactor of the BLS12-381 G1 curve
G1_COFACTOR = 0x396C8C005555E1568C00AAAB0000AAAB


class TwinPoint(NamedTuple):
    g1: Tuple
    g2: Optional[Tuple]


def _coeff(value) -> int:
    return int(getattr(value, "n", value))


class PairingBackend(GroupBackend):
    """BLS12-381 through py_ecc's optimized implementation."""

    backend_id = "bls12_381"

    def __init__(self, name: str = "bls12-381"):
        super().__init__(bls.curve_order, name)
        self.field_modulus = bls.field_modulus

    @property
    def element_width(self) -> int:
        return 1 + G1_BYTES + G2_BYTES

    @property
    def target_width(self) -> int:
        return 12 * FQ_BYTES

    def generator(self) -> TwinPoint:
        return TwinPoint(bls.G1, bls.G2)

    def identity(self) -> TwinPoint:
        return TwinPoint(bls.Z1, bls.Z2)

    def mul(self, a: TwinPoint, b: TwinPoint) -> TwinPoint:
        g2 = None
        if a.g2 is not None and b.g2 is not None:
            g2 = bls.add(a.g2, b.g2)
        return TwinPoint(bls.add(a.g1, b.g1), g2)

    def exp(self, a: TwinPoint, k: int) -> TwinPoint:
        k %= self.q
        if k == 0:
            return TwinPoint(bls.Z1, bls.Z2 if a.g2 is not None else None)
        g2 = bls.multiply(a.g2, k) if a.g2 is not None else None
        return TwinPoint(bls.multiply(a.g1, k), g2)

    def inv(self, a: TwinPoint) -> TwinPoint:
        g2 = bls.neg(a.g2) if a.g2 is not None else None
        return TwinPoint(bls.neg(a.g1), g2)

    def eq(self, a: TwinPoint, b: TwinPoint) -> bool:
        return bls.eq(a.g1, b.g1)

    def is_identity(self, a: TwinPoint) -> bool:
        return bls.is_inf(a.g1)

    def _in_subgroup(self, point) -> bool:
        # [q-1]P == -P holds exactly for points of order dividing q
        if bls.is_inf(point):
            return True
        return bls.eq(bls.multiply(point, self.q - 1), bls.neg(point))

    def encode(self, a: TwinPoint) -> bytes:
        out = bytearray()
        out.append(1 if a.g2 is not None else 0)
        out += int(compress_G1(a.g1)).to_bytes(G1_BYTES, "big")
        if a.g2 is not None:
            z1, z2 = compress_G2(a.g2)
            out += int(z1).to_bytes(G1_BYTES, "big") + int(z2).to_bytes(G1_BYTES, "big")
        else:
            out += bytes(G2_BYTES)
        return bytes(out)

    def hash_key(self, a: TwinPoint) -> bytes:
        # the G1 half alone determines the element
        return int(compress_G1(a.g1)).to_bytes(G1_BYTES, "big")

    def decode(self, data: bytes) -> TwinPoint:
        if len(data) != self.element_width:
            raise GroupError(f"element encoding must be {self.element_width} bytes, got {len(data)}")
        flag = data[0]
        if flag not in (0, 1):
            raise GroupError("invalid element flag byte", value=flag)
        try:
            g1 = decompress_G1(int.from_bytes(data[1:1 + G1_BYTES], "big"))
        except Exception as exc:
            raise GroupError(f"invalid G1 encoding: {exc}") from exc
        if not self._in_subgroup(g1):
            raise GroupError("G1 point is not in the prime-order subgroup")

        tail = data[1 + G1_BYTES:]
        if flag == 0:
            if any(tail):
                raise GroupError("non-canonical element encoding")
            return TwinPoint(g1, None)

        try:
            g2 = decompress_G2((
                int.from_bytes(tail[:G1_BYTES], "big"),
                int.from_bytes(tail[G1_BYTES:], "big"),
            ))
        except Exception as exc:
            raise GroupError(f"invalid G2 encoding: {exc}") from exc
        if not self._in_subgroup(g2):
            raise GroupError("G2 point is not in the prime-order subgroup")
        # both halves must carry the same discrete log
        if bls.pairing(g2, bls.G1) != bls.pairing(bls.G2, g1):
            raise GroupError("inconsistent twin element")
        return TwinPoint(g1, g2)

    def hash_to_element(self, data: bytes) -> TwinPoint:
        """Try-and-increment map to G1 followed by cofactor clearing"""
        p = self.field_modulus
        counter = 0
        while True:
            digest = hashlib.sha512(DST_HASH_TO_GROUP + counter.to_bytes(4, "big") + data).digest()
            x = int.from_bytes(digest, "big") % p
            rhs = (pow(x, 3, p) + 4) % p
            # p = 3 mod 4, so a square root is a single exponentiation
            y = pow(rhs, (p + 1) // 4, p)
            if (y * y) % p == rhs:
                point = (bls.FQ(x), bls.FQ(y), bls.FQ.one())
                cleared = bls.multiply(point, G1_COFACTOR)
                if not bls.is_inf(cleared):
                    return TwinPoint(cleared, None)
            counter += 1

    def pair(self, a: TwinPoint, b: TwinPoint):
        if a.g2 is not None:
            return bls.pairing(a.g2, b.g1)
        if b.g2 is not None:
            return bls.pairing(b.g2, a.g1)
        raise PairingUnavailableError("pairing needs at least one operand derived from the generator")

    def target_one(self):
        return bls.FQ12.one()

    def target_mul(self, a, b):
        return a * b

    def target_exp(self, a, k: int):
        return a ** (k % self.q)

    def target_eq(self, a, b) -> bool:
        return a == b

    def target_encode(self, a) -> bytes:
        return b"".join(_coeff(c).to_bytes(FQ_BYTES, "big") for c in a.coeffs)

    def target_decode(self, data: bytes):
        if len(data) != self.target_width:
            raise GroupError("target encoding has the wrong width")
        coeffs = [int.from_bytes(data[i:i + FQ_BYTES], "big") for i in range(0, len(data), FQ_BYTES)]
        if any(c >= self.field_modulus for c in coeffs):
            raise GroupError("target coefficient out of range")
        return bls.FQ12(coeffs)
