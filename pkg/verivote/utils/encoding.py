"""
Byte-level helpers shared by every serializer.
"""

import struct
from typing import List, Optional, Sequence

from verivote.constants import LENGTH_PREFIX_WIDTH, SMALL_INT_WIDTH
from verivote.errors import VerivoteError


class EncodingError(VerivoteError):
    """Raised when bytes cannot be decoded into the expected structure"""
    pass


def int_to_bytes(value: int, width: int) -> bytes:
    if value < 0:
        raise EncodingError("cannot encode a negative integer", value=value)
    try:
        return value.to_bytes(width, "big")
    except OverflowError as exc:
        raise EncodingError(f"integer does not fit in {width} bytes", value=value) from exc


def bytes_to_int(data: bytes) -> int:
    return int.from_bytes(data, "big")


def small_int(value: int) -> bytes:
    return int_to_bytes(value, SMALL_INT_WIDTH)


def pack_fields(*fields: bytes) -> bytes:
    """Concatenate fields, each prefixed with its 4-byte big-endian length"""
    out = bytearray()
    for item in fields:
        out += struct.pack(">I", len(item))
        out += item
    return bytes(out)


def unpack_fields(data: bytes, expected: Optional[int] = None) -> List[bytes]:
    fields: List[bytes] = []
    offset = 0
    while offset < len(data):
        if offset + LENGTH_PREFIX_WIDTH > len(data):
            raise EncodingError("truncated length prefix")
        (length,) = struct.unpack(">I", data[offset:offset + LENGTH_PREFIX_WIDTH])
        offset += LENGTH_PREFIX_WIDTH
        if offset + length > len(data):
            raise EncodingError("truncated field")
        fields.append(data[offset:offset + length])
        offset += length
    if expected is not None and len(fields) != expected:
        raise EncodingError(f"expected {expected} fields, found {len(fields)}")
    return fields


def packed_size(widths: Sequence[int]) -> int:
    """Size of pack_fields output for fields of the given widths"""
    return sum(LENGTH_PREFIX_WIDTH + w for w in widths)


def from_hex(text: str, field: str = "field") -> bytes:
    try:
        return bytes.fromhex(text)
    except ValueError as exc:
        raise EncodingError(f"invalid hex in {field}", field=field) from exc
