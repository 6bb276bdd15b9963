"""Tests for randomness streams and byte encoding helpers."""

import pytest
from hypothesis import given, strategies as st

from verivote.utils.encoding import (
    EncodingError,
    from_hex,
    int_to_bytes,
    pack_fields,
    packed_size,
    unpack_fields,
)
from verivote.utils.randomness import DeterministicRandom, RandomStreams


class TestDeterministicRandom:
    def test_same_seed_and_label_repeat(self):
        a = DeterministicRandom(b"seed", "votes/booth-1")
        b = DeterministicRandom("seed", "votes/booth-1")
        assert a.randbytes(100) == b.randbytes(100)

    def test_labels_are_independent(self):
        a = DeterministicRandom(b"seed", "votes/booth-1")
        b = DeterministicRandom(b"seed", "votes/booth-2")
        assert a.randbytes(32) != b.randbytes(32)

    def test_reads_are_a_single_stream(self):
        whole = DeterministicRandom(b"seed", "tokens").randbytes(5000)
        split = DeterministicRandom(b"seed", "tokens")
        assert split.randbytes(10) + split.randbytes(4990) == whole

    def test_bounds(self):
        rng = DeterministicRandom(b"seed", "bounds")
        assert rng.randbelow(1) == 0
        assert all(3 <= rng.randrange(3, 7) < 7 for _ in range(200))
        assert all(0.0 <= rng.random() < 1.0 for _ in range(200))
        with pytest.raises(ValueError):
            rng.randbelow(0)
        with pytest.raises(ValueError):
            rng.randrange(5, 5)

    def test_permutation_keeps_items(self):
        rng = DeterministicRandom(b"seed", "shuffle")
        items = list(range(20))
        permuted = rng.sample_permutation(items)
        assert sorted(permuted) == items
        assert items == list(range(20))


def test_child_streams_are_namespaced():
    streams = RandomStreams("master")
    child = streams.child("setup")
    assert child.master_seed == b"master/setup"
    assert child.stream("keys").randbytes(16) == RandomStreams("master/setup").stream("keys").randbytes(16)
    assert child.stream("keys").randbytes(16) != streams.stream("keys").randbytes(16)


@given(st.lists(st.binary(max_size=40), max_size=6))
def test_packed_fields_split_back(fields):
    packed = pack_fields(*fields)
    assert len(packed) == packed_size([len(f) for f in fields])
    assert unpack_fields(packed, expected=len(fields)) == fields


def test_truncated_input_is_rejected():
    packed = pack_fields(b"abc", b"defg")
    with pytest.raises(EncodingError, match="truncated field"):
        unpack_fields(packed[:-1])
    with pytest.raises(EncodingError, match="truncated length prefix"):
        unpack_fields(packed[:9])
    with pytest.raises(EncodingError, match="expected 3 fields"):
        unpack_fields(packed, expected=3)


def test_integer_encoding_limits():
    assert int_to_bytes(258, 2) == b"\x01\x02"
    with pytest.raises(EncodingError):
        int_to_bytes(-1, 4)
    with pytest.raises(EncodingError):
        int_to_bytes(256, 1)


def test_bad_hex_names_the_field():
    with pytest.raises(EncodingError) as info:
        from_hex("zz", field="c_rid")
    assert info.value.field == "c_rid"
