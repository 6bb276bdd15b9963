"""
Randomness sources.

Every random draw in verivote goes through a RandomSource. Simulations and
the CLI use DeterministicRandom streams derived from one master seed so
reruns reproduce byte-identical artifacts; SystemRandomSource is for live
use.
"""

import secrets
from abc import ABC, abstractmethod
from typing import List, MutableSequence, TypeVar

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

T = TypeVar("T")

_BLOCK = 4096


class RandomSource(ABC):
    """Abstract source of uniform random bytes"""

    @abstractmethod
    def randbytes(self, n: int) -> bytes:
        """Return n uniformly random bytes"""
        pass

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), by rejection sampling"""
        if n <= 0:
            raise ValueError("upper bound must be positive")
        if n == 1:
            return 0
        bits = (n - 1).bit_length()
        nbytes = (bits + 7) // 8
        excess = nbytes * 8 - bits
        while True:
            candidate = int.from_bytes(self.randbytes(nbytes), "big") >> excess
            if candidate < n:
                return candidate

    def randrange(self, start: int, stop: int) -> int:
        if stop <= start:
            raise ValueError("empty range")
        return start + self.randbelow(stop - start)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision"""
        return self.randbelow(1 << 53) / float(1 << 53)

    def shuffle(self, items: MutableSequence[T]) -> None:
        """Fisher-Yates shuffle in place"""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_permutation(self, items: List[T]) -> List[T]:
        copied = list(items)
        self.shuffle(copied)
        return copied


class SystemRandomSource(RandomSource):
    """Operating-system randomness"""

    def randbytes(self, n: int) -> bytes:
        return secrets.token_bytes(n)


class DeterministicRandom(RandomSource):
    """ChaCha20 keystream keyed by HKDF-SHA256(seed, label).

    Two instances with the same seed and label produce the same stream;
    different labels give independent streams.
    """

    def __init__(self, seed: bytes, label: str):
        if isinstance(seed, str):
            seed = seed.encode("utf-8")
        self.label = label
        key_material = HKDF(
            algorithm=hashes.SHA256(),
            length=48,
            salt=b"verivote/drbg",
            info=label.encode("utf-8"),
        ).derive(seed)
        key, nonce = key_material[:32], key_material[32:48]
        self._encryptor = Cipher(algorithms.ChaCha20(key, nonce), mode=None).encryptor()
        self._buffer = b""

    def randbytes(self, n: int) -> bytes:
        while len(self._buffer) < n:
            self._buffer += self._encryptor.update(b"\x00" * _BLOCK)
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out


class RandomStreams:
    """Factory of labelled deterministic streams from one master seed.

    Each (stage, component) label gets its own stream, so rerunning a
    single stage reproduces its output regardless of what ran before.
    """

    def __init__(self, master_seed: str):
        self.master_seed = master_seed.encode("utf-8")

    def stream(self, label: str) -> DeterministicRandom:
        return DeterministicRandom(self.master_seed, label)

    def child(self, prefix: str) -> "RandomStreams":
        child = RandomStreams("")
        child.master_seed = self.master_seed + b"/" + prefix.encode("utf-8")
        return child
