"""
Hybrid public-key encryption to the election authority.

ElGamal KEM in G_q (ephemeral g^r, shared element pk^r). HKDF-SHA256 over
the shared element derives a ChaCha20 key and nonce and an HMAC-SHA256
key; the tag authenticates the KEM element together with the body.
"""

from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes, hmac
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from verivote.constants import DST_HYBRID
from verivote.groups import GroupContext, GroupElement, GroupError, Scalar
from verivote.sigkit.base import DecryptionError
from verivote.utils.encoding import EncodingError, pack_fields, unpack_fields
from verivote.utils.randomness import RandomSource

TAG_SIZE = 32


@dataclass(frozen=True)
class HybridCiphertext:
    kem: GroupElement
    body: bytes
    tag: bytes

    def to_bytes(self) -> bytes:
        return pack_fields(self.kem.to_bytes(), self.body, self.tag)

    @classmethod
    def from_bytes(cls, ctx: GroupContext, data: bytes) -> "HybridCiphertext":
        try:
            kem, body, tag = unpack_fields(data, expected=3)
            if len(tag) != TAG_SIZE:
                raise DecryptionError("authentication tag has the wrong length")
            return cls(ctx.element_from_bytes(kem), body, tag)
        except (EncodingError, GroupError) as exc:
            raise DecryptionError(f"malformed ciphertext: {exc}") from exc


def _derive_keys(shared: GroupElement, kem: GroupElement):
    material = HKDF(
        algorithm=hashes.SHA256(),
        length=80,
        salt=kem.to_bytes(),
        info=DST_HYBRID,
    ).derive(shared.to_bytes())
    return material[:32], material[32:64], material[64:80]


def _keystream_xor(key: bytes, nonce: bytes, data: bytes) -> bytes:
    encryptor = Cipher(algorithms.ChaCha20(key, nonce), mode=None).encryptor()
    return encryptor.update(data) + encryptor.finalize()


def _tag(mac_key: bytes, kem: GroupElement, body: bytes) -> hmac.HMAC:
    mac = hmac.HMAC(mac_key, hashes.SHA256())
    mac.update(pack_fields(kem.to_bytes(), body))
    return mac


def hybrid_encrypt(ctx: GroupContext, pk: GroupElement, plaintext: bytes, rng: RandomSource) -> HybridCiphertext:
    r = ctx.random_scalar(rng, nonzero=True)
    kem = ctx.g ** r
    enc_key, mac_key, nonce = _derive_keys(pk ** r, kem)
    body = _keystream_xor(enc_key, nonce, plaintext)
    return HybridCiphertext(kem, body, _tag(mac_key, kem, body).finalize())


def hybrid_decrypt(ctx: GroupContext, sk: Scalar, ct: HybridCiphertext) -> bytes:
    """
    Raises:
        DecryptionError: If the tag does not authenticate the ciphertext
    """
    ctx.check_element(ct.kem)
    if ct.kem.is_identity():
        raise DecryptionError("degenerate KEM element")
    enc_key, mac_key, nonce = _derive_keys(ct.kem ** sk, ct.kem)
    try:
        _tag(mac_key, ct.kem, ct.body).verify(ct.tag)
    except InvalidSignature as exc:
        raise DecryptionError("authentication tag mismatch") from exc
    return _keystream_xor(enc_key, nonce, ct.body)
