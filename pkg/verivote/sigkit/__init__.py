"""
Signature and encryption machinery: Schnorr, Boneh-Boyen, blind Schnorr,
ring signatures, hybrid encryption and the record hash.
"""

from verivote.sigkit.base import (
    DecryptionError,
    KeyPair,
    MalformedBlindingError,
    NonInvertibleError,
    RingError,
    SignatureError,
    keygen,
    keypair_from_secret,
)
from verivote.sigkit.blind import (
    BlindedSignature,
    BlindingFactor,
    EphemeralPublic,
    EphemeralSigner,
    UnblindedSignature,
    blind,
    bsign,
    bverify,
    unblind,
)
from verivote.sigkit.boneh_boyen import bb_keygen, bb_sign, bb_verify
from verivote.sigkit.hashing import RecordHash, record_hash, xor_fold
from verivote.sigkit.hybrid import HybridCiphertext, hybrid_decrypt, hybrid_encrypt
from verivote.sigkit.ring import GroupSignature, ring_sign, ring_verify
from verivote.sigkit.schnorr import SchnorrSignature

__all__ = [
    "BlindedSignature",
    "BlindingFactor",
    "DecryptionError",
    "EphemeralPublic",
    "EphemeralSigner",
    "GroupSignature",
    "HybridCiphertext",
    "KeyPair",
    "MalformedBlindingError",
    "NonInvertibleError",
    "RecordHash",
    "RingError",
    "SchnorrSignature",
    "SignatureError",
    "UnblindedSignature",
    "bb_keygen",
    "bb_sign",
    "bb_verify",
    "blind",
    "bsign",
    "bverify",
    "hybrid_decrypt",
    "hybrid_encrypt",
    "keygen",
    "keypair_from_secret",
    "record_hash",
    "ring_sign",
    "ring_verify",
    "unblind",
    "xor_fold",
]
