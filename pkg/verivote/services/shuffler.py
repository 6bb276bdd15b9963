"""
Collection of acknowledged records and the anonymizing shuffle.

The shuffle is a plain uniform permutation; it only has to sever the link
between a record and the booth it came from.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, TypeVar

from verivote.services.booth import BoothLedger
from verivote.sigkit import BlindedSignature, HybridCiphertext
from verivote.utils.randomness import RandomSource

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class EncryptedRecordEnvelope:
    ciphertext: HybridCiphertext
    brid: bytes
    sigma_ack_blinded: BlindedSignature


def collect_envelopes(ledgers: Iterable[BoothLedger]) -> List[EncryptedRecordEnvelope]:
    envelopes = []
    for ledger in ledgers:
        for record in ledger.acknowledged:
            envelopes.append(EncryptedRecordEnvelope(record.ciphertext, record.brid, record.ack))
    logger.info(f"Collected {len(envelopes)} acknowledged records")
    return envelopes


def shuffle(envelopes: List[T], rng: RandomSource) -> List[T]:
    """Uniformly random permutation (Fisher-Yates); the input is left untouched"""
    return rng.sample_permutation(envelopes)
