"""
The polling officer's desk.

The officer of booth k holds x_k and a batch of one-time signing nonces
whose commitments were published before polling. At the desk it tears the
chit off a freshly drawn token and keeps (r_p, brid, nonce index); when the
voter's acknowledgment arrives it blind-signs brid under x_k * r_p.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Set, Tuple

from verivote.groups import GroupContext, GroupElement, Scalar
from verivote.services.base import (
    PollingOfficerPublic,
    ProtocolError,
    TokenNotFreshError,
    TokenRejectedError,
    UnknownRecordError,
    booth_count_payload,
)
from verivote.services.tokens import TokenChit
from verivote.sigkit import BlindedSignature, EphemeralSigner, GroupSignature, KeyPair, bsign, keygen, ring_sign
from verivote.utils.randomness import RandomSource

logger = logging.getLogger(__name__)


@dataclass
class AckSlot:
    token_id: str
    brid: bytes
    nonce_index: int
    signer: EphemeralSigner
    acknowledged: bool = False


@dataclass(frozen=True)
class AckPrintout:
    """(brid, sigma'_ack) as printed by the officer for the booth ledger"""
    brid: bytes
    signature: BlindedSignature


class PollingOfficer:
    def __init__(self, ctx: GroupContext, booth: int, keys: KeyPair, nonces: Sequence[Scalar]):
        self.ctx = ctx
        self.booth = booth
        self.keys = keys
        self._nonces = list(nonces)
        self._nonce_commitments = tuple(ctx.g ** k for k in self._nonces)
        self._consumed: Set[str] = set()
        self._spent_nonces: Set[int] = set()
        self._slots: Dict[bytes, AckSlot] = {}
        self.printouts: List[AckPrintout] = []

    @classmethod
    def create(cls, ctx: GroupContext, booth: int, nonce_count: int, rng: RandomSource) -> "PollingOfficer":
        keys = keygen(ctx, rng)
        nonces = [ctx.random_scalar(rng, nonzero=True) for _ in range(nonce_count)]
        return cls(ctx, booth, keys, nonces)

    @property
    def nonces(self) -> Tuple[Scalar, ...]:
        return tuple(self._nonces)

    @property
    def retired(self) -> Set[str]:
        return set(self._consumed)

    def public(self) -> PollingOfficerPublic:
        return PollingOfficerPublic(self.booth, self.keys.public, self._nonce_commitments)

    def retire(self, token_ids: Iterable[str]):
        """Mark audited tokens as consumed"""
        for token_id in token_ids:
            self._consumed.add(token_id)

    def po_desk(self, chit: TokenChit, identity_verified: bool = True) -> AckSlot:
        """
        Tear the chit off a freshly drawn token and prepare its signing slot.

        Raises:
            TokenRejectedError: If the voter's identity was not verified
            TokenNotFreshError: If the token was already used or audited,
                or its signing nonce was spent
        """
        if not identity_verified:
            raise TokenRejectedError("voter identity not verified", field="identity")
        token_id = chit.token_id
        if token_id in self._consumed:
            raise TokenNotFreshError(f"token {token_id} is not fresh", field="token_id", value=token_id)
        if chit.nonce_index in self._spent_nonces or not 0 <= chit.nonce_index < len(self._nonces):
            raise TokenNotFreshError(f"nonce {chit.nonce_index} is spent or unknown",
                                     field="nonce_index", value=chit.nonce_index)

        self._consumed.add(token_id)
        self._spent_nonces.add(chit.nonce_index)
        signer = EphemeralSigner(self.keys.secret * chit.r_p, self._nonces[chit.nonce_index])
        slot = AckSlot(token_id, chit.brid, chit.nonce_index, signer)
        self._slots[chit.brid] = slot
        logger.debug(f"Booth {self.booth} issued slot for token {token_id}")
        return slot

    def acknowledge(self, brid: bytes) -> AckPrintout:
        """
        Blind-sign brid once the voter's acknowledgment reaches the desk.

        Raises:
            UnknownRecordError: If no slot was opened for brid
            ProtocolError: If the slot was already acknowledged
        """
        slot = self._slots.get(brid)
        if slot is None:
            raise UnknownRecordError("acknowledgment for a token not seen at the desk", field="brid")
        if slot.acknowledged:
            raise ProtocolError("token already acknowledged", field="brid")
        slot.acknowledged = True
        printout = AckPrintout(brid, bsign(self.ctx, slot.signer, brid))
        self.printouts.append(printout)
        return printout

    @property
    def acknowledged_count(self) -> int:
        return len(self.printouts)

    def sign_count(self, ring: Sequence[GroupElement], rng: RandomSource) -> GroupSignature:
        """Ring-sign this booth's acknowledgment count N_k on behalf of the officers"""
        index = list(ring).index(self.keys.public)
        return ring_sign(self.ctx, ring, index, self.keys.secret,
                         booth_count_payload(self.booth, self.acknowledged_count), rng)
