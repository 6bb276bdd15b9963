"""
Post-polling consolidation of one booth.

The officer's printouts (brid, sigma'_ack) are matched to the EVM's stored
records. Records without an acknowledgment are set aside and flagged; the
acknowledged ones give N_k and H_k = XOR of their record hashes, signed on
behalf of the machines (H_k) and the officers (N_k).

The officer signs the count of its own printouts; when that differs from
the matched count the ledger is flagged and the BB1 count signature will
not verify.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from verivote.groups import GroupElement
from verivote.services.base import booth_name
from verivote.services.evm import EVM, EncryptedRecord
from verivote.services.polling_officer import AckPrintout, PollingOfficer
from verivote.sigkit import GroupSignature, RecordHash, xor_fold
from verivote.utils.randomness import RandomSource

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BB1Row:
    booth: int
    aggregate: RecordHash
    aggregate_signature: GroupSignature
    count: int
    count_signature: GroupSignature

    @property
    def booth_name(self) -> str:
        return booth_name(self.booth)


@dataclass
class BoothLedger:
    booth: int
    records: List[EncryptedRecord]
    aggregate: RecordHash
    count: int
    aggregate_signature: GroupSignature
    count_signature: GroupSignature
    flags: List[str] = field(default_factory=list)

    @property
    def acknowledged(self) -> List[EncryptedRecord]:
        return [r for r in self.records if r.ack is not None]

    @property
    def discarded(self) -> List[EncryptedRecord]:
        return [r for r in self.records if r.ack is None]

    def bb1_row(self) -> BB1Row:
        return BB1Row(self.booth, self.aggregate, self.aggregate_signature, self.count, self.count_signature)


def close_booth(evm: EVM, po_printouts: Sequence[AckPrintout], po: PollingOfficer,
                po_ring: Sequence[GroupElement], rng: RandomSource) -> Tuple[BoothLedger, BB1Row]:
    """
    Attach acknowledgments, compute (N_k, H_k) and sign them.

    Args:
        evm: The booth's machine with its stored records
        po_printouts: The officer's (brid, sigma'_ack) printouts
        po: The booth's officer, who ring-signs N_k
        po_ring: Public keys of every officer in the constituency
        rng: Randomness for the ring signatures
    """
    flags: List[str] = []
    by_brid = {record.brid: record for record in evm.records}
    for printout in po_printouts:
        record = by_brid.get(printout.brid)
        if record is None:
            flags.append(f"acknowledgment without a stored record: {printout.brid.hex()[:16]}")
            continue
        if record.ack is not None:
            flags.append(f"duplicate acknowledgment: {printout.brid.hex()[:16]}")
            continue
        record.ack = printout.signature

    acknowledged = [r for r in evm.records if r.ack is not None]
    for record in evm.records:
        if record.ack is None:
            flags.append(f"record without acknowledgment discarded: {record.brid.hex()[:16]}")

    aggregate = xor_fold(r.h for r in acknowledged)
    count = len(acknowledged)
    if po.acknowledged_count != count:
        flags.append(f"officer signed N_k={po.acknowledged_count} but {count} acknowledgments matched")
        logger.warning(f"Booth {evm.booth}: officer count {po.acknowledged_count} differs from ledger count {count}")
    ledger = BoothLedger(
        booth=evm.booth,
        records=list(evm.records),
        aggregate=aggregate,
        count=count,
        aggregate_signature=evm.sign_booth_hash(aggregate, rng),
        count_signature=po.sign_count(po_ring, rng),
        flags=flags + list(evm.flags),
    )
    if flags:
        logger.warning(f"Booth {evm.booth} closed with {len(flags)} flags")
    logger.info(f"Booth {evm.booth} closed: N_k={count}")
    return ledger, ledger.bb1_row()
