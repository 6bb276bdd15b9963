"""
Checks a voter can run on their own receipt, before and after publication.
"""

import bisect
from typing import List, Optional, Sequence, Tuple

from verivote.groups import GroupContext, GroupElement
from verivote.services.base import receipt_payload
from verivote.services.commitments import combine, commit
from verivote.services.election_authority import BB2Row
from verivote.services.evm import VoterReceipt
from verivote.services.tokens import token_payload
from verivote.sigkit import ring_verify
from verivote.sigkit.schnorr import verify as schnorr_verify
from verivote.validators.base_validator import BaseValidator, CheckFunction, ValidationReport


class ReceiptValidator(BaseValidator):
    report_subject = "receipt verification"

    def __init__(self, ctx: GroupContext, receipt: VoterReceipt, ea_public: GroupElement,
                 evm_ring: Sequence[GroupElement], m: int):
        super().__init__()
        self.ctx = ctx
        self.receipt = receipt
        self.ea_public = ea_public
        self.evm_ring = evm_ring
        self.m = m

    def checks(self) -> List[Tuple[str, CheckFunction]]:
        return [
            ("token-signature", self._token_signature),
            ("receipt-signature", self._receipt_signature),
            ("rid-commitment-match", self._rid_match),
            ("vote-commitment", self._combine_equation),
            ("w-prime", self._w_prime),
        ]

    def _token_signature(self, report: ValidationReport):
        remnant = self.receipt.token_remnant
        ok = schnorr_verify(self.ctx, self.ea_public, token_payload(remnant.c_rid, remnant.c_u), remnant.signature)
        report.add_check("token-signature", ok)

    def _receipt_signature(self, report: ValidationReport):
        evm = self.receipt.evm_receipt
        payload = receipt_payload(evm.c_rid.to_bytes(), evm.c_v.to_bytes(), evm.proof.w, evm.proof.w_prime)
        report.add_check("receipt-signature", ring_verify(self.ctx, self.evm_ring, payload, evm.signature))

    def _rid_match(self, report: ValidationReport):
        # a receipt assembled from two voters' parts fails here
        report.add_check("rid-commitment-match",
                         self.receipt.token_remnant.c_rid == self.receipt.evm_receipt.c_rid)

    def _combine_equation(self, report: ValidationReport):
        evm = self.receipt.evm_receipt
        expected = commit(self.ctx, self.ctx.scalar(evm.proof.w), evm.proof.r_w)
        report.add_check("vote-commitment", combine(self.receipt.token_remnant.c_u, evm.c_v) == expected)

    def _w_prime(self, report: ValidationReport):
        proof = self.receipt.evm_receipt.proof
        report.add_check("w-prime", 0 <= proof.w_prime < self.m and proof.w_prime == proof.w % self.m)


def verify_receipt_local(ctx: GroupContext, receipt: VoterReceipt, ea_public: GroupElement,
                         evm_ring: Sequence[GroupElement], m: int) -> ValidationReport:
    """Itemized receipt check; the report is truthy iff every check passes"""
    return ReceiptValidator(ctx, receipt, ea_public, evm_ring, m).validate()


def find_bb2_row(bb2: Sequence[BB2Row], c_rid_bytes: bytes) -> Optional[BB2Row]:
    keys = [row.c_rid.to_bytes() for row in bb2]
    i = bisect.bisect_left(keys, c_rid_bytes)
    if i < len(keys) and keys[i] == c_rid_bytes:
        return bb2[i]
    return None


def verify_bb2_entry(receipt: VoterReceipt, bb2: Sequence[BB2Row]) -> bool:
    """The voter's C_rid is on BB2 with the w printed on their receipt"""
    row = find_bb2_row(bb2, receipt.evm_receipt.c_rid.to_bytes())
    return row is not None and row.w == receipt.evm_receipt.proof.w
