"""
Universal verification over the published bulletin boards.

Anybody can run these checks from BB0-BB3 and the public keys of the
machines and officers. Each check reports the offending rows; the verdict
passes only when every check does.
"""

from typing import List, Optional, Sequence, Tuple

from verivote.groups import GroupContext, GroupElement
from verivote.services.base import booth_count_payload, booth_hash_payload, record_payload
from verivote.services.booth import BB1Row
from verivote.services.election_authority import BB2Row, BB3Row, rid_proximity_pairs
from verivote.services.tally import TallyResult
from verivote.services.tokens import BB0Row
from verivote.sigkit import bverify, record_hash, ring_verify, xor_fold
from verivote.validators.base_validator import BaseValidator, CheckFunction, ValidationReport

UNIVERSAL_CHECKS = (
    "column-sum",
    "rid-separation",
    "hash-recompute",
    "group-signature",
    "ack-signature-vs-bb0",
    "xor-aggregate",
    "count",
    "tally-recount",
    "booth-signatures",
)


class UniversalReport(ValidationReport):
    def __init__(self):
        super().__init__("universal verification")
        self.recount: Optional[TallyResult] = None
        self.verified_fraction: Optional[float] = None

    @classmethod
    def from_report(cls, report: ValidationReport) -> "UniversalReport":
        result = cls()
        result.checks = report.checks
        result.metadata = report.metadata
        return result


class UniversalValidator(BaseValidator):
    report_subject = "universal verification"

    def __init__(self, ctx: GroupContext, bb0: Sequence[BB0Row], bb1: Sequence[BB1Row],
                 bb2: Optional[Sequence[BB2Row]], bb3: Sequence[BB3Row],
                 evm_ring: Sequence[GroupElement], po_ring: Sequence[GroupElement], m: int,
                 published_tally: Optional[TallyResult] = None):
        super().__init__()
        self.ctx = ctx
        self.bb0 = bb0
        self.bb1 = bb1
        self.bb2 = bb2
        self.bb3 = bb3
        self.evm_ring = evm_ring
        self.po_ring = po_ring
        self.m = m
        self.published_tally = published_tally
        self.recount: Optional[TallyResult] = None

    def checks(self) -> List[Tuple[str, CheckFunction]]:
        return [
            ("column-sum", self._column_sum),
            ("rid-separation", self._rid_separation),
            ("hash-recompute", self._hash_recompute),
            ("group-signature", self._group_signature),
            ("ack-signature-vs-bb0", self._ack_signatures),
            ("xor-aggregate", self._xor_aggregate),
            ("count", self._count),
            ("tally-recount", self._tally_recount),
            ("booth-signatures", self._booth_signatures),
        ]

    def _column_sum(self, report: ValidationReport):
        bad = [i for i, row in enumerate(self.bb3) if row.rho != row.rid + row.v]
        report.add_check("column-sum", not bad, f"{len(bad)} rows with rho != rid + v", bad)

    def _rid_separation(self, report: ValidationReport):
        pairs = rid_proximity_pairs([row.rid.value for row in self.bb3], self.m, self.ctx.q)
        report.add_check("rid-separation", not pairs, f"{len(pairs)} rid pairs within {self.m}", pairs)

    def _hash_recompute(self, report: ValidationReport):
        bad = [
            i for i, row in enumerate(self.bb3)
            if not 0 <= row.v < self.m or row.h != record_hash(row.rid, row.v, self.m)
        ]
        report.add_check("hash-recompute", not bad, f"{len(bad)} rows with a wrong h", bad)

    def _group_signature(self, report: ValidationReport):
        bad = [
            i for i, row in enumerate(self.bb3)
            if not ring_verify(self.ctx, self.evm_ring, record_payload(row.h), row.mu_h)
        ]
        report.add_check("group-signature", not bad, f"{len(bad)} rows with an invalid mu_h", bad)

    def _ack_signatures(self, report: ValidationReport):
        bb0_keys = {row.key.to_bytes() for row in self.bb0}
        seen = set()
        bad = []
        for i, row in enumerate(self.bb3):
            key = row.sigma_ack.key.to_bytes()
            if key not in bb0_keys or key in seen or not bverify(self.ctx, row.sigma_ack.key, row.rid, row.sigma_ack):
                bad.append(i)
            seen.add(key)
        report.add_check("ack-signature-vs-bb0", not bad, f"{len(bad)} rows without a valid acknowledgment", bad)

    def _xor_aggregate(self, report: ValidationReport):
        board = xor_fold(row.h for row in self.bb3)
        booths = xor_fold(row.aggregate for row in self.bb1)
        report.add_check("xor-aggregate", board == booths, f"BB3 {board.hex()[:16]} vs BB1 {booths.hex()[:16]}")

    def _count(self, report: ValidationReport):
        expected = sum(row.count for row in self.bb1)
        detail = f"sum N_k = {expected}, BB3 rows = {len(self.bb3)}"
        ok = expected == len(self.bb3)
        if self.bb2 is not None:
            detail += f", BB2 rows = {len(self.bb2)}"
            ok = ok and len(self.bb2) == len(self.bb3)
        report.add_check("count", ok, detail)

    def _tally_recount(self, report: ValidationReport):
        counts = [0] * self.m
        out_of_range = []
        for i, row in enumerate(self.bb3):
            if 0 <= row.v < self.m:
                counts[row.v] += 1
            else:
                out_of_range.append(i)
        self.recount = TallyResult(counts, len(self.bb3))
        ok = not out_of_range
        if self.published_tally is not None:
            ok = ok and self.published_tally == self.recount
        report.add_check("tally-recount", ok, f"recount {counts}", out_of_range)

    def _booth_signatures(self, report: ValidationReport):
        bad = []
        for row in self.bb1:
            hash_ok = ring_verify(self.ctx, self.evm_ring, booth_hash_payload(row.booth, row.aggregate),
                                  row.aggregate_signature)
            count_ok = ring_verify(self.ctx, self.po_ring, booth_count_payload(row.booth, row.count),
                                   row.count_signature)
            if not (hash_ok and count_ok):
                bad.append(row.booth)
        report.add_check("booth-signatures", not bad, f"{len(bad)} booths with invalid signatures", bad)


def universal_verify(ctx: GroupContext, bb0: Sequence[BB0Row], bb1: Sequence[BB1Row],
                     bb2: Optional[Sequence[BB2Row]], bb3: Sequence[BB3Row],
                     evm_ring: Sequence[GroupElement], po_ring: Sequence[GroupElement], m: int,
                     published_tally: Optional[TallyResult] = None,
                     verified_fraction: Optional[float] = None) -> UniversalReport:
    """
    Run every universal check.

    Args:
        verified_fraction: Fraction of voters whose individual verification
            ran and passed, reported alongside the checks when known
    """
    validator = UniversalValidator(ctx, bb0, bb1, bb2, bb3, evm_ring, po_ring, m, published_tally)
    report = UniversalReport.from_report(validator.validate())
    report.recount = validator.recount
    report.verified_fraction = verified_fraction
    report.metadata["rows"] = len(bb3)
    if verified_fraction is not None:
        report.metadata["verified_fraction"] = verified_fraction
    return report
