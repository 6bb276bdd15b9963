"""
Election authority: key material, record ingestion, bulletin boards and the
prover side of individual verification.

Every record is decrypted and re-checked: the commitments, the vote proof,
the record hash, the EVM ring signatures and the unblinded acknowledgment.
Records that fail any check are flagged for internal audit and kept out of
the published boards.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from verivote.groups import GroupContext, GroupElement, Scalar, TargetElement
from verivote.services.base import ProtocolError, UnknownRecordError, receipt_payload, record_payload
from verivote.services.commitments import Commitment, Opening, combine, commit
from verivote.services.evm import SessionRecord
from verivote.services.shuffler import EncryptedRecordEnvelope
from verivote.services.tokens import BB0Row, IssuedToken, TokenRegistry, token_payload
from verivote.services.zkp_membership import (
    ProverState,
    Responses,
    VerifierPublic,
    prove_first,
    respond,
)
from verivote.sigkit import (
    DecryptionError,
    GroupSignature,
    KeyPair,
    RecordHash,
    UnblindedSignature,
    bverify,
    hybrid_decrypt,
    keygen,
    record_hash,
    ring_verify,
    unblind,
)
from verivote.sigkit.schnorr import verify as schnorr_verify
from verivote.utils.randomness import RandomSource

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EAPublic:
    signing: GroupElement
    encryption: GroupElement


@dataclass(frozen=True)
class EAKeys:
    signing: KeyPair
    encryption: KeyPair

    @classmethod
    def generate(cls, ctx: GroupContext, rng: RandomSource) -> "EAKeys":
        return cls(keygen(ctx, rng), keygen(ctx, rng))

    def public(self) -> EAPublic:
        return EAPublic(self.signing.public, self.encryption.public)


class FlagReason(Enum):
    DECRYPTION_FAILED = "decryption_failed"
    MALFORMED_RECORD = "malformed_record"
    UNKNOWN_TOKEN = "unknown_token"
    AUDITED_TOKEN = "audited_token"
    RID_MISMATCH = "rid_mismatch"
    COMMITMENT_MISMATCH = "commitment_mismatch"
    TOKEN_SIGNATURE = "token_signature"
    VOTE_OUT_OF_RANGE = "vote_out_of_range"
    PROOF_MISMATCH = "proof_mismatch"
    RECORD_HASH_MISMATCH = "record_hash_mismatch"
    RECEIPT_SIGNATURE = "receipt_signature"
    RECORD_SIGNATURE = "record_signature"
    ACK_SIGNATURE = "ack_signature"
    KEY_NOT_IN_BB0 = "key_not_in_bb0"
    DUPLICATE_KEY = "duplicate_key"
    DUPLICATE_RID_COMMITMENT = "duplicate_rid_commitment"
    RID_PROXIMITY = "rid_proximity"


@dataclass(frozen=True)
class AuditFlag:
    record: str
    reason: FlagReason
    detail: str = ""

    def to_dict(self) -> dict:
        return {"record": self.record, "reason": self.reason.value, "detail": self.detail}


@dataclass(frozen=True)
class EARecord:
    """A decrypted record that passed every check"""
    brid: bytes
    rid: Scalar
    r_I: Scalar
    v: int
    r_v: Scalar
    w: int
    h: RecordHash
    record_signature: GroupSignature
    sigma_ack: UnblindedSignature
    c_rid: Commitment
    c_v: Commitment

    @property
    def rho(self) -> Scalar:
        return self.rid + self.v

    @property
    def combined(self) -> Commitment:
        return combine(self.c_rid, self.c_v)

    def combined_opening(self) -> Opening:
        return Opening(self.rho, self.r_I + self.r_v)

    def rid_opening(self) -> Opening:
        return Opening(self.rid, self.r_I)


class EAStore:
    """Accepted records indexed by C_rid and by C_rid * C_v, plus the audit pile"""

    def __init__(self, m: int):
        self.m = m
        self.records: List[EARecord] = []
        self.flags: List[AuditFlag] = []
        self.flagged_records: List[str] = []
        self._by_combined: Dict[Commitment, EARecord] = {}
        self._by_rid_commitment: Dict[Commitment, EARecord] = {}

    def add(self, record: EARecord):
        self.records.append(record)
        self._by_combined[record.combined] = record
        self._by_rid_commitment[record.c_rid] = record

    def remove(self, record: EARecord):
        self.records.remove(record)
        self._by_combined.pop(record.combined, None)
        if self._by_rid_commitment.get(record.c_rid) is record:
            self._by_rid_commitment.pop(record.c_rid)

    def lookup_combined(self, commitment: Commitment) -> Optional[EARecord]:
        return self._by_combined.get(commitment)

    def lookup_rid_commitment(self, c_rid: Commitment) -> Optional[EARecord]:
        return self._by_rid_commitment.get(c_rid)

    def __len__(self) -> int:
        return len(self.records)


def rid_proximity_pairs(rids: Sequence[int], m: int, q: int) -> List[Tuple[int, int]]:
    """
    Index pairs of rids closer than m to each other on the cycle Z_q.

    Sorting makes this O(N log N): if no two neighbours are within m, no
    pair is.
    """
    if len(rids) < 2:
        return []
    order = sorted(range(len(rids)), key=lambda i: rids[i])
    pairs = []
    for a, b in zip(order, order[1:]):
        if rids[b] - rids[a] < m:
            pairs.append((a, b))
    first, last = order[0], order[-1]
    if rids[first] + q - rids[last] < m and (first, last) not in pairs:
        pairs.append((last, first))
    return pairs


def _check_record(ctx: GroupContext, s: SessionRecord, issued: IssuedToken, envelope: EncryptedRecordEnvelope,
                  ea_public: GroupElement, evm_ring: Sequence[GroupElement], bb0_keys: set, m: int,
                  audited: set) -> Tuple[List[Tuple[FlagReason, str]], Optional[UnblindedSignature]]:
    problems: List[Tuple[FlagReason, str]] = []

    if issued.token_id in audited:
        problems.append((FlagReason.AUDITED_TOKEN, "an audited token was voted with"))
    if s.rid != issued.rid:
        problems.append((FlagReason.RID_MISMATCH, "rid differs from the issued token"))
    if s.c_rid != issued.c_rid or s.c_u != issued.c_u:
        problems.append((FlagReason.COMMITMENT_MISMATCH, "token commitments differ from the issued token"))
    if commit(ctx, s.rid, s.r_I) != s.c_rid or commit(ctx, s.u, s.r_u) != s.c_u:
        problems.append((FlagReason.COMMITMENT_MISMATCH, "token commitment does not open"))
    if not schnorr_verify(ctx, ea_public, token_payload(s.c_rid, s.c_u), s.token_signature):
        problems.append((FlagReason.TOKEN_SIGNATURE, "token signature invalid"))

    if not 0 <= s.v < m:
        problems.append((FlagReason.VOTE_OUT_OF_RANGE, f"v={s.v}"))
        return problems, None

    if commit(ctx, ctx.scalar(s.v), s.r_v) != s.c_v:
        problems.append((FlagReason.COMMITMENT_MISMATCH, "vote commitment does not open"))
    proof_ok = (
        s.w == s.u.value + s.v
        and s.w_prime == s.w % m
        and s.r_w == s.r_u + s.r_v
        and combine(s.c_u, s.c_v) == commit(ctx, ctx.scalar(s.w), s.r_w)
    )
    if not proof_ok:
        problems.append((FlagReason.PROOF_MISMATCH, "vote proof inconsistent"))
    if s.h != record_hash(s.rid, s.v, m):
        problems.append((FlagReason.RECORD_HASH_MISMATCH, "h does not match (rid, v)"))
    if not ring_verify(ctx, evm_ring, receipt_payload(s.c_rid.to_bytes(), s.c_v.to_bytes(), s.w, s.w_prime),
                       s.receipt_signature):
        problems.append((FlagReason.RECEIPT_SIGNATURE, "receipt ring signature invalid"))
    if not ring_verify(ctx, evm_ring, record_payload(s.h), s.record_signature):
        problems.append((FlagReason.RECORD_SIGNATURE, "record ring signature invalid"))

    sigma_ack = unblind(ctx, envelope.sigma_ack_blinded, issued.blinding, issued.p_ik)
    if not bverify(ctx, issued.p_ik, s.rid, sigma_ack):
        problems.append((FlagReason.ACK_SIGNATURE, "acknowledgment does not verify"))
    if issued.p_ik.to_bytes() not in bb0_keys:
        problems.append((FlagReason.KEY_NOT_IN_BB0, "ephemeral key not published on BB0"))
    return problems, sigma_ack


def ea_ingest(ctx: GroupContext, envelopes: Iterable[EncryptedRecordEnvelope], ea_keys: EAKeys,
              bb0: Sequence[BB0Row], registry: TokenRegistry, evm_ring: Sequence[GroupElement],
              m: int) -> Tuple[EAStore, List[AuditFlag]]:
    """
    Decrypt, verify and index every collected record.

    Returns:
        The store of accepted records and the list of audit flags. A
        flagged record never reaches the store.
    """
    store = EAStore(m)
    bb0_keys = {row.key.to_bytes() for row in bb0}
    candidates: List[Tuple[str, EARecord, GroupElement]] = []
    rejected: Dict[str, List[AuditFlag]] = {}

    for position, envelope in enumerate(envelopes):
        label = envelope.brid.hex()[:16] or f"#{position}"
        try:
            plaintext = hybrid_decrypt(ctx, ea_keys.encryption.secret, envelope.ciphertext)
        except DecryptionError as exc:
            rejected.setdefault(label, []).append(AuditFlag(label, FlagReason.DECRYPTION_FAILED, str(exc)))
            continue
        try:
            s = SessionRecord.from_bytes(ctx, plaintext)
        except ProtocolError as exc:
            rejected.setdefault(label, []).append(AuditFlag(label, FlagReason.MALFORMED_RECORD, str(exc)))
            continue
        issued = registry.lookup(envelope.brid)
        if issued is None:
            rejected.setdefault(label, []).append(AuditFlag(label, FlagReason.UNKNOWN_TOKEN, "brid not issued"))
            continue

        problems, sigma_ack = _check_record(ctx, s, issued, envelope, ea_keys.signing.public, evm_ring,
                                            bb0_keys, m, registry.audited)
        if problems:
            rejected.setdefault(label, []).extend(AuditFlag(label, reason, detail) for reason, detail in problems)
            continue
        record = EARecord(
            brid=envelope.brid, rid=s.rid, r_I=s.r_I, v=s.v, r_v=s.r_v, w=s.w, h=s.h,
            record_signature=s.record_signature, sigma_ack=sigma_ack, c_rid=s.c_rid, c_v=s.c_v,
        )
        candidates.append((label, record, issued.p_ik))

    # cross-record checks
    seen_keys: Dict[bytes, str] = {}
    seen_c_rid: Dict[Commitment, str] = {}
    for label, record, key in candidates:
        key_bytes = key.to_bytes()
        if key_bytes in seen_keys:
            for who in (label, seen_keys[key_bytes]):
                rejected.setdefault(who, []).append(AuditFlag(who, FlagReason.DUPLICATE_KEY, "ephemeral key reused"))
        else:
            seen_keys[key_bytes] = label
        if record.c_rid in seen_c_rid:
            for who in (label, seen_c_rid[record.c_rid]):
                rejected.setdefault(who, []).append(
                    AuditFlag(who, FlagReason.DUPLICATE_RID_COMMITMENT, "C_rid appears twice"))
        else:
            seen_c_rid[record.c_rid] = label

    for a, b in rid_proximity_pairs([rec.rid.value for _, rec, _ in candidates], m, ctx.q):
        for who in (candidates[a][0], candidates[b][0]):
            rejected.setdefault(who, []).append(
                AuditFlag(who, FlagReason.RID_PROXIMITY, f"rids {candidates[a][0]} and {candidates[b][0]} within {m}"))

    for label, record, _ in candidates:
        if label not in rejected:
            store.add(record)

    flags = [flag for group in rejected.values() for flag in group]
    store.flags = flags
    store.flagged_records = sorted(rejected)
    if flags:
        logger.warning(f"Ingest flagged {len(rejected)} records for internal audit")
    logger.info(f"Ingested {len(store)} records")
    return store, flags


@dataclass(frozen=True)
class BB3Row:
    rid: Scalar
    v: int
    rho: Scalar
    h: RecordHash
    mu_h: GroupSignature
    sigma_ack: UnblindedSignature


@dataclass(frozen=True)
class BB2Row:
    c_rid: Commitment
    w: int


def publish_bb3(store: EAStore, include_bb2: bool = True) -> Tuple[List[BB3Row], Optional[List[BB2Row]]]:
    """BB3 sorted by rid; BB2 sorted by serialized C_rid, or None when disabled"""
    bb3 = [
        BB3Row(rec.rid, rec.v, rec.rho, rec.h, rec.record_signature, rec.sigma_ack)
        for rec in sorted(store.records, key=lambda r: r.rid.value)
    ]
    bb2 = None
    if include_bb2:
        bb2 = [BB2Row(rec.c_rid, rec.w) for rec in sorted(store.records, key=lambda r: r.c_rid.to_bytes())]
    return bb3, bb2


@dataclass(frozen=True)
class IndividualProofRequest:
    """The commitment pair a voter sends over the anonymous channel"""
    c_rid: Commitment
    c_v: Commitment

    @property
    def combined(self) -> Commitment:
        return combine(self.c_rid, self.c_v)

    def key(self) -> bytes:
        return self.c_rid.to_bytes() + self.c_v.to_bytes()


@dataclass(frozen=True)
class FirstMove:
    V: GroupElement
    a: TargetElement
    D: GroupElement


@dataclass
class _PendingProof:
    phi: ProverState
    psi: ProverState


class EAProver:
    """Answers individual-verification requests from the authority's store"""

    def __init__(self, ctx: GroupContext, store: EAStore):
        self.ctx = ctx
        self.store = store
        self._pending: Dict[bytes, _PendingProof] = {}

    def _record(self, request: IndividualProofRequest) -> EARecord:
        if self.store.lookup_rid_commitment(request.c_rid) is None:
            raise UnknownRecordError("no record for this C_rid", field="c_rid")
        record = self.store.lookup_combined(request.combined)
        if record is None or record.c_rid != request.c_rid:
            raise UnknownRecordError("C_v does not match the record for this C_rid", field="c_v")
        return record

    def begin(self, request: IndividualProofRequest, phi: VerifierPublic, psi: VerifierPublic,
              rng: RandomSource) -> Tuple[FirstMove, FirstMove]:
        """
        First moves of the two membership proofs: C_rid * C_v opens into Phi
        and C_rid opens into Psi.

        Raises:
            UnknownRecordError: If the pair is not indexed (a missing vote)
            NotInSetError: If a committed value is absent from a published set
        """
        record = self._record(request)
        V1, a1, D1, phi_state = prove_first(self.ctx, record.combined_opening(), phi, rng)
        V2, a2, D2, psi_state = prove_first(self.ctx, record.rid_opening(), psi, rng)
        self._pending[request.key()] = _PendingProof(phi_state, psi_state)
        return FirstMove(V1, a1, D1), FirstMove(V2, a2, D2)

    def finish(self, request: IndividualProofRequest, c_phi: Scalar, c_psi: Scalar) -> Tuple[Responses, Responses]:
        pending = self._pending.pop(request.key(), None)
        if pending is None:
            raise UnknownRecordError("no proof in progress for this commitment pair")
        return respond(pending.phi, c_phi), respond(pending.psi, c_psi)
