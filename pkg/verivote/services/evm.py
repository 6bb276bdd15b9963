"""
Electronic voting machine and the voting session state machine.

A session moves through

    IDLE -> VOTE_COMMITTED -> TOKEN_SCANNED -> PROOF_PRINTED -> COMPLETE
                                                             -> ABORTED

C_v is committed and printed before any token data is read, so the
machine's vote commitment cannot depend on the token. After the voter
accepts the w' check the machine stores <brid, h, enc(s)> and the voter's
acknowledgment travels to the polling officer over a separate channel.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

from verivote.groups import GroupContext, GroupElement, GroupError, Scalar
from verivote.services.base import (
    AcknowledgmentDeclinedError,
    PhaseOrderError,
    ProtocolError,
    TokenRejectedError,
    booth_hash_payload,
    receipt_payload,
    record_payload,
)
from verivote.services.commitments import Commitment, commit
from verivote.services.polling_officer import AckPrintout
from verivote.services.tokens import TokenCommitments, TokenSecrets, token_payload
from verivote.sigkit import (
    BlindedSignature,
    GroupSignature,
    HybridCiphertext,
    KeyPair,
    RecordHash,
    SchnorrSignature,
    SignatureError,
    hybrid_encrypt,
    record_hash,
    ring_sign,
)
from verivote.sigkit.schnorr import verify as schnorr_verify
from verivote.utils.encoding import EncodingError, bytes_to_int, int_to_bytes, pack_fields, small_int, unpack_fields
from verivote.utils.randomness import RandomSource

logger = logging.getLogger(__name__)


class SessionPhase(Enum):
    IDLE = "idle"
    VOTE_COMMITTED = "vote_committed"
    TOKEN_SCANNED = "token_scanned"
    PROOF_PRINTED = "proof_printed"
    COMPLETE = "complete"
    ABORTED = "aborted"


@dataclass(frozen=True)
class VoteProof:
    """P = (w, w', r_w) with w = u + v unreduced"""
    w: int
    w_prime: int
    r_w: Scalar


@dataclass(frozen=True)
class EvmReceipt:
    c_rid: Commitment
    c_v: Commitment
    proof: VoteProof
    signature: GroupSignature


@dataclass(frozen=True)
class VoterReceipt:
    """What the voter walks out with: the token remnant and the EVM receipt"""
    token_remnant: TokenCommitments
    evm_receipt: EvmReceipt


@dataclass(frozen=True)
class SessionRecord:
    """Plaintext s encrypted to the election authority"""
    rid: Scalar
    r_I: Scalar
    u: Scalar
    r_u: Scalar
    v: int
    r_v: Scalar
    c_rid: Commitment
    c_u: Commitment
    token_signature: SchnorrSignature
    c_v: Commitment
    w: int
    w_prime: int
    r_w: Scalar
    receipt_signature: GroupSignature
    h: RecordHash
    record_signature: GroupSignature

    def to_bytes(self) -> bytes:
        return pack_fields(
            self.rid.to_bytes(), self.r_I.to_bytes(), self.u.to_bytes(), self.r_u.to_bytes(),
            small_int(self.v), self.r_v.to_bytes(),
            self.c_rid.to_bytes(), self.c_u.to_bytes(), self.token_signature.to_bytes(),
            self.c_v.to_bytes(), int_to_bytes(self.w, 64), small_int(self.w_prime), self.r_w.to_bytes(),
            self.receipt_signature.to_bytes(), self.h.to_bytes(), self.record_signature.to_bytes(),
        )

    @classmethod
    def from_bytes(cls, ctx: GroupContext, data: bytes) -> "SessionRecord":
        """
        Raises:
            ProtocolError: If the plaintext does not parse
        """
        try:
            (rid, r_I, u, r_u, v, r_v, c_rid, c_u, token_sig, c_v, w, w_prime, r_w,
             receipt_sig, h, record_sig) = unpack_fields(data, expected=16)
            return cls(
                rid=ctx.scalar_from_bytes(rid),
                r_I=ctx.scalar_from_bytes(r_I),
                u=ctx.scalar_from_bytes(u),
                r_u=ctx.scalar_from_bytes(r_u),
                v=bytes_to_int(v),
                r_v=ctx.scalar_from_bytes(r_v),
                c_rid=Commitment.from_bytes(ctx, c_rid),
                c_u=Commitment.from_bytes(ctx, c_u),
                token_signature=SchnorrSignature.from_bytes(ctx, token_sig),
                c_v=Commitment.from_bytes(ctx, c_v),
                w=bytes_to_int(w),
                w_prime=bytes_to_int(w_prime),
                r_w=ctx.scalar_from_bytes(r_w),
                receipt_signature=GroupSignature.from_bytes(ctx, receipt_sig),
                h=RecordHash(h),
                record_signature=GroupSignature.from_bytes(ctx, record_sig),
            )
        except (EncodingError, GroupError, SignatureError) as exc:
            raise ProtocolError(f"malformed session record: {exc}") from exc


@dataclass
class EncryptedRecord:
    """<brid, h, enc(s)> held by the EVM; the acknowledgment is attached at close"""
    brid: bytes
    h: RecordHash
    ciphertext: HybridCiphertext
    ack: Optional[BlindedSignature] = None


class VvpatBox:
    """Optional paper trail: (rid, v) slips with no link to voters"""

    def __init__(self):
        self.slips: List[Tuple[Scalar, int]] = []

    def drop(self, rid: Scalar, v: int):
        self.slips.append((rid, v))

    def vvpat_tally(self, m: int) -> List[int]:
        counts = [0] * m
        for _, v in self.slips:
            counts[v] += 1
        return counts


class VotingSession:
    """One voter at one EVM"""

    def __init__(self, evm: "EVM", rng: RandomSource):
        self.evm = evm
        self.rng = rng
        self.phase = SessionPhase.IDLE
        self._v: Optional[int] = None
        self._r_v: Optional[Scalar] = None
        self._c_v: Optional[Commitment] = None
        self._token: Optional[TokenCommitments] = None
        self._scanned: Optional[dict] = None
        self._receipt: Optional[EvmReceipt] = None

    def _require(self, phase: SessionPhase, action: str):
        if self.phase != phase:
            raise PhaseOrderError(f"cannot {action} in phase {self.phase.value}", field="phase",
                                  value=self.phase.value)

    def cast_vote(self, v: int) -> Commitment:
        """Commit to the vote and print C_v"""
        self._require(SessionPhase.IDLE, "cast a vote")
        m = self.evm.m
        if not 0 <= v < m:
            raise ProtocolError(f"vote {v} outside [0, {m})", field="v", value=v)
        ctx = self.evm.ctx
        self._v = v
        self._r_v = ctx.random_scalar(self.rng)
        self._c_v = commit(ctx, ctx.scalar(v), self._r_v)
        self.phase = SessionPhase.VOTE_COMMITTED
        return self._c_v

    def scan_token(self, commitments: TokenCommitments, secrets: TokenSecrets):
        """
        Read the token and destroy its secrets part.

        Raises:
            PhaseOrderError: If C_v has not been printed yet
            TokenDestroyedError: If the secrets part was already scanned
            TokenRejectedError: If the signature or an opening does not check
        """
        self._require(SessionPhase.VOTE_COMMITTED, "scan a token")
        try:
            scanned = {
                "rid": secrets.rid, "r_I": secrets.r_I, "u": secrets.u, "r_u": secrets.r_u,
                "u_prime": secrets.u_prime, "brid": secrets.brid,
            }
        finally:
            if not secrets.destroyed:
                secrets.destroy()

        ctx, m = self.evm.ctx, self.evm.m
        failure = None
        if not schnorr_verify(ctx, self.evm.ea_public, token_payload(commitments.c_rid, commitments.c_u),
                              commitments.signature):
            failure = "token signature"
        elif commit(ctx, scanned["rid"], scanned["r_I"]) != commitments.c_rid:
            failure = "rid commitment"
        elif commit(ctx, scanned["u"], scanned["r_u"]) != commitments.c_u:
            failure = "u commitment"
        elif scanned["u_prime"] != scanned["u"].value % m:
            failure = "u' residue"
        if failure is not None:
            self.phase = SessionPhase.ABORTED
            self.evm.flag(f"token rejected: {failure}")
            raise TokenRejectedError(f"token rejected: {failure} does not verify", field=failure)

        self._token = commitments
        self._scanned = scanned
        self.phase = SessionPhase.TOKEN_SCANNED

    def print_proof(self) -> EvmReceipt:
        self._require(SessionPhase.TOKEN_SCANNED, "print the proof")
        evm = self.evm
        u = self._scanned["u"]
        w = u.value + self._v
        proof = VoteProof(w=w, w_prime=w % evm.m, r_w=self._scanned["r_u"] + self._r_v)
        signature = evm.ring_sign(receipt_payload(self._token.c_rid.to_bytes(), self._c_v.to_bytes(),
                                                  proof.w, proof.w_prime), self.rng)
        self._receipt = EvmReceipt(self._token.c_rid, self._c_v, proof, signature)
        self.phase = SessionPhase.PROOF_PRINTED
        return self._receipt

    def confirm(self, accepted: bool) -> EncryptedRecord:
        """
        Record the vote once the voter accepts the w' check.

        Raises:
            AcknowledgmentDeclinedError: If the voter declines; nothing is stored
        """
        self._require(SessionPhase.PROOF_PRINTED, "confirm")
        evm = self.evm
        if not accepted:
            self.phase = SessionPhase.ABORTED
            self._clear()
            evm.flag("voter declined acknowledgment")
            raise AcknowledgmentDeclinedError("voter declined the w' check; vote not recorded")

        s = self._scanned
        h = record_hash(s["rid"], self._v, evm.m)
        record = SessionRecord(
            rid=s["rid"], r_I=s["r_I"], u=s["u"], r_u=s["r_u"], v=self._v, r_v=self._r_v,
            c_rid=self._token.c_rid, c_u=self._token.c_u, token_signature=self._token.signature,
            c_v=self._c_v, w=self._receipt.proof.w, w_prime=self._receipt.proof.w_prime,
            r_w=self._receipt.proof.r_w, receipt_signature=self._receipt.signature,
            h=h, record_signature=evm.ring_sign(record_payload(h), self.rng),
        )
        ciphertext = hybrid_encrypt(evm.ctx, evm.ea_encryption_public, record.to_bytes(), self.rng)
        stored = EncryptedRecord(s["brid"], h, ciphertext)
        evm.store(stored)
        if evm.vvpat is not None:
            evm.vvpat.drop(s["rid"], self._v)
        self.phase = SessionPhase.COMPLETE
        self._clear()
        return stored

    def _clear(self):
        self._scanned = None
        self._v = None
        self._r_v = None


class EVM:
    def __init__(self, ctx: GroupContext, booth: int, keys: KeyPair, ring: Sequence[GroupElement],
                 ea_public: GroupElement, ea_encryption_public: GroupElement, m: int,
                 vvpat: Optional[VvpatBox] = None):
        self.ctx = ctx
        self.booth = booth
        self.keys = keys
        self.ring = tuple(ring)
        self.ring_index = self.ring.index(keys.public)
        self.ea_public = ea_public
        self.ea_encryption_public = ea_encryption_public
        self.m = m
        self.vvpat = vvpat
        self.records: List[EncryptedRecord] = []
        self.flags: List[str] = []
        self._active: Optional[VotingSession] = None

    def start_session(self, rng: RandomSource) -> VotingSession:
        if self._active is not None and self._active.phase not in (SessionPhase.COMPLETE, SessionPhase.ABORTED):
            raise PhaseOrderError("a voting session is already in progress", field="phase")
        self._active = VotingSession(self, rng)
        return self._active

    def store(self, record: EncryptedRecord):
        self.records.append(record)

    def flag(self, reason: str):
        logger.warning(f"Booth {self.booth} flagged: {reason}")
        self.flags.append(reason)

    def ring_sign(self, message: bytes, rng: RandomSource) -> GroupSignature:
        return ring_sign(self.ctx, self.ring, self.ring_index, self.keys.secret, message, rng)

    def sign_booth_hash(self, aggregate: RecordHash, rng: RandomSource) -> GroupSignature:
        return self.ring_sign(booth_hash_payload(self.booth, aggregate), rng)


class AckChannel:
    """Voter-to-officer acknowledgment path, independent of the EVM"""

    def __init__(self, deliver: Callable[[bytes], AckPrintout], loss_rate: float = 0.0,
                 rng: Optional[RandomSource] = None):
        if loss_rate and rng is None:
            raise ValueError("a lossy channel needs a random source")
        self.deliver = deliver
        self.loss_rate = loss_rate
        self.rng = rng
        self.lost: List[bytes] = []

    def send(self, brid: bytes) -> Optional[AckPrintout]:
        if self.loss_rate and self.rng.random() < self.loss_rate:
            self.lost.append(brid)
            return None
        return self.deliver(brid)


VoterCheck = Callable[[int, int, int], bool]


def honest_voter_check(m: int) -> VoterCheck:
    """The voter accepts iff w' == (u' + v) mod m"""
    return lambda u_prime, v, w_prime: w_prime == (u_prime + v) % m


@dataclass
class SessionOutcome:
    receipt: VoterReceipt
    record: EncryptedRecord
    acknowledged: bool = field(default=True)


def evm_session(evm: EVM, v: int, commitments: TokenCommitments, secrets: TokenSecrets,
                po_channel: AckChannel, rng: RandomSource,
                voter_check: Optional[VoterCheck] = None) -> SessionOutcome:
    """
    Drive one complete session in protocol order.

    The voter reads u' off the token before handing the secrets part to
    the machine. If the voter accepts, the acknowledgment goes both to the
    EVM (confirm) and, separately, to the polling officer.

    Raises:
        TokenRejectedError: If the token does not verify
        AcknowledgmentDeclinedError: If the voter rejects the proof
    """
    check = voter_check or honest_voter_check(evm.m)
    session = evm.start_session(rng)
    session.cast_vote(v)
    u_prime = int(secrets.u_prime_text())
    session.scan_token(commitments, secrets)
    evm_receipt = session.print_proof()
    record = session.confirm(check(u_prime, v, evm_receipt.proof.w_prime))
    printout = po_channel.send(record.brid)
    return SessionOutcome(VoterReceipt(commitments, evm_receipt), record, acknowledged=printout is not None)
