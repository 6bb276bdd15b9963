"""Tests for the polling officer, the EVM session and booth close."""

from types import SimpleNamespace

import pytest

from verivote.services.base import (
    AcknowledgmentDeclinedError,
    PhaseOrderError,
    ProtocolError,
    TokenNotFreshError,
    TokenRejectedError,
    UnknownRecordError,
    booth_count_payload,
    booth_hash_payload,
)
from verivote.services.booth import close_booth
from verivote.services.commitments import Commitment, commit
from verivote.services.election_authority import EAKeys
from verivote.services.evm import EVM, AckChannel, SessionPhase, VvpatBox, evm_session
from verivote.services.polling_officer import PollingOfficer
from verivote.services.tokens import Token, TokenChit, TokenCommitments, TokenSecrets, generate_tokens, token_payload
from verivote.sigkit import BlindingFactor, EphemeralPublic, blind, keygen, ring_verify, xor_fold
from verivote.sigkit.schnorr import sign
from verivote.validators.receipt_validator import verify_receipt_local

M = 5


@pytest.fixture
def booth(ctx, rng):
    ea = EAKeys.generate(ctx, rng)
    officer = PollingOfficer.create(ctx, 1, 6, rng)
    other_officer = PollingOfficer.create(ctx, 2, 1, rng)
    evm_keys = [keygen(ctx, rng) for _ in range(2)]
    ring = [k.public for k in evm_keys]
    evm = EVM(ctx, 1, evm_keys[0], ring, ea.signing.public, ea.encryption.public, M, VvpatBox())
    batch = generate_tokens(ctx, ea.signing, [officer.public()], 4, M, rng)
    return SimpleNamespace(
        ea=ea,
        officer=officer,
        po_ring=[officer.keys.public, other_officer.keys.public],
        evm=evm,
        ring=ring,
        tokens=batch.tokens[1],
    )


def token_with_u(ctx, booth, u, nonce_index, rng):
    """A correctly signed token whose u is chosen by the test"""
    rid = ctx.random_scalar(rng, nonzero=True)
    r_I, r_u = ctx.random_scalar(rng), ctx.random_scalar(rng)
    c_rid, c_u = commit(ctx, rid, r_I), commit(ctx, ctx.scalar(u), r_u)
    signature = sign(ctx, booth.ea.signing, token_payload(c_rid, c_u), rng)
    r_p = ctx.random_scalar(rng, nonzero=True)
    p_ik = booth.officer.keys.public ** r_p
    blinding = BlindingFactor.random(ctx, rng)
    public = EphemeralPublic(p_ik, booth.officer.public().nonce_commitment(nonce_index))
    brid = blind(ctx, rid, blinding, public)
    return Token(
        booth.officer.booth,
        TokenCommitments(c_rid, c_u, signature),
        TokenSecrets(r_I, r_u, rid, ctx.scalar(u), u % M, brid, blinding, p_ik),
        TokenChit(r_p, brid, nonce_index),
    )


def vote(booth, token, v, rng, channel=None, **kwargs):
    booth.officer.po_desk(token.chit)
    channel = channel or AckChannel(booth.officer.acknowledge)
    return evm_session(booth.evm, v, token.commitments, token.secrets, channel, rng, **kwargs)


class TestVotingSession:
    def test_honest_session(self, ctx, rng, booth):
        token = booth.tokens[0]
        u = token.secrets.u.value
        outcome = vote(booth, token, 3, rng)

        proof = outcome.receipt.evm_receipt.proof
        assert outcome.acknowledged
        assert proof.w == u + 3
        assert proof.w_prime == (u % M + 3) % M
        assert token.secrets.destroyed
        assert len(booth.evm.records) == 1
        assert booth.officer.acknowledged_count == 1
        assert booth.evm.vvpat.vvpat_tally(M) == [0, 0, 0, 1, 0]
        assert verify_receipt_local(ctx, outcome.receipt, booth.ea.signing.public, booth.ring, M).passed

    def test_worked_example(self, ctx, rng, booth):
        token = token_with_u(ctx, booth, 9, 5, rng)
        outcome = vote(booth, token, 3, rng)
        proof = outcome.receipt.evm_receipt.proof
        assert (proof.w, proof.w_prime) == (12, 2)
        assert outcome.receipt.evm_receipt.c_v.element * token.commitments.c_u.element == \
            commit(ctx, ctx.scalar(12), proof.r_w).element

    def test_forged_receipt_fails_local_check(self, ctx, rng, booth):
        outcome = vote(booth, booth.tokens[0], 1, rng)
        evm_receipt = outcome.receipt.evm_receipt
        forged = type(outcome.receipt)(
            outcome.receipt.token_remnant,
            type(evm_receipt)(evm_receipt.c_rid, Commitment(evm_receipt.c_v.element * ctx.g),
                              evm_receipt.proof, evm_receipt.signature),
        )
        report = verify_receipt_local(ctx, forged, booth.ea.signing.public, booth.ring, M)
        assert not report.passed
        assert "receipt-signature" in report.failed_checks

    def test_token_cannot_be_scanned_before_the_vote(self, rng, booth):
        token = booth.tokens[0]
        session = booth.evm.start_session(rng)
        with pytest.raises(PhaseOrderError):
            session.scan_token(token.commitments, token.secrets)
        assert not token.secrets.destroyed

    def test_one_session_at_a_time(self, rng, booth):
        session = booth.evm.start_session(rng)
        session.cast_vote(0)
        with pytest.raises(PhaseOrderError):
            booth.evm.start_session(rng)

    def test_vote_out_of_range(self, rng, booth):
        session = booth.evm.start_session(rng)
        with pytest.raises(ProtocolError):
            session.cast_vote(M)

    def test_declined_acknowledgment_stores_nothing(self, rng, booth):
        with pytest.raises(AcknowledgmentDeclinedError):
            vote(booth, booth.tokens[0], 2, rng, voter_check=lambda u_prime, v, w_prime: False)
        assert booth.evm.records == []
        assert booth.evm.flags == ["voter declined acknowledgment"]
        assert booth.evm.vvpat.vvpat_tally(M) == [0] * M

    def test_malformed_token_is_rejected_and_destroyed(self, ctx, rng, booth):
        token = booth.tokens[1]
        bad = TokenCommitments(token.commitments.c_rid, Commitment(token.commitments.c_u.element * ctx.g),
                               token.commitments.signature)
        booth.officer.po_desk(token.chit)
        session = booth.evm.start_session(rng)
        session.cast_vote(1)
        with pytest.raises(TokenRejectedError):
            session.scan_token(bad, token.secrets)
        assert session.phase == SessionPhase.ABORTED
        assert token.secrets.destroyed
        assert booth.evm.records == []


class TestPollingOfficer:
    def test_chit_is_used_once(self, booth):
        booth.officer.po_desk(booth.tokens[0].chit)
        with pytest.raises(TokenNotFreshError):
            booth.officer.po_desk(booth.tokens[0].chit)

    def test_retired_tokens_are_refused(self, booth):
        booth.officer.retire([booth.tokens[2].token_id])
        assert booth.tokens[2].token_id in booth.officer.retired
        with pytest.raises(TokenNotFreshError):
            booth.officer.po_desk(booth.tokens[2].chit)

    def test_identity_must_be_verified(self, booth):
        with pytest.raises(TokenRejectedError):
            booth.officer.po_desk(booth.tokens[0].chit, identity_verified=False)

    def test_acknowledgments_need_an_open_slot(self, booth):
        with pytest.raises(UnknownRecordError):
            booth.officer.acknowledge(booth.tokens[0].chit.brid)
        booth.officer.po_desk(booth.tokens[0].chit)
        booth.officer.acknowledge(booth.tokens[0].chit.brid)
        with pytest.raises(ProtocolError):
            booth.officer.acknowledge(booth.tokens[0].chit.brid)


class TestAckChannel:
    def test_lossy_channel_needs_randomness(self, booth):
        with pytest.raises(ValueError):
            AckChannel(booth.officer.acknowledge, loss_rate=0.5)

    def test_lost_acknowledgment_discards_the_record(self, rng, booth):
        channel = AckChannel(booth.officer.acknowledge, loss_rate=1.0, rng=rng)
        outcome = vote(booth, booth.tokens[0], 4, rng, channel=channel)
        assert not outcome.acknowledged
        assert channel.lost == [outcome.record.brid]

        ledger, row = close_booth(booth.evm, booth.officer.printouts, booth.officer, booth.po_ring, rng)
        assert len(ledger.records) == 1
        assert ledger.acknowledged == []
        assert row.count == 0
        assert any(flag.startswith("record without acknowledgment discarded") for flag in ledger.flags)


class TestBoothClose:
    def test_close_signs_count_and_aggregate(self, ctx, rng, booth):
        for token, v in zip(booth.tokens[:3], (0, 2, 2)):
            vote(booth, token, v, rng)
        ledger, row = close_booth(booth.evm, booth.officer.printouts, booth.officer, booth.po_ring, rng)

        assert row.count == 3
        assert ledger.flags == []
        assert row.aggregate == xor_fold(r.h for r in booth.evm.records)
        assert ring_verify(ctx, booth.ring, booth_hash_payload(1, row.aggregate), row.aggregate_signature)
        assert ring_verify(ctx, booth.po_ring, booth_count_payload(1, 3), row.count_signature)
        assert not ring_verify(ctx, booth.po_ring, booth_count_payload(1, 4), row.count_signature)

    def test_printout_without_record_is_flagged(self, rng, booth):
        vote(booth, booth.tokens[0], 1, rng)
        booth.officer.po_desk(booth.tokens[1].chit)
        booth.officer.acknowledge(booth.tokens[1].chit.brid)
        ledger, row = close_booth(booth.evm, booth.officer.printouts, booth.officer, booth.po_ring, rng)
        assert row.count == 1
        assert any(flag.startswith("acknowledgment without a stored record") for flag in ledger.flags)

    def test_officer_count_differing_from_ledger_is_flagged(self, ctx, rng, booth):
        vote(booth, booth.tokens[0], 1, rng)
        booth.officer.po_desk(booth.tokens[1].chit)
        booth.officer.acknowledge(booth.tokens[1].chit.brid)
        ledger, row = close_booth(booth.evm, booth.officer.printouts, booth.officer, booth.po_ring, rng)

        assert row.count == 1
        assert "officer signed N_k=2 but 1 acknowledgments matched" in ledger.flags
        assert not ring_verify(ctx, booth.po_ring, booth_count_payload(1, row.count), row.count_signature)

    def test_printouts_withheld_from_close_are_flagged(self, ctx, rng, booth):
        for token, v in zip(booth.tokens[:2], (0, 1)):
            vote(booth, token, v, rng)
        ledger, row = close_booth(booth.evm, booth.officer.printouts[:1], booth.officer, booth.po_ring, rng)
        assert row.count == 1
        assert "officer signed N_k=2 but 1 acknowledgments matched" in ledger.flags
