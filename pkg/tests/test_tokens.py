"""Tests for token pre-generation and token audits."""

import pytest

from verivote.constants import (
    REFERENCE_ELEMENT_WIDTH,
    REFERENCE_SCALAR_WIDTH,
    REFERENCE_SIGNATURE_WIDTH,
    TOKEN_PART_MAX_BYTES,
)
from verivote.groups import WireWidths
from verivote.services.base import ProtocolError, TokenDestroyedError
from verivote.services.commitments import Commitment
from verivote.services.polling_officer import PollingOfficer
from verivote.services.tokens import (
    Token,
    TokenCommitments,
    audit_token,
    audit_uniqueness,
    generate_tokens,
    token_part_sizes,
)
from verivote.sigkit import keygen

M = 5


@pytest.fixture
def officers(ctx, rng):
    return [PollingOfficer.create(ctx, booth, 4, rng) for booth in (1, 2)]


@pytest.fixture
def ea_keys(ctx, rng):
    return keygen(ctx, rng)


@pytest.fixture
def batch(ctx, rng, officers, ea_keys):
    return generate_tokens(ctx, ea_keys, [po.public() for po in officers], 3, M, rng)


def test_batch_layout(batch):
    assert sorted(batch.tokens) == [1, 2]
    assert all(len(tokens) == 3 for tokens in batch.tokens.values())
    assert len(batch.registry) == 6
    assert len(batch.bb0) == 6


def test_bb0_lists_every_ephemeral_key(batch):
    keys = {row.key for row in batch.bb0}
    assert keys == {t.secrets.p_ik for t in batch.all_tokens()}


def test_tokens_use_consecutive_nonces(batch):
    assert [t.chit.nonce_index for t in batch.tokens[1]] == [0, 1, 2]


def test_honest_tokens_pass_audit(ctx, batch, officers, ea_keys):
    for token in batch.tokens[1]:
        report = audit_token(ctx, token, ea_keys.public, officers[0].public(), M, batch.registry)
        assert report.passed, report.failed_checks
    assert batch.registry.audited == {t.token_id for t in batch.tokens[1]}
    assert audit_uniqueness(batch.all_tokens()).passed


def test_shifted_commitment_fails_audit(ctx, batch, officers, ea_keys):
    token = batch.tokens[1][0]
    bad = Token(
        token.booth,
        TokenCommitments(token.commitments.c_rid, Commitment(token.commitments.c_u.element * ctx.g),
                         token.commitments.signature),
        token.secrets.copy(),
        token.chit,
    )
    report = audit_token(ctx, bad, ea_keys.public, officers[0].public(), M)
    assert set(report.failed_checks) == {"u-opening", "token-signature"}


def test_audit_against_wrong_officer_fails(ctx, batch, officers, ea_keys):
    report = audit_token(ctx, batch.tokens[1][0], ea_keys.public, officers[1].public(), M)
    assert "ephemeral-key" in report.failed_checks


def test_duplicated_token_fails_uniqueness(batch):
    tokens = batch.all_tokens() + [batch.tokens[2][1].duplicate()]
    report = audit_uniqueness(tokens)
    assert set(report.failed_checks) == {"unique-rid", "unique-rid-commitment", "unique-chit"}


def test_destroyed_secrets_cannot_be_read(batch):
    secrets = batch.tokens[1][0].secrets.copy()
    secrets.destroy()
    assert secrets.destroyed
    with pytest.raises(TokenDestroyedError):
        secrets.rid
    assert repr(secrets) == "TokenSecrets(<destroyed>)"


def test_token_round_trips_through_bytes(ctx, batch):
    token = batch.tokens[2][2]
    decoded = Token.from_bytes(ctx, token.to_bytes(), token.booth)
    assert decoded.token_id == token.token_id
    assert decoded.commitments == token.commitments
    assert decoded.secrets.rid == token.secrets.rid


def test_truncated_token_rejected(ctx, batch):
    data = batch.tokens[1][0].to_bytes()
    with pytest.raises(ProtocolError):
        Token.from_bytes(ctx, data[:-3], 1)


def test_printed_parts_match_wire_sizes(ctx, batch):
    sizes = token_part_sizes(ctx.widths())
    token = batch.tokens[1][0]
    assert len(token.commitments.to_bytes()) == sizes["commitments"]
    assert len(token.secrets.to_bytes()) == sizes["secrets"]
    assert len(token.chit.to_bytes()) == sizes["chit"]


def test_reference_sizes_fit_on_a_printed_token():
    sizes = token_part_sizes(WireWidths(REFERENCE_ELEMENT_WIDTH, REFERENCE_SCALAR_WIDTH, REFERENCE_SIGNATURE_WIDTH))
    assert sizes == {"commitments": 780, "secrets": 432, "chit": 56}
    assert all(size <= TOKEN_PART_MAX_BYTES for size in sizes.values())


def test_more_tokens_than_nonces_rejected(ctx, rng, officers, ea_keys):
    with pytest.raises(ProtocolError):
        generate_tokens(ctx, ea_keys, [officers[0].public()], 5, M, rng)


def test_single_candidate_rejected(ctx, rng, officers, ea_keys):
    with pytest.raises(ProtocolError):
        generate_tokens(ctx, ea_keys, [officers[0].public()], 1, 1, rng)
