"""Tests for the authority's ingest, internal audit and board publication."""

from dataclasses import replace

import pytest

from verivote.services.base import UnknownRecordError
from verivote.services.commitments import commit_random
from verivote.services.election_authority import (
    EAProver,
    FlagReason,
    IndividualProofRequest,
    ea_ingest,
    publish_bb3,
    rid_proximity_pairs,
)
from verivote.services.tokens import TokenRegistry, token_id_for


def copy_registry(registry):
    copy = TokenRegistry()
    for brid, issued in registry.items():
        copy.register(brid, issued)
    copy.audited = set(registry.audited)
    return copy


def ingest(outcome, envelopes, registry=None, bb0=None):
    setup = outcome.setup
    return ea_ingest(setup.ctx, envelopes, setup.ea_keys, outcome.batch.bb0 if bb0 is None else bb0,
                     copy_registry(outcome.batch.registry) if registry is None else registry, setup.evm_ring, outcome.config.m)


def reasons_for(flags, brid):
    label = brid.hex()[:16]
    return {flag.reason for flag in flags if flag.record == label}


class TestRidProximity:
    def test_neighbours_within_m(self):
        assert rid_proximity_pairs([0, 100, 103], 5, 1000) == [(1, 2)]

    def test_pairs_wrap_around_the_cycle(self):
        assert rid_proximity_pairs([2, 500, 998], 5, 1000) == [(2, 0)]

    def test_distance_m_is_allowed(self):
        assert rid_proximity_pairs([10, 15, 20], 5, 1000) == []

    def test_fewer_than_two_rids(self):
        assert rid_proximity_pairs([], 5, 1000) == []
        assert rid_proximity_pairs([7], 5, 1000) == []


class TestIngest:
    def test_honest_election_has_no_flags(self, small_election):
        publication = small_election.publication
        assert publication.flags == []
        assert len(publication.store) == len(small_election.envelopes) == 12

    def test_boards_are_sorted(self, small_election):
        bb3, bb2 = small_election.publication.bb3, small_election.publication.bb2
        assert [row.rid.value for row in bb3] == sorted(row.rid.value for row in bb3)
        assert [row.c_rid.to_bytes() for row in bb2] == sorted(row.c_rid.to_bytes() for row in bb2)
        assert all(row.rho == row.rid + row.v for row in bb3)

    def test_bb2_can_be_disabled(self, small_election):
        bb3, bb2 = publish_bb3(small_election.publication.store, include_bb2=False)
        assert bb2 is None
        assert bb3 == small_election.publication.bb3

    def test_unknown_tokens_are_flagged(self, small_election):
        store, flags = ingest(small_election, small_election.envelopes, registry=TokenRegistry())
        assert len(store) == 0
        assert {flag.reason for flag in flags} == {FlagReason.UNKNOWN_TOKEN}

    def test_audited_token_is_flagged(self, small_election):
        envelopes = small_election.envelopes
        registry = copy_registry(small_election.batch.registry)
        registry.mark_audited(token_id_for(envelopes[0].brid))

        store, flags = ingest(small_election, envelopes, registry=registry)
        assert reasons_for(flags, envelopes[0].brid) == {FlagReason.AUDITED_TOKEN}
        assert len(store) == len(envelopes) - 1

    def test_undecryptable_record_is_flagged(self, small_election):
        envelopes = list(small_election.envelopes)
        ct = envelopes[3].ciphertext
        envelopes[3] = replace(envelopes[3], ciphertext=replace(ct, body=bytes([ct.body[0] ^ 1]) + ct.body[1:]))

        store, flags = ingest(small_election, envelopes)
        assert reasons_for(flags, envelopes[3].brid) == {FlagReason.DECRYPTION_FAILED}
        assert len(store) == len(envelopes) - 1

    def test_swapped_acknowledgment_is_flagged(self, small_election):
        envelopes = list(small_election.envelopes)
        envelopes[0] = replace(envelopes[0], sigma_ack_blinded=envelopes[1].sigma_ack_blinded)

        store, flags = ingest(small_election, envelopes)
        assert FlagReason.ACK_SIGNATURE in reasons_for(flags, envelopes[0].brid)
        assert reasons_for(flags, envelopes[1].brid) == set()

    def test_duplicated_record_flags_both_copies(self, small_election):
        envelopes = list(small_election.envelopes) + [small_election.envelopes[5]]
        store, flags = ingest(small_election, envelopes)
        reasons = reasons_for(flags, envelopes[5].brid)
        assert {FlagReason.DUPLICATE_KEY, FlagReason.DUPLICATE_RID_COMMITMENT} <= reasons
        assert len(store) == len(small_election.envelopes) - 1

    def test_key_missing_from_bb0_is_flagged(self, small_election):
        issued = small_election.batch.registry.lookup(small_election.envelopes[2].brid)
        bb0 = [row for row in small_election.batch.bb0 if row.key != issued.p_ik]

        store, flags = ingest(small_election, small_election.envelopes, bb0=bb0)
        assert reasons_for(flags, small_election.envelopes[2].brid) == {FlagReason.KEY_NOT_IN_BB0}

    def test_flag_serialization(self, small_election):
        _, flags = ingest(small_election, small_election.envelopes, registry=TokenRegistry())
        entry = flags[0].to_dict()
        assert entry["reason"] == "unknown_token"
        assert set(entry) == {"record", "reason", "detail"}


class TestStoreIndex:
    def test_records_are_indexed_by_rid_commitment(self, small_election):
        store = small_election.publication.store
        for record in store.records:
            assert store.lookup_rid_commitment(record.c_rid) is record
            assert store.lookup_combined(record.combined) is record

    def test_removed_record_leaves_both_indexes(self, small_election):
        store, _ = ingest(small_election, small_election.envelopes)
        record = store.records[0]
        store.remove(record)
        assert store.lookup_rid_commitment(record.c_rid) is None
        assert store.lookup_combined(record.combined) is None
        assert len(store) == 11

    def test_prover_tells_unknown_rid_from_wrong_vote_commitment(self, rng, small_election):
        ctx = small_election.ctx
        store = small_election.publication.store
        prover = EAProver(ctx, store)
        first, second = store.records[:2]
        stray, _ = commit_random(ctx, ctx.scalar(1), rng)

        with pytest.raises(UnknownRecordError, match="no record for this C_rid"):
            prover.begin(IndividualProofRequest(stray, first.c_v), None, None, rng)
        with pytest.raises(UnknownRecordError, match="C_v does not match"):
            prover.begin(IndividualProofRequest(first.c_rid, second.c_v), None, None, rng)



@pytest.mark.parametrize("rids,expected", [([1, 3], [(0, 1)]), ([3, 1], [(1, 0)])])
def test_proximity_pairs_follow_sorted_order(rids, expected):
    assert rid_proximity_pairs(rids, 5, 1000) == expected
