"""End-to-end runs of the in-memory election pipeline."""

import pytest

from verivote.config import ElectionConfig
from verivote.services.election_runner import ElectionRunner, draw_votes, voting_pool
from verivote.storage.formats import dump_board
from verivote.utils.parallel_executor import ExecutionMode
from verivote.validators.individual_validator import IndividualStatus


def board_text(outcome, name):
    return dump_board(outcome.ctx, name, outcome.config.m, getattr(outcome.artifacts(), name))


def test_same_seed_same_boards(small_config, small_election):
    again = ElectionRunner(small_config).run(verify_individual=False)
    for name in ("bb0", "bb1", "bb2", "bb3"):
        assert board_text(again, name) == board_text(small_election, name)
    assert again.individual == {}
    assert again.universal.verified_fraction is None


def test_parallel_booths_match_sequential(small_config, small_election):
    config = small_config.model_copy(update={"execution_mode": ExecutionMode.PARALLEL})
    parallel = ElectionRunner(config).run(verify_individual=False)
    assert board_text(parallel, "bb3") == board_text(small_election, "bb3")
    assert parallel.result == small_election.result


def test_other_seed_other_boards(small_config, small_election):
    config = small_config.model_copy(update={"seed": "another-election"})
    other = ElectionRunner(config).run(verify_individual=False)
    assert other.universal.passed
    assert board_text(other, "bb3") != board_text(small_election, "bb3")


def test_audited_tokens_are_retired(small_election):
    audit = small_election.audit
    assert audit.passed
    assert {b: len(ids) for b, ids in audit.audited.items()} == {1: 2, 2: 2}
    pool = voting_pool(small_election.batch, audit.audited)
    assert all(len(tokens) == 10 for tokens in pool.values())
    assert not set(audit.audited_ids()) & {t.token_id for tokens in pool.values() for t in tokens}


def test_voters_are_numbered_from_one(small_election):
    keys = [voter.key for voter in small_election.voters]
    assert keys == [(b, i) for b in (1, 2) for i in range(1, 7)]
    assert all(voter.recorded and voter.error is None for voter in small_election.voters)


def test_weighted_votes():
    config = ElectionConfig.build(booths=1, voters_per_booth=4, candidates=3, seed="weights", vote_weights=[0, 1, 0])
    assert draw_votes(config) == {1: [1, 1, 1, 1]}
    outcome = ElectionRunner(config).run(verify_individual=False)
    assert outcome.result.counts == [0, 4, 0]


def test_lost_acknowledgments_drop_records():
    config = ElectionConfig.build(booths=1, voters_per_booth=8, candidates=2, seed="lossy", ack_loss_rate=0.5)
    outcome = ElectionRunner(config).run()

    recorded = [v for v in outcome.voters if v.recorded]
    unacknowledged = [v for v in outcome.voters if v.receipt is not None and not v.acknowledged]
    assert outcome.result.total == len(recorded)
    assert outcome.result.counts == outcome.ground_truth_tally()
    assert outcome.universal.passed
    for voter in unacknowledged:
        assert outcome.individual[voter.key].status == IndividualStatus.MISSING
    for voter in recorded:
        assert outcome.individual[voter.key].status == IndividualStatus.VERIFIED
    assert outcome.universal.verified_fraction == pytest.approx(len(recorded) / len(outcome.voters))
    assert len(outcome.ledgers[1].discarded) == len(unacknowledged)
