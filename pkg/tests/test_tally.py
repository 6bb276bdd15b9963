"""Tests for counting BB3."""

import pytest

from verivote.services.election_authority import BB3Row
from verivote.services.tally import InvalidBoardError, TallyResult, tally
from verivote.sigkit import record_hash


def rows(ctx, votes):
    return [
        BB3Row(ctx.scalar(10 * (i + 1)), v, ctx.scalar(10 * (i + 1) + v), record_hash(ctx.scalar(10 * (i + 1)), v),
               mu_h=None, sigma_ack=None)
        for i, v in enumerate(votes)
    ]


def test_counts_per_candidate(ctx):
    result = tally(rows(ctx, [0, 1, 1, 4]), 5)
    assert result == TallyResult([1, 2, 0, 0, 1], 4)
    assert result.m == 5


def test_empty_board(ctx):
    assert tally([], 3) == TallyResult([0, 0, 0], 0)


def test_vote_out_of_range(ctx):
    with pytest.raises(InvalidBoardError):
        tally(rows(ctx, [0, 5]), 5)


def test_tally_lines():
    assert TallyResult([2, 0, 1], 3).to_lines() == ["candidate 0: 2", "candidate 1: 0", "candidate 2: 1", "total: 3"]


def test_small_election_tally_matches_ground_truth(small_election):
    assert small_election.result.counts == small_election.ground_truth_tally()
    assert small_election.result.total == 12
    assert small_election.vvpat_tally() == small_election.result.counts
