"""Individual and universal verification, honest and under attack."""

from types import SimpleNamespace

import pytest

from verivote.config import ElectionConfig
from verivote.security.tamper import (
    BOARD_ATTACKS,
    AttackKind,
    ElectionArtifacts,
    InapplicableAttackError,
    collapse_replayed,
    reissue_token,
    tamper,
)
from verivote.services.commitments import commit_random
from verivote.services.election_authority import EAProver, FlagReason, IndividualProofRequest
from verivote.services.election_runner import (
    ElectionRunner,
    close_booths,
    collect,
    issue_tokens,
    poll_booth,
    publish,
    setup_election,
    verify_receipts,
    verify_voters,
)
from verivote.services.tally import TallyResult
from verivote.services.tokens import BB0Row, audit_token, audit_uniqueness
from verivote.utils.randomness import DeterministicRandom
from verivote.validators.individual_validator import IndividualStatus, VerifierSetupCache, individual_verify
from verivote.validators.receipt_validator import verify_bb2_entry, verify_receipt_local
from verivote.validators.universal_validator import UNIVERSAL_CHECKS, universal_verify


def verify_boards(outcome, artifacts, published_tally=None):
    setup = outcome.setup
    return universal_verify(setup.ctx, artifacts.bb0, artifacts.bb1, artifacts.bb2, artifacts.bb3,
                            setup.evm_ring, setup.po_ring, outcome.config.m, published_tally=published_tally)


def voter_with_rid(outcome, rid):
    return next(v for v in outcome.voters if v.rid.value == rid)


class TestHonestElection:
    def test_universal_verification_passes(self, small_election):
        report = small_election.universal
        assert report.passed, report.to_lines()
        assert [check.name for check in report.checks] == list(UNIVERSAL_CHECKS)
        assert report.recount == small_election.result
        assert report.verified_fraction == 1.0

    def test_every_voter_verifies(self, small_election):
        assert len(small_election.individual) == 12
        assert all(result.status == IndividualStatus.VERIFIED for result in small_election.individual.values())

    def test_receipts_check_locally_and_on_bb2(self, small_election):
        setup = small_election.setup
        for voter in small_election.voters:
            report = verify_receipt_local(setup.ctx, voter.receipt, setup.ea_keys.signing.public, setup.evm_ring,
                                          small_election.config.m)
            assert report.passed, report.failed_checks
            assert verify_bb2_entry(voter.receipt, small_election.publication.bb2)

    def test_wrong_published_tally_fails_recount(self, small_election):
        counts = list(small_election.result.counts)
        counts[0] += 1
        report = verify_boards(small_election, small_election.artifacts(), TallyResult(counts, 13))
        assert report.failed_checks == ["tally-recount"]

    def test_unknown_commitments_are_missing(self, ctx, rng, small_election):
        c_rid, _ = commit_random(ctx, ctx.scalar(5), rng)
        c_v, _ = commit_random(ctx, ctx.scalar(1), rng)
        prover = EAProver(ctx, small_election.publication.store)
        result = individual_verify(ctx, IndividualProofRequest(c_rid, c_v), prover,
                                   small_election.publication.bb3, rng, VerifierSetupCache())
        assert result.status == IndividualStatus.MISSING
        assert not result

    def test_verifier_setups_are_shared(self, ctx, rng, small_election):
        cache = VerifierSetupCache()
        prover = EAProver(ctx, small_election.publication.store)
        for voter in small_election.voters[:3]:
            receipt = voter.receipt.evm_receipt
            assert individual_verify(ctx, IndividualProofRequest(receipt.c_rid, receipt.c_v), prover,
                                     small_election.publication.bb3, rng, cache)
        assert len(cache) == 2


class TestBoardAttacks:
    @pytest.mark.parametrize("attack", BOARD_ATTACKS, ids=lambda a: a.value)
    def test_attack_fails_its_expected_checks(self, small_election, attack):
        rng = DeterministicRandom(b"tamper-tests", attack.value)
        mutated, delta = tamper(small_election.ctx, small_election.artifacts(), attack, small_election.config.m, rng)
        report = verify_boards(small_election, mutated)
        assert not report.passed
        assert set(delta.expected_checks) <= set(report.failed_checks)

    @pytest.mark.parametrize("attack", [AttackKind.DELETE_ROW, AttackKind.ALTER_VOTE, AttackKind.COLLIDE_RID])
    def test_victim_fails_individual_verification(self, small_election, attack):
        rng = DeterministicRandom(b"tamper-tests", f"victim/{attack.value}")
        mutated, delta = tamper(small_election.ctx, small_election.artifacts(), attack, small_election.config.m,
                                rng, target=4)
        assert delta.victim_must_fail
        victim = voter_with_rid(small_election, delta.victim_rid)

        results = verify_receipts(small_election.ctx, {victim.key: victim.receipt},
                                  small_election.publication.store, mutated.bb3, small_election.config)
        assert results[victim.key].status == IndividualStatus.PROOF_FAILED

    def test_honest_artifacts_are_untouched(self, small_election):
        artifacts = small_election.artifacts()
        rng = DeterministicRandom(b"tamper-tests", "copy")
        tamper(small_election.ctx, artifacts, AttackKind.DELETE_ROW, small_election.config.m, rng)
        assert len(artifacts.bb3) == 12

    def test_target_out_of_range(self, small_election):
        rng = DeterministicRandom(b"tamper-tests", "range")
        with pytest.raises(InapplicableAttackError):
            tamper(small_election.ctx, small_election.artifacts(), AttackKind.ALTER_VOTE, small_election.config.m,
                   rng, target=12)

    def test_token_attack_needs_tokens(self, small_election):
        rng = DeterministicRandom(b"tamper-tests", "no-tokens")
        with pytest.raises(InapplicableAttackError):
            tamper(small_election.ctx, small_election.artifacts(), AttackKind.REPLAY_TOKEN,
                   small_election.config.m, rng)


class TestTokenAttacks:
    @pytest.fixture(scope="class")
    def printed(self, small_config):
        setup = setup_election(small_config)
        batch = issue_tokens(setup, small_config)
        return setup, batch

    def artifacts(self, batch):
        return ElectionArtifacts(bb0=list(batch.bb0), bb1=[], bb2=None, bb3=[], tokens=batch.tokens)

    def test_replayed_token_fails_uniqueness(self, printed, small_config):
        setup, batch = printed
        rng = DeterministicRandom(b"tamper-tests", "replay")
        mutated, delta = tamper(setup.ctx, self.artifacts(batch), AttackKind.REPLAY_TOKEN, small_config.m, rng)
        tokens = [t for booth in sorted(mutated.tokens) for t in mutated.tokens[booth]]
        report = audit_uniqueness(tokens)
        assert set(report.failed_checks) == set(delta.expected_checks)

    def test_malformed_token_fails_audit(self, printed, small_config):
        setup, batch = printed
        rng = DeterministicRandom(b"tamper-tests", "malform")
        mutated, delta = tamper(setup.ctx, self.artifacts(batch), AttackKind.MALFORM_TOKEN, small_config.m, rng)
        booth, token = next((b, t) for b in mutated.tokens for t in mutated.tokens[b] if t.token_id == delta.target)
        report = audit_token(setup.ctx, token, setup.ea_keys.signing.public, setup.officers[booth].public(),
                             small_config.m)
        assert set(report.failed_checks) == set(delta.expected_checks)


class TestReusedRid:
    """Two voters hold tokens sharing rid, C_rid and u under different chits"""

    def run_booth(self, config, votes):
        setup = setup_election(config)
        batch = issue_tokens(setup, config)
        tokens = list(batch.tokens[1])
        rng = DeterministicRandom(b"reused-rid", repr(votes))
        clone, issued = reissue_token(setup.ctx, setup.ea_keys.signing, setup.officers[1].public(), tokens[0],
                                      tokens[1].chit.nonce_index, config.m, rng)
        batch.registry.register(clone.chit.brid, issued)
        batch.bb0.append(BB0Row(issued.p_ik))
        tokens[1] = clone
        uniqueness = audit_uniqueness(tokens)

        polled = poll_booth(setup, 1, tokens[:2], votes, config)
        ledgers, _ = close_booths(setup, {1: (polled.evm, polled.officer)}, config)
        return SimpleNamespace(setup=setup, batch=batch, voters=polled.voters, uniqueness=uniqueness,
                               envelopes=collect(ledgers, config))

    def collude(self, run, config):
        setup = run.setup
        return collapse_replayed(setup.ctx, run.envelopes, setup.ea_keys, run.batch.bb0, run.batch.registry,
                                 setup.evm_ring, config.m)

    def test_clone_shares_commitments_but_not_chit(self, small_config):
        run = self.run_booth(small_config, [2, 2])
        assert set(run.uniqueness.failed_checks) == {"unique-rid", "unique-rid-commitment"}
        assert run.voters[0].rid == run.voters[1].rid
        assert all(voter.recorded for voter in run.voters)

    def test_honest_authority_flags_both_records(self, small_config):
        run = self.run_booth(small_config, [2, 2])
        publication = publish(run.setup, run.envelopes, run.batch, small_config)
        assert len(publication.store) == 0
        for envelope in run.envelopes:
            label = envelope.brid.hex()[:16]
            assert FlagReason.DUPLICATE_RID_COMMITMENT in {f.reason for f in publication.flags if f.record == label}

    def test_equal_votes_both_verify_against_one_row(self, small_config):
        run = self.run_booth(small_config, [2, 2])
        store, bb3 = self.collude(run, small_config)
        assert len(store) == 2
        assert len(bb3) == 1

        results = verify_voters(run.setup.ctx, run.voters, store, bb3, small_config)
        assert [result.status for _, result in sorted(results.items())] == [IndividualStatus.VERIFIED] * 2

    def test_different_votes_leave_one_voter_failing(self, small_config):
        run = self.run_booth(small_config, [0, 1])
        store, bb3 = self.collude(run, small_config)
        assert len(bb3) == 1

        results = verify_voters(run.setup.ctx, run.voters, store, bb3, small_config)
        by_vote = {voter.v: results[voter.key] for voter in run.voters}
        assert by_vote[bb3[0].v].status == IndividualStatus.VERIFIED
        dropped = by_vote[1 - bb3[0].v]
        assert dropped.status == IndividualStatus.PROOF_FAILED
        assert not dropped.phi_accepted


@pytest.mark.slow
class TestRandomizedTrials:
    TRIALS = 100

    @pytest.mark.parametrize("attack", BOARD_ATTACKS, ids=lambda a: a.value)
    def test_board_attack_is_caught_in_every_trial(self, small_election, attack):
        missed = []
        for trial in range(self.TRIALS):
            rng = DeterministicRandom(b"tamper-trials", f"{attack.value}/{trial}")
            mutated, delta = tamper(small_election.ctx, small_election.artifacts(), attack,
                                    small_election.config.m, rng)
            report = verify_boards(small_election, mutated)
            caught = set(delta.expected_checks) <= set(report.failed_checks)
            if delta.victim_must_fail:
                victim = voter_with_rid(small_election, delta.victim_rid)
                results = verify_receipts(small_election.ctx, {victim.key: victim.receipt},
                                          small_election.publication.store, mutated.bb3, small_election.config)
                caught = caught and results[victim.key].status == IndividualStatus.PROOF_FAILED
            if not caught:
                missed.append(trial)
        assert missed == []

    @pytest.mark.parametrize("attack", [AttackKind.REPLAY_TOKEN, AttackKind.MALFORM_TOKEN], ids=lambda a: a.value)
    def test_token_attack_is_caught_in_every_trial(self, small_config, attack):
        setup = setup_election(small_config)
        batch = issue_tokens(setup, small_config)
        honest = ElectionArtifacts(bb0=list(batch.bb0), bb1=[], bb2=None, bb3=[], tokens=batch.tokens)
        missed = []
        for trial in range(self.TRIALS):
            rng = DeterministicRandom(b"tamper-trials", f"{attack.value}/{trial}")
            mutated, delta = tamper(setup.ctx, honest, attack, small_config.m, rng)
            if attack == AttackKind.REPLAY_TOKEN:
                report = audit_uniqueness([t for b in sorted(mutated.tokens) for t in mutated.tokens[b]])
            else:
                booth, token = next((b, t) for b in mutated.tokens for t in mutated.tokens[b]
                                    if t.token_id == delta.target)
                report = audit_token(setup.ctx, token, setup.ea_keys.signing.public,
                                     setup.officers[booth].public(), small_config.m)
            if set(report.failed_checks) != set(delta.expected_checks):
                missed.append(trial)
        assert missed == []

    def test_honest_elections_raise_no_alarm(self):
        alarms = []
        for trial in range(50):
            config = ElectionConfig.build(booths=2, voters_per_booth=4, candidates=3, seed=f"honest-{trial}",
                                          audit_fraction=0.25)
            outcome = ElectionRunner(config).run()
            clean = (
                outcome.universal.passed
                and outcome.audit.passed
                and outcome.publication.flags == []
                and all(result.status == IndividualStatus.VERIFIED for result in outcome.individual.values())
                and list(outcome.result.counts) == outcome.ground_truth_tally()
            )
            if not clean:
                alarms.append(trial)
        assert alarms == []
