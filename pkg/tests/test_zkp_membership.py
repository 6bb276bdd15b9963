"""Tests for the set-membership proof."""

import itertools
import time
from collections import Counter

import pytest

from verivote.services.commitments import Commitment, Opening, commit, commit_random
from verivote.services.zkp_membership import (
    DuplicateSetElementError,
    MembershipError,
    NotInSetError,
    ProverRandomness,
    Responses,
    Transcript,
    check_transcript,
    extract_opening,
    prove_first,
    prove_noninteractive,
    respond,
    run_interactive,
    setup_verifier,
    simulate_transcript,
    verify_noninteractive,
    verify_transcript,
)

SET = [3, 10, 42, 77, 1000]


@pytest.fixture
def verifier(ctx, rng):
    return setup_verifier(ctx, [ctx.scalar(v) for v in SET], rng)


def test_member_is_accepted(ctx, rng, verifier):
    c, opening = commit_random(ctx, ctx.scalar(42), rng)
    assert run_interactive(ctx, c, opening, verifier, rng)


def test_non_member_cannot_form_a_first_move(ctx, rng, verifier):
    c, opening = commit_random(ctx, ctx.scalar(43), rng)
    with pytest.raises(NotInSetError):
        prove_first(ctx, opening, verifier.public(), rng)
    assert not run_interactive(ctx, c, opening, verifier, rng)


def test_proof_is_bound_to_the_commitment(ctx, rng, verifier):
    c, opening = commit_random(ctx, ctx.scalar(10), rng)
    other, _ = commit_random(ctx, ctx.scalar(10), rng)
    public = verifier.public()
    V, a, D, state = prove_first(ctx, opening, public, rng)
    challenge = ctx.random_scalar(rng)
    responses = respond(state, challenge)
    assert verify_transcript(ctx, public, c, V, a, D, challenge, responses)
    assert not verify_transcript(ctx, public, other, V, a, D, challenge, responses)


def test_identity_blinded_signature_is_rejected(ctx, rng, verifier):
    c, opening = commit_random(ctx, ctx.scalar(3), rng)
    public = verifier.public()
    _, a, D, state = prove_first(ctx, opening, public, rng)
    challenge = ctx.random_scalar(rng)
    assert not verify_transcript(ctx, public, c, ctx.identity, a, D, challenge, respond(state, challenge))


def test_duplicate_set_element(ctx, rng):
    with pytest.raises(DuplicateSetElementError):
        setup_verifier(ctx, [ctx.scalar(1), ctx.scalar(1)], rng)


def test_explicit_secret_colliding_with_set(ctx, rng):
    with pytest.raises(MembershipError):
        setup_verifier(ctx, [ctx.scalar(5)], rng, x=-ctx.scalar(5))


def test_noninteractive_transcript_round_trips(ctx, rng, verifier):
    c, opening = commit_random(ctx, ctx.scalar(77), rng)
    public = verifier.public()
    transcript = prove_noninteractive(ctx, c, opening, public, rng)
    decoded = Transcript.from_bytes(ctx, transcript.to_bytes(ctx))
    assert decoded == transcript
    assert verify_noninteractive(ctx, public, c, decoded)


def test_transcript_from_another_context_rejected(toy_ctx, ctx, rng, verifier):
    c, opening = commit_random(ctx, ctx.scalar(77), rng)
    transcript = prove_noninteractive(ctx, c, opening, verifier.public(), rng)
    with pytest.raises(MembershipError):
        Transcript.from_bytes(toy_ctx, transcript.to_bytes(ctx))


def test_simulated_transcripts_accept_for_their_challenge(ctx, rng, verifier):
    # zero knowledge: anyone can produce accepting transcripts without an opening
    public = verifier.public()
    c = Commitment(ctx.g ** ctx.random_scalar(rng))
    challenge = ctx.random_scalar(rng)
    forged = simulate_transcript(ctx, public, c, challenge, rng)
    assert verify_transcript(ctx, public, c, forged.V, forged.a, forged.D, challenge, forged.responses)


def test_two_challenges_extract_the_opening(ctx, rng, verifier):
    c, opening = commit_random(ctx, ctx.scalar(1000), rng)
    public = verifier.public()
    V, a, D, state = prove_first(ctx, opening, public, rng)
    c1, c2 = ctx.scalar(5), ctx.scalar(9)
    z1, z2 = respond(state, c1), respond(state, c2)
    t1 = Transcript(V, a, D, c1, z1.z_rho, z1.z_v, z1.z_r)
    t2 = Transcript(V, a, D, c2, z2.z_rho, z2.z_v, z2.z_r)

    witness = extract_opening(t1, t2)
    assert witness.opening == opening
    with pytest.raises(MembershipError):
        extract_opening(t1, t1)


@pytest.mark.slow
def test_large_set_setup_and_proof(ctx, rng):
    setup = setup_verifier(ctx, [ctx.scalar(i) for i in range(10_000)], rng)
    assert len(setup.public()) == 10_000
    c, opening = commit_random(ctx, ctx.scalar(9_999), rng)
    assert run_interactive(ctx, c, opening, setup, rng)


class TestToyZeroKnowledge:
    """At q = 11 every transcript can be enumerated"""

    @pytest.fixture
    def toy_proof(self, toy_ctx, rng):
        ctx = toy_ctx
        public = setup_verifier(ctx, [ctx.scalar(1), ctx.scalar(4)], rng, x=ctx.scalar(3)).public()
        opening = Opening(ctx.scalar(4), ctx.scalar(6))
        return public, commit(ctx, opening.message, opening.randomness), opening

    def real_transcripts(self, ctx, public, opening, c, rng):
        seen = Counter()
        for v, s, t, mm in itertools.product(range(1, ctx.q), range(ctx.q), range(ctx.q), range(ctx.q)):
            randomness = ProverRandomness(ctx.scalar(v), ctx.scalar(s), ctx.scalar(t), ctx.scalar(mm))
            V, a, D, state = prove_first(ctx, opening, public, rng, randomness=randomness)
            z = respond(state, c)
            seen[Transcript(V, a, D, c, z.z_rho, z.z_v, z.z_r).to_bytes(ctx)] += 1
        return seen

    def simulated_transcripts(self, ctx, public, C, c, rng):
        seen = Counter()
        for omega, z_rho, z_v, z_r in itertools.product(range(1, ctx.q), range(ctx.q), range(ctx.q), range(ctx.q)):
            responses = Responses(ctx.scalar(z_rho), ctx.scalar(z_v), ctx.scalar(z_r))
            forged = simulate_transcript(ctx, public, C, c, rng, omega=ctx.scalar(omega), responses=responses)
            seen[forged.to_bytes(ctx)] += 1
        return seen

    def test_simulator_matches_real_distribution(self, toy_ctx, rng, toy_proof):
        ctx = toy_ctx
        public, C, opening = toy_proof
        c = ctx.scalar(7)
        real = self.real_transcripts(ctx, public, opening, c, rng)
        simulated = self.simulated_transcripts(ctx, public, C, c, rng)
        assert sum(real.values()) == sum(simulated.values()) == 10 * 11**3
        assert real == simulated

    @pytest.mark.slow
    def test_simulator_matches_for_every_challenge(self, toy_ctx, rng, toy_proof):
        ctx = toy_ctx
        public, C, opening = toy_proof
        real, simulated = Counter(), Counter()
        for c in range(ctx.q):
            real.update(self.real_transcripts(ctx, public, opening, ctx.scalar(c), rng))
            simulated.update(self.simulated_transcripts(ctx, public, C, ctx.scalar(c), rng))
        assert real == simulated
        assert all(check_transcript(ctx, public, C, Transcript.from_bytes(ctx, t)) for t in real)


def test_honest_proofs_are_always_accepted(ctx, rng, verifier):
    accepted = 0
    for _ in range(1000):
        c, opening = commit_random(ctx, ctx.scalar(SET[rng.randbelow(len(SET))]), rng)
        accepted += run_interactive(ctx, c, opening, verifier, rng)
    assert accepted == 1000


@pytest.mark.slow
def test_proof_time_does_not_grow_with_the_set(ctx, rng):
    def per_proof(size):
        setup = setup_verifier(ctx, [ctx.scalar(i) for i in range(size)], rng)
        c, opening = commit_random(ctx, ctx.scalar(size - 1), rng)
        batches = []
        for _ in range(7):
            start = time.perf_counter()
            for _ in range(50):
                assert run_interactive(ctx, c, opening, setup, rng)
            batches.append((time.perf_counter() - start) / 50)
        return min(batches)

    small, large = per_proof(10), per_proof(10_000)
    assert max(small, large) / min(small, large) < 1.5
