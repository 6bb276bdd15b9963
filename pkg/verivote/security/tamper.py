"""
Single-attack tampering of election artifacts.

Each attack mutates a copy of the published boards (or the printed tokens)
and returns the ground-truth delta: which checks a correct verifier must
flag and whose individual verification must fail.

reissue_token and collapse_replayed play a colluding authority that hands
two voters the same rid under different chits and merges their rows.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from verivote.errors import VerivoteError
from verivote.groups import GroupContext, GroupElement
from verivote.services.base import PollingOfficerPublic
from verivote.services.booth import BB1Row
from verivote.services.commitments import Commitment
from verivote.services.election_authority import BB2Row, BB3Row, EAKeys, EAStore, ea_ingest, publish_bb3
from verivote.services.shuffler import EncryptedRecordEnvelope
from verivote.services.tokens import BB0Row, IssuedToken, Token, TokenCommitments, TokenRegistry, print_token
from verivote.services.zkp_membership import (
    VerifierPublic,
    simulate_transcript,
    verify_transcript,
)
from verivote.sigkit import KeyPair, record_hash
from verivote.utils.randomness import RandomSource

logger = logging.getLogger(__name__)


class InapplicableAttackError(VerivoteError):
    """Raised when the artifacts are too small or lack the part an attack needs"""
    pass


class AttackKind(str, Enum):
    INJECT_ROW = "inject_row"
    DELETE_ROW = "delete_row"
    ALTER_VOTE = "alter_vote"
    REPLAY_TOKEN = "replay_token"
    MALFORM_TOKEN = "malform_token"
    COLLIDE_RID = "collide_rid"
    DROP_ACK = "drop_ack"


BOARD_ATTACKS = (
    AttackKind.INJECT_ROW,
    AttackKind.DELETE_ROW,
    AttackKind.ALTER_VOTE,
    AttackKind.COLLIDE_RID,
    AttackKind.DROP_ACK,
)


@dataclass
class ElectionArtifacts:
    bb0: List[BB0Row]
    bb1: List[BB1Row]
    bb2: Optional[List[BB2Row]]
    bb3: List[BB3Row]
    tokens: Optional[Dict[int, List[Token]]] = None

    def copy(self) -> "ElectionArtifacts":
        return ElectionArtifacts(
            bb0=list(self.bb0),
            bb1=list(self.bb1),
            bb2=list(self.bb2) if self.bb2 is not None else None,
            bb3=list(self.bb3),
            tokens={k: list(v) for k, v in self.tokens.items()} if self.tokens is not None else None,
        )


@dataclass(frozen=True)
class TamperDelta:
    attack: AttackKind
    target: Optional[str] = None
    victim_rid: Optional[int] = None
    victim_must_fail: bool = False
    expected_checks: Tuple[str, ...] = ()
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "attack": self.attack.value,
            "target": self.target,
            "victim_rid": self.victim_rid,
            "victim_must_fail": self.victim_must_fail,
            "expected_checks": list(self.expected_checks),
            "detail": self.detail,
        }


def _need_rows(artifacts: ElectionArtifacts, n: int, attack: AttackKind):
    if len(artifacts.bb3) < n:
        raise InapplicableAttackError(f"{attack.value} needs at least {n} BB3 rows", value=len(artifacts.bb3))


def _pick(rng: RandomSource, n: int, target: Optional[int]) -> int:
    if target is None:
        return rng.randbelow(n)
    if not 0 <= target < n:
        raise InapplicableAttackError(f"target {target} outside [0, {n})", field="target", value=target)
    return target


def _resort(rows: List[BB3Row]) -> List[BB3Row]:
    return sorted(rows, key=lambda r: r.rid.value)


def _inject_row(ctx, artifacts, m, rng, target) -> TamperDelta:
    _need_rows(artifacts, 1, AttackKind.INJECT_ROW)
    existing = [row.rid.value for row in artifacts.bb3]
    while True:
        rid = ctx.random_scalar(rng, nonzero=True)
        if all(min((rid.value - e) % ctx.q, (e - rid.value) % ctx.q) >= m for e in existing):
            break
    v = rng.randbelow(m)
    donor = artifacts.bb3[rng.randbelow(len(artifacts.bb3))]
    row = BB3Row(rid, v, rid + v, record_hash(rid, v, m), donor.mu_h, donor.sigma_ack)
    artifacts.bb3 = _resort(artifacts.bb3 + [row])
    return TamperDelta(
        AttackKind.INJECT_ROW,
        target=str(rid.value),
        expected_checks=("xor-aggregate", "count", "group-signature", "ack-signature-vs-bb0"),
        detail=f"injected a self-consistent row voting {v}",
    )


def _delete_row(ctx, artifacts, m, rng, target) -> TamperDelta:
    _need_rows(artifacts, 1, AttackKind.DELETE_ROW)
    i = _pick(rng, len(artifacts.bb3), target)
    victim = artifacts.bb3.pop(i)
    return TamperDelta(
        AttackKind.DELETE_ROW,
        target=str(i),
        victim_rid=victim.rid.value,
        victim_must_fail=True,
        expected_checks=("xor-aggregate", "count"),
        detail=f"deleted row {i}",
    )


def _alter_vote(ctx, artifacts, m, rng, target) -> TamperDelta:
    _need_rows(artifacts, 1, AttackKind.ALTER_VOTE)
    i = _pick(rng, len(artifacts.bb3), target)
    row = artifacts.bb3[i]
    v = (row.v + 1 + rng.randbelow(m - 1)) % m
    artifacts.bb3[i] = replace(row, v=v, rho=row.rid + v, h=record_hash(row.rid, v, m))
    return TamperDelta(
        AttackKind.ALTER_VOTE,
        target=str(i),
        victim_rid=row.rid.value,
        victim_must_fail=True,
        expected_checks=("group-signature", "xor-aggregate"),
        detail=f"row {i} vote {row.v} -> {v}",
    )


def _collide_rid(ctx, artifacts, m, rng, target) -> TamperDelta:
    _need_rows(artifacts, 2, AttackKind.COLLIDE_RID)
    n = len(artifacts.bb3)
    j = _pick(rng, n, target)
    i = (j + 1 + rng.randbelow(n - 1)) % n
    anchor, row = artifacts.bb3[i], artifacts.bb3[j]
    rid = anchor.rid + 1 + rng.randbelow(m - 1)
    moved = replace(row, rid=rid, rho=rid + row.v, h=record_hash(rid, row.v, m))
    rows = list(artifacts.bb3)
    rows[j] = moved
    artifacts.bb3 = _resort(rows)
    return TamperDelta(
        AttackKind.COLLIDE_RID,
        target=str(j),
        victim_rid=row.rid.value,
        victim_must_fail=True,
        expected_checks=("rid-separation", "group-signature", "ack-signature-vs-bb0", "xor-aggregate"),
        detail=f"row {j} moved next to row {i}",
    )


def _drop_ack(ctx, artifacts, m, rng, target) -> TamperDelta:
    _need_rows(artifacts, 2, AttackKind.DROP_ACK)
    n = len(artifacts.bb3)
    i = _pick(rng, n, target)
    donor = artifacts.bb3[(i + 1 + rng.randbelow(n - 1)) % n]
    artifacts.bb3[i] = replace(artifacts.bb3[i], sigma_ack=donor.sigma_ack)
    return TamperDelta(
        AttackKind.DROP_ACK,
        target=str(i),
        expected_checks=("ack-signature-vs-bb0",),
        detail=f"row {i} carries another row's acknowledgment",
    )


def _token_pool(artifacts: ElectionArtifacts, attack: AttackKind, need: int) -> Tuple[int, List[Token]]:
    if not artifacts.tokens:
        raise InapplicableAttackError(f"{attack.value} needs the printed tokens")
    for booth in sorted(artifacts.tokens):
        if len(artifacts.tokens[booth]) >= need:
            return booth, artifacts.tokens[booth]
    raise InapplicableAttackError(f"{attack.value} needs a booth with {need} tokens")


def _replay_token(ctx, artifacts, m, rng, target) -> TamperDelta:
    booth, tokens = _token_pool(artifacts, AttackKind.REPLAY_TOKEN, 2)
    i = _pick(rng, len(tokens), target)
    j = (i + 1 + rng.randbelow(len(tokens) - 1)) % len(tokens)
    tokens[j] = tokens[i].duplicate()
    return TamperDelta(
        AttackKind.REPLAY_TOKEN,
        target=tokens[i].token_id,
        expected_checks=("unique-rid", "unique-rid-commitment", "unique-chit"),
        detail=f"booth {booth} token {j} replaced by a copy of token {i}",
    )


def _malform_token(ctx, artifacts, m, rng, target) -> TamperDelta:
    booth, tokens = _token_pool(artifacts, AttackKind.MALFORM_TOKEN, 1)
    i = _pick(rng, len(tokens), target)
    token = tokens[i]
    bad = TokenCommitments(token.commitments.c_rid, Commitment(token.commitments.c_u.element * ctx.g),
                           token.commitments.signature)
    tokens[i] = Token(token.booth, bad, token.secrets.copy(), token.chit)
    return TamperDelta(
        AttackKind.MALFORM_TOKEN,
        target=token.token_id,
        expected_checks=("u-opening", "token-signature"),
        detail=f"booth {booth} token {i} has C_u shifted by g",
    )


_ATTACKS = {
    AttackKind.INJECT_ROW: _inject_row,
    AttackKind.DELETE_ROW: _delete_row,
    AttackKind.ALTER_VOTE: _alter_vote,
    AttackKind.COLLIDE_RID: _collide_rid,
    AttackKind.DROP_ACK: _drop_ack,
    AttackKind.REPLAY_TOKEN: _replay_token,
    AttackKind.MALFORM_TOKEN: _malform_token,
}


def tamper(ctx: GroupContext, artifacts: ElectionArtifacts, attack: AttackKind, m: int,
           rng: RandomSource, target: Optional[int] = None) -> Tuple[ElectionArtifacts, TamperDelta]:
    """
    Apply exactly one attack to a copy of the artifacts.

    Args:
        ctx: Group context
        artifacts: Honest artifacts; left unmodified
        attack: The attack to apply
        m: Number of candidates
        rng: Chooses the target and the forged values
        target: Row (or token) index to attack; random when omitted

    Raises:
        InapplicableAttackError: If the artifacts cannot host the attack
    """
    attack = AttackKind(attack)
    mutated = artifacts.copy()
    delta = _ATTACKS[attack](ctx, mutated, m, rng, target)
    logger.info(f"Applied {attack.value}: {delta.detail}")
    return mutated, delta


def cheat_membership(ctx: GroupContext, public: VerifierPublic, commitment: Commitment,
                     rng: RandomSource) -> bool:
    """
    A prover with no valid opening guesses the challenge in advance.

    It sends the first move of a transcript simulated for its guess and
    wins only if the verifier's uniform challenge equals the guess.
    """
    guess = ctx.random_scalar(rng)
    forged = simulate_transcript(ctx, public, commitment, guess, rng)
    c = ctx.random_scalar(rng)
    if c != guess:
        return False
    return verify_transcript(ctx, public, commitment, forged.V, forged.a, forged.D, c, forged.responses)


def reissue_token(ctx: GroupContext, ea_keys: KeyPair, po: PollingOfficerPublic, source: Token,
                  nonce_index: int, m: int, rng: RandomSource) -> Tuple[Token, IssuedToken]:
    """
    A dishonest authority prints a second token around source's rid and u.

    C_rid and C_u are identical to source's; the chit (r_p, brid, nonce
    index) is fresh, so the desk accepts both tokens.
    """
    secrets = source.secrets
    token, issued = print_token(ctx, ea_keys, po, nonce_index, m, rng,
                                secrets.rid, secrets.r_I, secrets.u, secrets.r_u)
    logger.info(f"Reissued token {source.token_id} as {token.token_id} at booth {po.booth}")
    return token, issued


def collapse_replayed(ctx: GroupContext, envelopes: Sequence[EncryptedRecordEnvelope], ea_keys: EAKeys,
                      bb0: Sequence[BB0Row], registry: TokenRegistry, evm_ring: Sequence[GroupElement],
                      m: int) -> Tuple[EAStore, List[BB3Row]]:
    """
    Ingest as an authority colluding with a replayed rid.

    Every record is checked on its own, so the duplicate C_rid never
    meets its twin; all records stay answerable but BB3 keeps the first
    row per rid.
    """
    store = EAStore(m)
    for envelope in envelopes:
        single, _ = ea_ingest(ctx, [envelope], ea_keys, bb0, registry, evm_ring, m)
        for record in single.records:
            store.add(record)
    bb3, _ = publish_bb3(store, include_bb2=False)
    kept: List[BB3Row] = []
    seen = set()
    for row in bb3:
        if row.rid.value not in seen:
            seen.add(row.rid.value)
            kept.append(row)
    logger.info(f"Published {len(kept)} of {len(bb3)} rows after collapsing replayed rids")
    return store, kept
