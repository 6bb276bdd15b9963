"""
Deterministic end-to-end election simulation.

Each stage is a plain function over explicit inputs, so the CLI can run
them one at a time against artifacts on disk while ElectionRunner chains
them in memory. Every stage draws from its own labelled stream of the
master seed; rerunning a stage with the same inputs reproduces its output.
"""

import bisect
import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from verivote.config import ElectionConfig
from verivote.groups import GroupContext, GroupElement, Scalar, setup_group
from verivote.security.tamper import ElectionArtifacts
from verivote.services.base import (
    AcknowledgmentDeclinedError,
    ProtocolError,
    TokenNotFreshError,
    TokenRejectedError,
)
from verivote.services.booth import BB1Row, BoothLedger, close_booth
from verivote.services.election_authority import (
    AuditFlag,
    BB2Row,
    BB3Row,
    EAKeys,
    EAProver,
    EAStore,
    IndividualProofRequest,
    ea_ingest,
    publish_bb3,
)
from verivote.services.evm import EVM, AckChannel, VoterReceipt, VvpatBox, evm_session
from verivote.services.polling_officer import PollingOfficer
from verivote.services.shuffler import EncryptedRecordEnvelope, collect_envelopes, shuffle
from verivote.services.tally import TallyResult, tally
from verivote.services.tokens import Token, TokenBatch, audit_token, audit_uniqueness, generate_tokens
from verivote.sigkit import KeyPair, keygen
from verivote.utils.logging_service import Stage, get_logger
from verivote.utils.parallel_executor import BoothExecutor
from verivote.utils.randomness import RandomSource, RandomStreams
from verivote.validators.base_validator import ValidationReport
from verivote.validators.individual_validator import IndividualResult, VerifierSetupCache, individual_verify
from verivote.validators.statistical_validators import ReceiptFreenessResult, receipt_freeness_statistic
from verivote.validators.universal_validator import UniversalReport, universal_verify

VoterKey = Tuple[int, int]


def streams_for(config: ElectionConfig) -> RandomStreams:
    return RandomStreams(config.seed)


def booth_ids(config: ElectionConfig) -> List[int]:
    """Booths are numbered from 1"""
    return list(range(1, config.booths + 1))


@dataclass
class ElectionSetup:
    """Keys of every party plus the public group context"""
    ctx: GroupContext
    m: int
    ea_keys: EAKeys
    officers: Dict[int, PollingOfficer]
    evm_keys: Dict[int, KeyPair]

    @property
    def evm_ring(self) -> Tuple[GroupElement, ...]:
        return tuple(self.evm_keys[b].public for b in sorted(self.evm_keys))

    @property
    def po_ring(self) -> Tuple[GroupElement, ...]:
        return tuple(self.officers[b].keys.public for b in sorted(self.officers))

    def po_publics(self):
        return [self.officers[b].public() for b in sorted(self.officers)]

    def evm(self, booth: int, vvpat: Optional[VvpatBox] = None) -> EVM:
        ea = self.ea_keys.public()
        return EVM(self.ctx, booth, self.evm_keys[booth], self.evm_ring, ea.signing, ea.encryption, self.m, vvpat)


def setup_election(config: ElectionConfig) -> ElectionSetup:
    streams = streams_for(config).child("setup")
    ctx = setup_group(config.security_profile, config.seed)
    ea_keys = EAKeys.generate(ctx, streams.stream("election-authority"))
    officers = {
        b: PollingOfficer.create(ctx, b, config.tokens_per_booth, streams.stream(f"officer-{b}"))
        for b in booth_ids(config)
    }
    evm_keys = {b: keygen(ctx, streams.stream(f"evm-{b}")) for b in booth_ids(config)}
    return ElectionSetup(ctx, config.m, ea_keys, officers, evm_keys)


def issue_tokens(setup: ElectionSetup, config: ElectionConfig) -> TokenBatch:
    return generate_tokens(setup.ctx, setup.ea_keys.signing, setup.po_publics(), config.tokens_per_booth,
                           config.m, streams_for(config).stream("tokens"))


@dataclass
class TokenAudit:
    reports: List[ValidationReport]
    uniqueness: ValidationReport
    audited: Dict[int, List[str]]

    @property
    def passed(self) -> bool:
        return self.uniqueness.passed and all(r.passed for r in self.reports)

    def audited_ids(self) -> List[str]:
        return [token_id for booth in sorted(self.audited) for token_id in self.audited[booth]]


def audit_tokens(setup: ElectionSetup, batch: TokenBatch, config: ElectionConfig) -> TokenAudit:
    """
    Audit a random sample of each booth's tokens, never so many that the
    booth runs short, and check every printed token for duplicates.
    Audited tokens are retired at their booth's officer.
    """
    rng = streams_for(config).stream("token-audit")
    reports: List[ValidationReport] = []
    audited: Dict[int, List[str]] = {}
    for booth in sorted(batch.tokens):
        tokens = batch.tokens[booth]
        spare = max(len(tokens) - config.voters_per_booth, 0)
        n = min(int(config.audit_fraction * len(tokens)), spare)
        picked = sorted(rng.sample_permutation(list(range(len(tokens))))[:n])
        po_public = setup.officers[booth].public()
        for i in picked:
            reports.append(audit_token(setup.ctx, tokens[i], setup.ea_keys.signing.public, po_public,
                                       config.m, batch.registry))
        audited[booth] = [tokens[i].token_id for i in picked]
        setup.officers[booth].retire(audited[booth])
    return TokenAudit(reports, audit_uniqueness(batch.all_tokens()), audited)


def voting_pool(batch: TokenBatch, audited: Dict[int, List[str]]) -> Dict[int, List[Token]]:
    """Tokens left for voting, in print order"""
    pool = {}
    for booth, tokens in batch.tokens.items():
        retired = set(audited.get(booth, ()))
        pool[booth] = [t for t in tokens if t.token_id not in retired]
    return pool


def _draw_vote(rng: RandomSource, m: int, cumulative: Optional[List[float]]) -> int:
    if cumulative is None:
        return rng.randbelow(m)
    return min(bisect.bisect_right(cumulative, rng.random() * cumulative[-1]), m - 1)


def draw_votes(config: ElectionConfig) -> Dict[int, List[int]]:
    """Simulated voter choices; uniform unless vote_weights is set"""
    streams = streams_for(config).child("votes")
    cumulative = list(itertools.accumulate(config.vote_weights)) if config.vote_weights else None
    return {
        b: [_draw_vote(rng, config.m, cumulative) for _ in range(config.voters_per_booth)]
        for b, rng in ((b, streams.stream(f"booth-{b}")) for b in booth_ids(config))
    }


@dataclass
class VoterRecord:
    """One simulated voter. rid is ground truth kept outside the protocol path."""
    booth: int
    voter: int
    v: int
    rid: Scalar
    receipt: Optional[VoterReceipt] = None
    acknowledged: bool = False
    error: Optional[str] = None

    @property
    def key(self) -> VoterKey:
        return (self.booth, self.voter)

    @property
    def recorded(self) -> bool:
        return self.receipt is not None and self.acknowledged


@dataclass
class BoothPolling:
    booth: int
    evm: EVM
    officer: PollingOfficer
    voters: List[VoterRecord]
    vvpat: VvpatBox
    lost_acks: int = 0


def poll_booth(setup: ElectionSetup, booth: int, tokens: Sequence[Token], votes: Sequence[int],
               config: ElectionConfig) -> BoothPolling:
    """Run every voter of one booth through desk, machine and acknowledgment"""
    log = get_logger()
    streams = streams_for(config).child(f"polling/booth-{booth}")
    rng = streams.stream("sessions")
    vvpat = VvpatBox()
    evm = setup.evm(booth, vvpat)
    officer = setup.officers[booth]
    channel = AckChannel(officer.acknowledge, config.ack_loss_rate,
                         streams.stream("ack-channel") if config.ack_loss_rate else None)
    if len(tokens) < len(votes):
        raise ProtocolError(f"booth {booth} has {len(tokens)} tokens for {len(votes)} voters",
                                 field="tokens", value=len(tokens))

    voters: List[VoterRecord] = []
    for index, (token, v) in enumerate(zip(tokens, votes), start=1):
        voter = VoterRecord(booth, index, v, token.secrets.rid)
        try:
            officer.po_desk(token.chit)
            outcome = evm_session(evm, v, token.commitments, token.secrets, channel, rng)
            voter.receipt = outcome.receipt
            voter.acknowledged = outcome.acknowledged
        except (TokenRejectedError, TokenNotFreshError, AcknowledgmentDeclinedError) as exc:
            voter.error = str(exc)
            log.log_warning(f"Session aborted: {exc}", booth_id=booth, voter_index=index)
        voters.append(voter)

    log.log_info("Booth polling finished", booth_id=booth, records=len(evm.records), flags=len(evm.flags))
    return BoothPolling(booth, evm, officer, voters, vvpat, lost_acks=len(channel.lost))


def run_polling(setup: ElectionSetup, pool: Dict[int, List[Token]], votes: Dict[int, List[int]],
                config: ElectionConfig) -> Dict[int, BoothPolling]:
    executor = BoothExecutor(config.execution_mode, config.max_workers)
    return executor.run(
        booth_ids(config),
        lambda b: poll_booth(setup, b, pool[b], votes[b], config),
        label="booth polling",
    )


def close_booths(setup: ElectionSetup, booths: Dict[int, Tuple[EVM, PollingOfficer]],
                 config: ElectionConfig) -> Tuple[Dict[int, BoothLedger], List[BB1Row]]:
    streams = streams_for(config).child("close")
    ledgers: Dict[int, BoothLedger] = {}
    for booth in sorted(booths):
        evm, officer = booths[booth]
        ledgers[booth], _ = close_booth(evm, officer.printouts, officer, setup.po_ring,
                                        streams.stream(f"booth-{booth}"))
    return ledgers, [ledgers[b].bb1_row() for b in sorted(ledgers)]


def collect(ledgers: Dict[int, BoothLedger], config: ElectionConfig) -> List[EncryptedRecordEnvelope]:
    envelopes = collect_envelopes(ledgers[b] for b in sorted(ledgers))
    return shuffle(envelopes, streams_for(config).stream("shuffle"))


@dataclass
class Publication:
    store: EAStore
    flags: List[AuditFlag]
    bb3: List[BB3Row]
    bb2: Optional[List[BB2Row]]


def publish(setup: ElectionSetup, envelopes: Sequence[EncryptedRecordEnvelope], batch: TokenBatch,
            config: ElectionConfig) -> Publication:
    store, flags = ea_ingest(setup.ctx, envelopes, setup.ea_keys, batch.bb0, batch.registry,
                             setup.evm_ring, config.m)
    bb3, bb2 = publish_bb3(store, include_bb2=config.publish_bb2)
    return Publication(store, flags, bb3, bb2)


def verify_receipts(ctx: GroupContext, receipts: Dict[VoterKey, VoterReceipt], store: EAStore,
                    bb3: Sequence[BB3Row], config: ElectionConfig) -> Dict[VoterKey, IndividualResult]:
    """Run each voter's two membership proofs against the authority's store"""
    streams = streams_for(config).child("individual")
    prover = EAProver(ctx, store)
    cache = VerifierSetupCache()
    results: Dict[VoterKey, IndividualResult] = {}
    for (booth, voter), receipt in sorted(receipts.items()):
        evm_receipt = receipt.evm_receipt
        results[(booth, voter)] = individual_verify(
            ctx, IndividualProofRequest(evm_receipt.c_rid, evm_receipt.c_v), prover, bb3,
            streams.stream(f"booth-{booth}/voter-{voter}"), cache,
        )
    return results


def verify_voters(ctx: GroupContext, voters: Sequence[VoterRecord], store: EAStore, bb3: Sequence[BB3Row],
                  config: ElectionConfig) -> Dict[VoterKey, IndividualResult]:
    """Individual verification for every voter who left with a receipt"""
    receipts = {v.key: v.receipt for v in voters if v.receipt is not None}
    return verify_receipts(ctx, receipts, store, bb3, config)


def verified_fraction(results: Dict[VoterKey, IndividualResult]) -> Optional[float]:
    if not results:
        return None
    return sum(1 for r in results.values() if r) / len(results)


@dataclass
class ElectionOutcome:
    config: ElectionConfig
    setup: ElectionSetup
    batch: TokenBatch
    audit: TokenAudit
    polling: Dict[int, BoothPolling]
    ledgers: Dict[int, BoothLedger]
    bb1: List[BB1Row]
    envelopes: List[EncryptedRecordEnvelope]
    publication: Publication
    result: TallyResult
    universal: UniversalReport
    individual: Dict[VoterKey, IndividualResult] = field(default_factory=dict)

    @property
    def ctx(self) -> GroupContext:
        return self.setup.ctx

    @property
    def voters(self) -> List[VoterRecord]:
        return [v for b in sorted(self.polling) for v in self.polling[b].voters]

    def ground_truth_tally(self) -> List[int]:
        """What the tally must be: votes that were stored and acknowledged"""
        counts = [0] * self.config.m
        for voter in self.voters:
            if voter.recorded:
                counts[voter.v] += 1
        return counts

    def vvpat_tally(self) -> List[int]:
        counts = [0] * self.config.m
        for booth in self.polling.values():
            for j, c in enumerate(booth.vvpat.vvpat_tally(self.config.m)):
                counts[j] += c
        return counts

    def receipt_residues(self) -> Tuple[List[int], List[int]]:
        """(v, w') of every voter who left with a receipt"""
        pairs = [(v.v, v.receipt.evm_receipt.proof.w_prime) for v in self.voters if v.receipt is not None]
        return [v for v, _ in pairs], [w for _, w in pairs]

    def receipt_freeness(self) -> ReceiptFreenessResult:
        votes, residues = self.receipt_residues()
        return receipt_freeness_statistic(votes, residues, self.config.m)

    def artifacts(self) -> ElectionArtifacts:
        """The published boards; the polled tokens no longer hold their secrets"""
        return ElectionArtifacts(
            bb0=list(self.batch.bb0),
            bb1=list(self.bb1),
            bb2=list(self.publication.bb2) if self.publication.bb2 is not None else None,
            bb3=list(self.publication.bb3),
        )


class ElectionRunner:
    """Chains every stage of one election in memory"""

    def __init__(self, config: ElectionConfig):
        self.config = config
        self.log = get_logger()

    def run(self, verify_individual: bool = True) -> ElectionOutcome:
        config = self.config
        eid = config.election_id

        with self.log.stage_context(Stage.SETUP, eid) as metrics:
            setup = setup_election(config)
            metrics.records = config.booths
        with self.log.stage_context(Stage.TOKEN_GENERATION, eid) as metrics:
            batch = issue_tokens(setup, config)
            metrics.records = len(batch.registry)
        with self.log.stage_context(Stage.TOKEN_AUDIT, eid) as metrics:
            audit = audit_tokens(setup, batch, config)
            metrics.records = len(audit.reports)
            metrics.flags = sum(1 for r in audit.reports if not r.passed) + (0 if audit.uniqueness.passed else 1)
        with self.log.stage_context(Stage.POLLING, eid) as metrics:
            polling = run_polling(setup, voting_pool(batch, audit.audited), draw_votes(config), config)
            metrics.records = sum(len(p.evm.records) for p in polling.values())
        with self.log.stage_context(Stage.BOOTH_CLOSE, eid) as metrics:
            ledgers, bb1 = close_booths(setup, {b: (p.evm, p.officer) for b, p in polling.items()}, config)
            metrics.records = sum(row.count for row in bb1)
            metrics.flags = sum(len(l.flags) for l in ledgers.values())
        with self.log.stage_context(Stage.COLLECTION, eid) as metrics:
            envelopes = collect(ledgers, config)
            metrics.records = len(envelopes)
        with self.log.stage_context(Stage.PUBLICATION, eid) as metrics:
            publication = publish(setup, envelopes, batch, config)
            metrics.records = len(publication.bb3)
            metrics.flags = len(publication.flags)
        with self.log.stage_context(Stage.TALLY, eid) as metrics:
            result = tally(publication.bb3, config.m)
            metrics.records = result.total

        individual: Dict[VoterKey, IndividualResult] = {}
        voters = [v for b in sorted(polling) for v in polling[b].voters]
        if verify_individual:
            with self.log.stage_context(Stage.INDIVIDUAL_VERIFICATION, eid) as metrics:
                individual = verify_voters(setup.ctx, voters, publication.store, publication.bb3, config)
                metrics.records = len(individual)
                metrics.flags = sum(1 for r in individual.values() if not r)

        with self.log.stage_context(Stage.UNIVERSAL_VERIFICATION, eid) as metrics:
            universal = universal_verify(
                setup.ctx, batch.bb0, bb1, publication.bb2, publication.bb3, setup.evm_ring, setup.po_ring,
                config.m, published_tally=result, verified_fraction=verified_fraction(individual),
            )
            metrics.records = len(universal.checks)
            metrics.flags = len(universal.failed_checks)

        return ElectionOutcome(config, setup, batch, audit, polling, ledgers, bb1, envelopes, publication,
                               result, universal, individual)
