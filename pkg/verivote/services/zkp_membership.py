"""
Zero-knowledge proof that a Pedersen commitment opens to a member of a
public set.

The verifier signs every set element with a Boneh-Boyen key x
(A_i = g^(1/(x+i))) and sends y = g^x and the table to the prover. The
prover blinds the signature on its committed value, V = A_rho^v, and runs
a sigma protocol proving knowledge of (rho, v, r) such that
C = g^rho h^r and V is a blinded signature on rho:

    prover:   a = e(V, g)^-s e(g, g)^t,  D = g^s h^mm
    verifier: random c
    prover:   z_rho = s - rho c,  z_v = t - v c,  z_r = mm - r c
    verifier: D == C^c h^z_r g^z_rho
              a == e(V, y)^c e(V, g)^-z_rho e(g, g)^z_v

Setup costs one signature per set element and is done once; every proof
after that is constant size and constant time.
"""

import logging
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Iterable, Mapping, Optional, Tuple

from verivote.constants import DST_MEMBERSHIP
from verivote.errors import VerivoteError
from verivote.groups import GroupContext, GroupElement, GroupError, Scalar, TargetElement, hash_to_scalar
from verivote.services.commitments import Commitment, Opening
from verivote.sigkit.boneh_boyen import bb_sign
from verivote.utils.encoding import EncodingError, pack_fields, unpack_fields
from verivote.utils.randomness import RandomSource

logger = logging.getLogger(__name__)

TRANSCRIPT_MAGIC = b"VVZK"


class MembershipError(VerivoteError):
    """Base exception for set-membership proofs"""
    pass


class NotInSetError(MembershipError):
    """Raised when the prover's committed value has no table entry"""
    pass


class DuplicateSetElementError(MembershipError):
    """Raised when a set contains the same element twice"""
    pass


@dataclass(frozen=True)
class VerifierPublic:
    """What the verifier sends the prover: y = g^x and the signature table"""
    y: GroupElement
    table: Mapping[int, GroupElement]

    def lookup(self, element: Scalar) -> GroupElement:
        try:
            return self.table[element.value]
        except KeyError:
            raise NotInSetError("committed value is not in the verifier's set", field="rho") from None

    def __contains__(self, element: Scalar) -> bool:
        return element.value in self.table

    def __len__(self) -> int:
        return len(self.table)


@dataclass(frozen=True)
class VerifierSetup:
    x: Scalar
    y: GroupElement
    table: Mapping[int, GroupElement]

    def public(self) -> VerifierPublic:
        return VerifierPublic(self.y, self.table)

    def __repr__(self):
        return f"VerifierSetup(size={len(self.table)})"


def setup_verifier(ctx: GroupContext, set_elements: Iterable[Scalar], rng: RandomSource,
                   x: Optional[Scalar] = None) -> VerifierSetup:
    """
    Sign every set element under a fresh Boneh-Boyen key.

    Args:
        ctx: Group context
        set_elements: The public set; must not contain duplicates
        rng: Source for the verifier secret
        x: Explicit verifier secret (tests); drawn from rng when omitted

    Raises:
        DuplicateSetElementError: If an element occurs twice
        MembershipError: If an explicit x equals minus a set element
    """
    values = [ctx.scalar(int(e)) for e in set_elements]
    seen = set()
    for value in values:
        if value.value in seen:
            raise DuplicateSetElementError("set contains a duplicate element", value=value.value)
        seen.add(value.value)

    if x is None:
        # redraw until no element equals -x
        while True:
            x = ctx.random_scalar(rng, nonzero=True)
            if (-x).value not in seen:
                break
    elif (-x).value in seen:
        raise MembershipError("verifier secret collides with a set element")

    table: Dict[int, GroupElement] = {}
    for value in values:
        table[value.value] = bb_sign(ctx, x, value)

    logger.debug(f"Verifier setup signed {len(table)} set elements")
    return VerifierSetup(x=x, y=ctx.g ** x, table=MappingProxyType(table))


@dataclass(frozen=True)
class ProverRandomness:
    v: Scalar
    s: Scalar
    t: Scalar
    mm: Scalar


@dataclass(frozen=True)
class ProverState:
    opening: Opening
    v_blind: Scalar
    V: GroupElement
    s: Scalar
    t: Scalar
    mm: Scalar

    def __repr__(self):
        return "ProverState(<secret>)"


@dataclass(frozen=True)
class Responses:
    z_rho: Scalar
    z_v: Scalar
    z_r: Scalar


@dataclass(frozen=True)
class Transcript:
    V: GroupElement
    a: TargetElement
    D: GroupElement
    c: Scalar
    z_rho: Scalar
    z_v: Scalar
    z_r: Scalar

    @property
    def responses(self) -> Responses:
        return Responses(self.z_rho, self.z_v, self.z_r)

    def to_bytes(self, ctx: GroupContext) -> bytes:
        header = pack_fields(TRANSCRIPT_MAGIC, ctx.backend_id.value.encode(), ctx.scalar_width.to_bytes(2, "big"))
        return pack_fields(
            header,
            self.V.to_bytes(),
            self.a.to_bytes(),
            self.D.to_bytes(),
            self.c.to_bytes(),
            self.z_rho.to_bytes(),
            self.z_v.to_bytes(),
            self.z_r.to_bytes(),
        )

    @classmethod
    def from_bytes(cls, ctx: GroupContext, data: bytes) -> "Transcript":
        try:
            header, V, a, D, c, z_rho, z_v, z_r = unpack_fields(data, expected=8)
            magic, backend_id, width = unpack_fields(header, expected=3)
        except EncodingError as exc:
            raise MembershipError(f"malformed transcript: {exc}") from exc
        if magic != TRANSCRIPT_MAGIC or backend_id != ctx.backend_id.value.encode() \
                or int.from_bytes(width, "big") != ctx.scalar_width:
            raise MembershipError("transcript header does not match the group context")
        try:
            return cls(
                V=ctx.element_from_bytes(V),
                a=ctx.target_from_bytes(a),
                D=ctx.element_from_bytes(D),
                c=ctx.scalar_from_bytes(c),
                z_rho=ctx.scalar_from_bytes(z_rho),
                z_v=ctx.scalar_from_bytes(z_v),
                z_r=ctx.scalar_from_bytes(z_r),
            )
        except GroupError as exc:
            raise MembershipError(f"malformed transcript field: {exc}") from exc


def prove_first(ctx: GroupContext, opening: Opening, public: VerifierPublic, rng: RandomSource,
                randomness: Optional[ProverRandomness] = None
                ) -> Tuple[GroupElement, TargetElement, GroupElement, ProverState]:
    """
    Prover's first move.

    Raises:
        NotInSetError: If the committed value has no table entry
    """
    signature = public.lookup(opening.message)
    if randomness is None:
        randomness = ProverRandomness(
            v=ctx.random_scalar(rng, nonzero=True),
            s=ctx.random_scalar(rng),
            t=ctx.random_scalar(rng),
            mm=ctx.random_scalar(rng),
        )

    V = signature ** randomness.v
    a = ctx.pair(V, ctx.g) ** (-randomness.s) * ctx.gt ** randomness.t
    D = ctx.g ** randomness.s * ctx.h ** randomness.mm
    state = ProverState(opening, randomness.v, V, randomness.s, randomness.t, randomness.mm)
    return V, a, D, state


def respond(state: ProverState, c: Scalar) -> Responses:
    return Responses(
        z_rho=state.s - state.opening.message * c,
        z_v=state.t - state.v_blind * c,
        z_r=state.mm - state.opening.randomness * c,
    )


def verify_transcript(ctx: GroupContext, public: VerifierPublic, C: Commitment, V: GroupElement,
                      a: TargetElement, D: GroupElement, c: Scalar, responses: Responses) -> bool:
    # V = 1 would let a prover pass the pairing equation without a signature
    if V.is_identity():
        return False
    if D != C.element ** c * ctx.h ** responses.z_r * ctx.g ** responses.z_rho:
        return False
    expected = ctx.pair(V, public.y) ** c * ctx.pair(V, ctx.g) ** (-responses.z_rho) * ctx.gt ** responses.z_v
    return a == expected


def check_transcript(ctx: GroupContext, public: VerifierPublic, C: Commitment, transcript: Transcript) -> bool:
    return verify_transcript(ctx, public, C, transcript.V, transcript.a, transcript.D,
                             transcript.c, transcript.responses)


def run_interactive(ctx: GroupContext, C: Commitment, opening: Opening, setup: VerifierSetup,
                    rng: RandomSource) -> bool:
    """Run the three moves with a uniform challenge and return the verifier's decision.

    A prover whose committed value is outside the set cannot produce a
    first move; the verifier then rejects.
    """
    public = setup.public()
    try:
        V, a, D, state = prove_first(ctx, opening, public, rng)
    except NotInSetError:
        logger.info("Prover could not form a first move; rejecting")
        return False
    c = ctx.random_scalar(rng)
    return verify_transcript(ctx, public, C, V, a, D, c, respond(state, c))


def fiat_shamir_challenge(ctx: GroupContext, public: VerifierPublic, C: Commitment, V: GroupElement,
                          a: TargetElement, D: GroupElement) -> Scalar:
    return hash_to_scalar(ctx, DST_MEMBERSHIP, public.y.to_bytes(), C.to_bytes(),
                          V.to_bytes(), a.to_bytes(), D.to_bytes())


def prove_noninteractive(ctx: GroupContext, C: Commitment, opening: Opening, public: VerifierPublic,
                         rng: RandomSource) -> Transcript:
    V, a, D, state = prove_first(ctx, opening, public, rng)
    c = fiat_shamir_challenge(ctx, public, C, V, a, D)
    z = respond(state, c)
    return Transcript(V, a, D, c, z.z_rho, z.z_v, z.z_r)


def verify_noninteractive(ctx: GroupContext, public: VerifierPublic, C: Commitment, transcript: Transcript) -> bool:
    if transcript.c != fiat_shamir_challenge(ctx, public, C, transcript.V, transcript.a, transcript.D):
        return False
    return check_transcript(ctx, public, C, transcript)


def simulate_transcript(ctx: GroupContext, public: VerifierPublic, C: Commitment, c: Scalar,
                        rng: RandomSource, omega: Optional[Scalar] = None,
                        responses: Optional[Responses] = None) -> Transcript:
    """Honest-verifier simulator: an accepting transcript for challenge c without any opening"""
    if omega is None:
        omega = ctx.random_scalar(rng, nonzero=True)
    if responses is None:
        responses = Responses(ctx.random_scalar(rng), ctx.random_scalar(rng), ctx.random_scalar(rng))
    V = ctx.g ** omega
    a = ctx.pair(V, public.y) ** c * ctx.pair(V, ctx.g) ** (-responses.z_rho) * ctx.gt ** responses.z_v
    D = C.element ** c * ctx.h ** responses.z_r * ctx.g ** responses.z_rho
    return Transcript(V, a, D, c, responses.z_rho, responses.z_v, responses.z_r)


@dataclass(frozen=True)
class ExtractedWitness:
    opening: Opening
    v_blind: Scalar


def extract_opening(t1: Transcript, t2: Transcript) -> ExtractedWitness:
    """
    Special-soundness extractor.

    Raises:
        MembershipError: If the transcripts do not share a first move or
            use the same challenge
    """
    if t1.V != t2.V or t1.a != t2.a or t1.D != t2.D:
        raise MembershipError("transcripts do not share a first move")
    if t1.c == t2.c:
        raise MembershipError("extraction needs two distinct challenges")
    inv = (t2.c - t1.c).inverse()
    rho = (t1.z_rho - t2.z_rho) * inv
    r = (t1.z_r - t2.z_r) * inv
    v = (t1.z_v - t2.z_v) * inv
    return ExtractedWitness(Opening(rho, r), v)
