"""
Individual verification: a voter asks the election authority to prove that
their vote made it onto BB3 unchanged.

The voter sends (C_rid, C_v) and acts as verifier of two set-membership
proofs: C_rid * C_v opens to an element of Phi (the rho column) and C_rid
opens to an element of Psi (the rid column). A pair the authority has no
record for is reported as MISSING, distinct from a proof that fails.
"""

import hashlib
import logging
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple

from verivote.groups import GroupContext, Scalar
from verivote.services.base import UnknownRecordError
from verivote.services.election_authority import BB3Row, EAProver, IndividualProofRequest
from verivote.services.zkp_membership import NotInSetError, VerifierSetup, setup_verifier, verify_transcript
from verivote.utils.randomness import RandomSource

logger = logging.getLogger(__name__)

__all__ = [
    "IndividualProofRequest",
    "IndividualResult",
    "IndividualStatus",
    "VerifierSetupCache",
    "individual_verify",
]


class IndividualStatus(Enum):
    VERIFIED = "verified"
    PROOF_FAILED = "proof_failed"
    MISSING = "missing"


@dataclass(frozen=True)
class IndividualResult:
    status: IndividualStatus
    phi_accepted: bool = False
    psi_accepted: bool = False
    detail: str = ""

    def __bool__(self) -> bool:
        return self.status == IndividualStatus.VERIFIED


class VerifierSetupCache:
    """Signs each published column once and reuses the setup for every proof"""

    def __init__(self):
        self._lock = threading.Lock()
        self._setups: Dict[Tuple[str, str, bytes], VerifierSetup] = {}

    def setup(self, ctx: GroupContext, column: str, values: Iterable[Scalar], rng: RandomSource) -> VerifierSetup:
        unique = sorted({v.value for v in values})
        digest = hashlib.sha256(b"".join(ctx.scalar(v).to_bytes() for v in unique)).digest()
        key = (ctx.fingerprint, column, digest)
        with self._lock:
            cached = self._setups.get(key)
            if cached is None:
                cached = setup_verifier(ctx, [ctx.scalar(v) for v in unique], rng)
                self._setups[key] = cached
                logger.debug(f"Signed {len(unique)} elements of column {column}")
            return cached

    def __len__(self) -> int:
        return len(self._setups)


def individual_verify(ctx: GroupContext, request: IndividualProofRequest, prover: EAProver,
                      bb3: Sequence[BB3Row], rng: RandomSource,
                      cache: Optional[VerifierSetupCache] = None) -> IndividualResult:
    """
    Run both membership proofs against the published BB3.

    Args:
        ctx: Group context
        request: The voter's commitment pair
        prover: The authority's prover
        bb3: The published table
        rng: Voter-side randomness (verifier key, challenges)
        cache: Shared verifier setups; a fresh one is used when omitted
    """
    cache = cache or VerifierSetupCache()
    phi = cache.setup(ctx, "phi", (row.rho for row in bb3), rng).public()
    psi = cache.setup(ctx, "psi", (row.rid for row in bb3), rng).public()

    try:
        phi_move, psi_move = prover.begin(request, phi, psi, rng)
    except UnknownRecordError as exc:
        return IndividualResult(IndividualStatus.MISSING, detail=str(exc))
    except NotInSetError as exc:
        return IndividualResult(IndividualStatus.PROOF_FAILED, detail=str(exc))

    c_phi = ctx.random_scalar(rng)
    c_psi = ctx.random_scalar(rng)
    z_phi, z_psi = prover.finish(request, c_phi, c_psi)

    phi_ok = verify_transcript(ctx, phi, request.combined, phi_move.V, phi_move.a, phi_move.D, c_phi, z_phi)
    psi_ok = verify_transcript(ctx, psi, request.c_rid, psi_move.V, psi_move.a, psi_move.D, c_psi, z_psi)
    status = IndividualStatus.VERIFIED if phi_ok and psi_ok else IndividualStatus.PROOF_FAILED
    return IndividualResult(status, phi_ok, psi_ok)
