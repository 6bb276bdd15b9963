"""
Token pre-generation, distribution records and token audits.

A token is printed in three separable parts:

- commitments: C_rid, C_u and the authority's signature over both; the
  voter keeps this part as the remnant of the receipt
- secrets: the openings, u' = u mod m, brid, the blinding factor and the
  ephemeral key p_ik; scanned by the EVM and then destroyed
- chit: (r_p, brid, nonce index), torn off at the polling officer's desk
"""

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from verivote.constants import DST_TOKEN, SMALL_INT_WIDTH
from verivote.groups import GroupContext, GroupElement, GroupError, Scalar, WireWidths
from verivote.services.base import PollingOfficerPublic, ProtocolError, TokenDestroyedError
from verivote.services.commitments import Commitment, commit
from verivote.sigkit import BlindingFactor, EphemeralPublic, KeyPair, SchnorrSignature, SignatureError, blind
from verivote.sigkit.schnorr import sign, signed_payload, verify
from verivote.utils.encoding import EncodingError, bytes_to_int, pack_fields, packed_size, small_int, unpack_fields
from verivote.utils.randomness import RandomSource
from verivote.validators.base_validator import BaseValidator, CheckFunction, ValidationReport

logger = logging.getLogger(__name__)


def token_payload(c_rid: Commitment, c_u: Commitment) -> bytes:
    """Bytes the authority signs for a token"""
    return signed_payload(DST_TOKEN, c_rid.to_bytes(), c_u.to_bytes())


def token_id_for(brid: bytes) -> str:
    return hashlib.sha256(brid).hexdigest()[:16]


@dataclass(frozen=True)
class TokenCommitments:
    c_rid: Commitment
    c_u: Commitment
    signature: SchnorrSignature

    def to_bytes(self) -> bytes:
        return pack_fields(self.c_rid.to_bytes(), self.c_u.to_bytes(), self.signature.to_bytes())

    @classmethod
    def from_bytes(cls, ctx: GroupContext, data: bytes) -> "TokenCommitments":
        c_rid, c_u, signature = unpack_fields(data, expected=3)
        return cls(Commitment.from_bytes(ctx, c_rid), Commitment.from_bytes(ctx, c_u),
                   SchnorrSignature.from_bytes(ctx, signature))


_SECRET_FIELDS = ("r_I", "r_u", "rid", "u", "u_prime", "brid", "blinding", "p_ik")


class TokenSecrets:
    """The scannable secrets part; every read fails once destroy() has run."""

    __slots__ = ("_values",)

    def __init__(self, r_I: Scalar, r_u: Scalar, rid: Scalar, u: Scalar, u_prime: int,
                 brid: bytes, blinding: BlindingFactor, p_ik: GroupElement):
        self._values: Optional[Dict[str, object]] = {
            "r_I": r_I, "r_u": r_u, "rid": rid, "u": u, "u_prime": u_prime,
            "brid": brid, "blinding": blinding, "p_ik": p_ik,
        }

    def _get(self, name: str):
        if self._values is None:
            raise TokenDestroyedError("token secrets were destroyed after scanning", field=name)
        return self._values[name]

    r_I = property(lambda self: self._get("r_I"))
    r_u = property(lambda self: self._get("r_u"))
    rid = property(lambda self: self._get("rid"))
    u = property(lambda self: self._get("u"))
    u_prime = property(lambda self: self._get("u_prime"))
    brid = property(lambda self: self._get("brid"))
    blinding = property(lambda self: self._get("blinding"))
    p_ik = property(lambda self: self._get("p_ik"))

    @property
    def destroyed(self) -> bool:
        return self._values is None

    def destroy(self):
        self._values = None

    def u_prime_text(self) -> str:
        """u' as printed on the token for the voter to read"""
        return str(self.u_prime)

    def copy(self) -> "TokenSecrets":
        return TokenSecrets(*(self._get(name) for name in _SECRET_FIELDS))

    def to_bytes(self) -> bytes:
        return pack_fields(
            self.r_I.to_bytes(),
            self.r_u.to_bytes(),
            self.rid.to_bytes(),
            self.u.to_bytes(),
            small_int(self.u_prime),
            self.brid,
            self.blinding.to_bytes(),
            self.p_ik.to_bytes(),
        )

    @classmethod
    def from_bytes(cls, ctx: GroupContext, data: bytes) -> "TokenSecrets":
        r_I, r_u, rid, u, u_prime, brid, blinding, p_ik = unpack_fields(data, expected=8)
        return cls(
            ctx.scalar_from_bytes(r_I),
            ctx.scalar_from_bytes(r_u),
            ctx.scalar_from_bytes(rid),
            ctx.scalar_from_bytes(u),
            bytes_to_int(u_prime),
            brid,
            BlindingFactor.from_bytes(ctx, blinding),
            ctx.element_from_bytes(p_ik),
        )

    def __repr__(self):
        return "TokenSecrets(<destroyed>)" if self.destroyed else "TokenSecrets(<secret>)"


@dataclass(frozen=True)
class TokenChit:
    r_p: Scalar
    brid: bytes
    nonce_index: int

    @property
    def token_id(self) -> str:
        return token_id_for(self.brid)

    def to_bytes(self) -> bytes:
        return pack_fields(self.r_p.to_bytes(), self.brid, small_int(self.nonce_index))

    @classmethod
    def from_bytes(cls, ctx: GroupContext, data: bytes) -> "TokenChit":
        r_p, brid, nonce_index = unpack_fields(data, expected=3)
        if len(nonce_index) != SMALL_INT_WIDTH:
            raise EncodingError("nonce index has the wrong width", field="nonce_index")
        return cls(ctx.scalar_from_bytes(r_p), brid, bytes_to_int(nonce_index))


@dataclass
class Token:
    booth: int
    commitments: TokenCommitments
    secrets: TokenSecrets
    chit: TokenChit

    @property
    def token_id(self) -> str:
        return self.chit.token_id

    def to_bytes(self) -> bytes:
        """Three length-prefixed parts in print order"""
        return pack_fields(self.commitments.to_bytes(), self.secrets.to_bytes(), self.chit.to_bytes())

    @classmethod
    def from_bytes(cls, ctx: GroupContext, data: bytes, booth: int) -> "Token":
        try:
            commitments, secrets, chit = unpack_fields(data, expected=3)
            return cls(
                booth,
                TokenCommitments.from_bytes(ctx, commitments),
                TokenSecrets.from_bytes(ctx, secrets),
                TokenChit.from_bytes(ctx, chit),
            )
        except (EncodingError, GroupError, SignatureError) as exc:
            raise ProtocolError(f"malformed token: {exc}") from exc

    def duplicate(self) -> "Token":
        """A physical copy of the token with independent secrets"""
        return Token(self.booth, self.commitments, self.secrets.copy(), self.chit)


def token_part_sizes(widths: WireWidths) -> Dict[str, int]:
    """Serialized size of each printed part for the given primitive widths"""
    return {
        "commitments": packed_size([widths.element, widths.element, widths.signature]),
        "secrets": packed_size([
            widths.scalar, widths.scalar, widths.scalar, widths.scalar,
            SMALL_INT_WIDTH,
            widths.scalar,
            2 * widths.scalar,
            widths.element,
        ]),
        "chit": packed_size([widths.scalar, widths.scalar, SMALL_INT_WIDTH]),
    }


@dataclass(frozen=True)
class IssuedToken:
    """What the authority retains about a token it printed"""
    booth: int
    token_id: str
    rid: Scalar
    r_I: Scalar
    u: Scalar
    r_u: Scalar
    blinding: BlindingFactor
    p_ik: GroupElement
    nonce_index: int
    c_rid: Commitment
    c_u: Commitment
    signature: SchnorrSignature


class TokenRegistry:
    """Authority-side index of issued tokens, keyed by brid"""

    def __init__(self):
        self._by_brid: Dict[bytes, IssuedToken] = {}
        self.audited: Set[str] = set()

    def register(self, brid: bytes, issued: IssuedToken):
        if brid in self._by_brid:
            raise ProtocolError("brid issued twice", field="brid")
        self._by_brid[brid] = issued

    def lookup(self, brid: bytes) -> Optional[IssuedToken]:
        return self._by_brid.get(brid)

    def items(self) -> Iterable[Tuple[bytes, IssuedToken]]:
        return self._by_brid.items()

    def mark_audited(self, token_id: str):
        self.audited.add(token_id)

    def __len__(self) -> int:
        return len(self._by_brid)


@dataclass(frozen=True)
class BB0Row:
    """An ephemeral public key p_ik; BB0 lists every booth's keys in random order"""
    key: GroupElement


@dataclass
class TokenBatch:
    tokens: Dict[int, List[Token]]
    bb0: List[BB0Row]
    registry: TokenRegistry = field(default_factory=TokenRegistry)

    def all_tokens(self) -> List[Token]:
        return [t for booth in sorted(self.tokens) for t in self.tokens[booth]]


def make_token(ctx: GroupContext, ea_keys: KeyPair, po: PollingOfficerPublic, nonce_index: int,
               m: int, rng: RandomSource) -> Tuple[Token, IssuedToken]:
    rid = ctx.random_scalar(rng, nonzero=True)
    r_I = ctx.random_scalar(rng)
    u = ctx.random_scalar(rng)
    r_u = ctx.random_scalar(rng)
    return print_token(ctx, ea_keys, po, nonce_index, m, rng, rid, r_I, u, r_u)


def print_token(ctx: GroupContext, ea_keys: KeyPair, po: PollingOfficerPublic, nonce_index: int,
                m: int, rng: RandomSource, rid: Scalar, r_I: Scalar, u: Scalar,
                r_u: Scalar) -> Tuple[Token, IssuedToken]:
    """Sign the commitments to (rid, u) and attach a fresh chit for booth po"""
    c_rid = commit(ctx, rid, r_I)
    c_u = commit(ctx, u, r_u)
    signature = sign(ctx, ea_keys, token_payload(c_rid, c_u), rng)

    r_p = ctx.random_scalar(rng, nonzero=True)
    p_ik = po.key ** r_p
    blinding = BlindingFactor.random(ctx, rng)
    brid = blind(ctx, rid, blinding, EphemeralPublic(p_ik, po.nonce_commitment(nonce_index)))

    token = Token(
        booth=po.booth,
        commitments=TokenCommitments(c_rid, c_u, signature),
        secrets=TokenSecrets(r_I, r_u, rid, u, u.value % m, brid, blinding, p_ik),
        chit=TokenChit(r_p, brid, nonce_index),
    )
    issued = IssuedToken(po.booth, token.token_id, rid, r_I, u, r_u, blinding, p_ik, nonce_index,
                         c_rid, c_u, signature)
    return token, issued


def generate_tokens(ctx: GroupContext, ea_keys: KeyPair, po_publics: Sequence[PollingOfficerPublic],
                    count: Union[int, Dict[int, int]], m: int, rng: RandomSource) -> TokenBatch:
    """
    Pre-generate tokens for every booth.

    Args:
        ctx: Group context
        ea_keys: Authority signing key pair
        po_publics: Public descriptor of each booth's polling officer
        count: Tokens per booth, or a mapping booth -> count
        m: Number of candidates
        rng: Randomness for the secrets and for the BB0 order

    Returns:
        TokenBatch with the tokens per booth, the shuffled BB0 rows and the
        authority's issuance registry
    """
    if m < 2:
        raise ProtocolError("at least two candidates are required", field="m", value=m)

    batch = TokenBatch(tokens={}, bb0=[])
    for po in po_publics:
        n = count[po.booth] if isinstance(count, dict) else count
        if n < 1:
            raise ProtocolError("token count must be positive", field="count", value=n)
        if n > len(po.nonce_commitments):
            raise ProtocolError(
                f"booth {po.booth} published {len(po.nonce_commitments)} nonces for {n} tokens",
                field="nonce_commitments",
            )
        booth_tokens = []
        for j in range(n):
            token, issued = make_token(ctx, ea_keys, po, j, m, rng)
            batch.registry.register(token.chit.brid, issued)
            batch.bb0.append(BB0Row(issued.p_ik))
            booth_tokens.append(token)
        batch.tokens[po.booth] = booth_tokens

    rng.shuffle(batch.bb0)
    logger.info(f"Generated {len(batch.registry)} tokens for {len(po_publics)} booths")
    return batch


class TokenAuditor(BaseValidator):
    """Opens every commitment on a full token and checks it against its signature"""

    report_subject = "token audit"

    def __init__(self, ctx: GroupContext, token: Token, ea_public: GroupElement,
                 po_public: PollingOfficerPublic, m: int):
        super().__init__()
        self.ctx = ctx
        self.token = token
        self.ea_public = ea_public
        self.po_public = po_public
        self.m = m

    def checks(self) -> List[Tuple[str, CheckFunction]]:
        return [
            ("rid-opening", self._check_rid_opening),
            ("u-opening", self._check_u_opening),
            ("u-prime", self._check_u_prime),
            ("token-signature", self._check_signature),
            ("ephemeral-key", self._check_ephemeral_key),
            ("blinded-rid", self._check_blinded_rid),
        ]

    def _check_rid_opening(self, report: ValidationReport):
        s, c = self.token.secrets, self.token.commitments
        report.add_check("rid-opening", commit(self.ctx, s.rid, s.r_I) == c.c_rid)

    def _check_u_opening(self, report: ValidationReport):
        s, c = self.token.secrets, self.token.commitments
        report.add_check("u-opening", commit(self.ctx, s.u, s.r_u) == c.c_u)

    def _check_u_prime(self, report: ValidationReport):
        s = self.token.secrets
        expected = s.u.value % self.m
        report.add_check("u-prime", s.u_prime == expected, f"printed {s.u_prime}, expected {expected}")

    def _check_signature(self, report: ValidationReport):
        c = self.token.commitments
        report.add_check("token-signature",
                         verify(self.ctx, self.ea_public, token_payload(c.c_rid, c.c_u), c.signature))

    def _check_ephemeral_key(self, report: ValidationReport):
        s, chit = self.token.secrets, self.token.chit
        report.add_check("ephemeral-key", self.po_public.key ** chit.r_p == s.p_ik)

    def _check_blinded_rid(self, report: ValidationReport):
        s, chit = self.token.secrets, self.token.chit
        public = EphemeralPublic(s.p_ik, self.po_public.nonce_commitment(chit.nonce_index))
        expected = blind(self.ctx, s.rid, s.blinding, public)
        report.add_check("blinded-rid", expected == s.brid == chit.brid)


def audit_token(ctx: GroupContext, token: Token, ea_public: GroupElement, po_public: PollingOfficerPublic,
                m: int, registry: Optional[TokenRegistry] = None) -> ValidationReport:
    """
    Audit a full token. The token is consumed: record it in the registry
    and retire it at the polling officer so it can never be voted with.
    """
    report = TokenAuditor(ctx, token, ea_public, po_public, m).validate()
    report.metadata["token_id"] = token.token_id
    report.metadata["booth"] = token.booth
    if registry is not None:
        registry.mark_audited(token.token_id)
    return report


def audit_uniqueness(tokens: Sequence[Token]) -> ValidationReport:
    """Check a token sample for repeated rid, C_rid or brid (replayed copies)"""
    report = ValidationReport("token uniqueness")
    seen: Dict[str, Dict[bytes, str]] = {"rid": {}, "c_rid": {}, "brid": {}}
    duplicates: Dict[str, List[str]] = {"rid": [], "c_rid": [], "brid": []}

    for token in tokens:
        keys = {
            "rid": token.secrets.rid.to_bytes(),
            "c_rid": token.commitments.c_rid.to_bytes(),
            "brid": token.chit.brid,
        }
        for name, key in keys.items():
            if key in seen[name]:
                duplicates[name].append(token.token_id)
            else:
                seen[name][key] = token.token_id

    report.add_check("unique-rid", not duplicates["rid"], failures=duplicates["rid"])
    report.add_check("unique-rid-commitment", not duplicates["c_rid"], failures=duplicates["c_rid"])
    report.add_check("unique-chit", not duplicates["brid"], failures=duplicates["brid"])
    report.metadata["sample_size"] = len(tokens)
    return report
