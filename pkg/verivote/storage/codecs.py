"""
JSON bodies for the non-board artifacts.

Every protocol value is stored as the hex of its wire encoding; decoding
goes back through the same from_bytes constructors the protocol uses, so
a file that decodes holds only well-formed group elements and scalars.
"""

import functools
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from verivote.groups import GroupContext, GroupElement, GroupError, Scalar
from verivote.services.base import PollingOfficerPublic, ProtocolError
from verivote.services.booth import BoothLedger
from verivote.services.commitments import Commitment
from verivote.services.election_authority import AuditFlag, EAKeys, EAPublic, EARecord, EAStore, FlagReason
from verivote.services.evm import EncryptedRecord, EvmReceipt, VoteProof, VoterReceipt
from verivote.services.polling_officer import AckPrintout, PollingOfficer
from verivote.services.shuffler import EncryptedRecordEnvelope
from verivote.services.tokens import IssuedToken, Token, TokenCommitments, TokenRegistry
from verivote.sigkit import (
    BlindedSignature,
    BlindingFactor,
    GroupSignature,
    HybridCiphertext,
    KeyPair,
    RecordHash,
    SchnorrSignature,
    SignatureError,
    UnblindedSignature,
    keypair_from_secret,
)
from verivote.storage.base import ArtifactCorruptError
from verivote.utils.encoding import EncodingError, from_hex


def _hex(value) -> str:
    return value.hex() if isinstance(value, bytes) else value.to_bytes().hex()


def decoding(kind: str):
    """Decorator turning decode failures into ArtifactCorruptError"""
    def wrap(fn):
        @functools.wraps(fn)
        def decode(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except (KeyError, TypeError, ValueError, EncodingError, GroupError, SignatureError,
                    ProtocolError) as exc:
                raise ArtifactCorruptError(f"{kind} does not decode: {exc!r}") from exc
        return decode
    return wrap


class _Reader:
    """Typed accessors over one JSON object"""

    def __init__(self, ctx: GroupContext, data: Dict[str, Any]):
        self.ctx = ctx
        self.data = data

    def raw(self, name: str) -> bytes:
        return from_hex(self.data[name], name)

    def scalar(self, name: str) -> Scalar:
        return self.ctx.scalar_from_bytes(self.raw(name))

    def element(self, name: str) -> GroupElement:
        return self.ctx.element_from_bytes(self.raw(name))

    def commitment(self, name: str) -> Commitment:
        return Commitment.from_bytes(self.ctx, self.raw(name))

    def ring_signature(self, name: str) -> GroupSignature:
        return GroupSignature.from_bytes(self.ctx, self.raw(name))

    def integer(self, name: str) -> int:
        value = self.data[name]
        if not isinstance(value, int) or isinstance(value, bool):
            raise TypeError(f"{name} must be an integer")
        return value


# Election keys

@dataclass
class ElectionPublic:
    """Everything a universal verifier needs besides the boards"""
    m: int
    booths: List[int]
    ea: EAPublic
    evm_ring: Tuple[GroupElement, ...]
    po_ring: Tuple[GroupElement, ...]
    officers: Dict[int, PollingOfficerPublic]


def encode_public(m: int, ea: EAPublic, evm_ring, officers: List[PollingOfficerPublic]) -> Dict[str, Any]:
    return {
        "m": m,
        "ea_signing": _hex(ea.signing),
        "ea_encryption": _hex(ea.encryption),
        "evm_ring": [_hex(k) for k in evm_ring],
        "officers": [
            {"booth": po.booth, "key": _hex(po.key), "nonce_commitments": [_hex(r) for r in po.nonce_commitments]}
            for po in officers
        ],
    }


@decoding("election.json")
def decode_public(ctx: GroupContext, body: Dict[str, Any]) -> ElectionPublic:
    officers = {}
    for entry in body["officers"]:
        officers[entry["booth"]] = PollingOfficerPublic(
            entry["booth"],
            ctx.element_from_bytes(from_hex(entry["key"], "key")),
            tuple(ctx.element_from_bytes(from_hex(r, "nonce_commitment")) for r in entry["nonce_commitments"]),
        )
    booths = sorted(officers)
    return ElectionPublic(
        m=body["m"],
        booths=booths,
        ea=EAPublic(ctx.element_from_bytes(from_hex(body["ea_signing"], "ea_signing")),
                    ctx.element_from_bytes(from_hex(body["ea_encryption"], "ea_encryption"))),
        evm_ring=tuple(ctx.element_from_bytes(from_hex(k, "evm_ring")) for k in body["evm_ring"]),
        po_ring=tuple(officers[b].key for b in booths),
        officers=officers,
    )


def encode_private_keys(ea_keys: EAKeys, officers: Dict[int, PollingOfficer],
                        evm_keys: Dict[int, KeyPair]) -> Dict[str, Any]:
    return {
        "ea_signing": _hex(ea_keys.signing.secret),
        "ea_encryption": _hex(ea_keys.encryption.secret),
        "officers": [
            {"booth": b, "secret": _hex(officers[b].keys.secret), "nonces": [_hex(k) for k in officers[b].nonces]}
            for b in sorted(officers)
        ],
        "evms": [{"booth": b, "secret": _hex(evm_keys[b].secret)} for b in sorted(evm_keys)],
    }


@decoding("private/keys.json")
def decode_private_keys(ctx: GroupContext, body: Dict[str, Any]
                        ) -> Tuple[EAKeys, Dict[int, PollingOfficer], Dict[int, KeyPair]]:
    def secret(text: str) -> KeyPair:
        return keypair_from_secret(ctx, ctx.scalar_from_bytes(from_hex(text, "secret")))

    ea_keys = EAKeys(secret(body["ea_signing"]), secret(body["ea_encryption"]))
    officers = {
        entry["booth"]: PollingOfficer(
            ctx, entry["booth"], secret(entry["secret"]),
            [ctx.scalar_from_bytes(from_hex(k, "nonce")) for k in entry["nonces"]],
        )
        for entry in body["officers"]
    }
    evm_keys = {entry["booth"]: secret(entry["secret"]) for entry in body["evms"]}
    return ea_keys, officers, evm_keys


# Tokens and the issuance registry

def encode_tokens(booth: int, tokens: List[Token]) -> Dict[str, Any]:
    return {"booth": booth, "tokens": [_hex(t.to_bytes()) for t in tokens]}


@decoding("token file")
def decode_tokens(ctx: GroupContext, body: Dict[str, Any]) -> Tuple[int, List[Token]]:
    booth = body["booth"]
    return booth, [Token.from_bytes(ctx, from_hex(t, "token"), booth) for t in body["tokens"]]


def encode_registry(registry: TokenRegistry) -> Dict[str, Any]:
    entries = []
    for brid, issued in sorted(registry.items(), key=lambda item: (item[1].booth, item[1].nonce_index)):
        entries.append({
            "brid": brid.hex(),
            "booth": issued.booth,
            "token_id": issued.token_id,
            "rid": _hex(issued.rid),
            "r_I": _hex(issued.r_I),
            "u": _hex(issued.u),
            "r_u": _hex(issued.r_u),
            "blinding": _hex(issued.blinding),
            "p_ik": _hex(issued.p_ik),
            "nonce_index": issued.nonce_index,
            "c_rid": _hex(issued.c_rid),
            "c_u": _hex(issued.c_u),
            "signature": _hex(issued.signature),
        })
    return {"tokens": entries, "audited": sorted(registry.audited)}


@decoding("private/registry.json")
def decode_registry(ctx: GroupContext, body: Dict[str, Any]) -> TokenRegistry:
    registry = TokenRegistry()
    for entry in body["tokens"]:
        r = _Reader(ctx, entry)
        registry.register(r.raw("brid"), IssuedToken(
            booth=r.integer("booth"),
            token_id=entry["token_id"],
            rid=r.scalar("rid"),
            r_I=r.scalar("r_I"),
            u=r.scalar("u"),
            r_u=r.scalar("r_u"),
            blinding=BlindingFactor.from_bytes(ctx, r.raw("blinding")),
            p_ik=r.element("p_ik"),
            nonce_index=r.integer("nonce_index"),
            c_rid=r.commitment("c_rid"),
            c_u=r.commitment("c_u"),
            signature=SchnorrSignature.from_bytes(ctx, r.raw("signature")),
        ))
    for token_id in body["audited"]:
        registry.mark_audited(token_id)
    return registry


# Polling: machine records, officer printouts and voter receipts

def encode_record(record: EncryptedRecord) -> Dict[str, Any]:
    return {
        "brid": record.brid.hex(),
        "h": record.h.hex(),
        "ciphertext": _hex(record.ciphertext),
        "ack": _hex(record.ack) if record.ack is not None else None,
    }


def decode_record(ctx: GroupContext, entry: Dict[str, Any]) -> EncryptedRecord:
    r = _Reader(ctx, entry)
    ack = BlindedSignature.from_bytes(ctx, r.raw("ack")) if entry.get("ack") else None
    return EncryptedRecord(r.raw("brid"), RecordHash(r.raw("h")),
                           HybridCiphertext.from_bytes(ctx, r.raw("ciphertext")), ack)


def encode_receipt(receipt: VoterReceipt) -> Dict[str, Any]:
    evm = receipt.evm_receipt
    return {
        "token_remnant": _hex(receipt.token_remnant.to_bytes()),
        "c_rid": _hex(evm.c_rid),
        "c_v": _hex(evm.c_v),
        "w": str(evm.proof.w),
        "w_prime": evm.proof.w_prime,
        "r_w": _hex(evm.proof.r_w),
        "signature": _hex(evm.signature),
    }


def decode_receipt(ctx: GroupContext, entry: Dict[str, Any]) -> VoterReceipt:
    r = _Reader(ctx, entry)
    proof = VoteProof(int(entry["w"]), r.integer("w_prime"), r.scalar("r_w"))
    return VoterReceipt(
        TokenCommitments.from_bytes(ctx, r.raw("token_remnant")),
        EvmReceipt(r.commitment("c_rid"), r.commitment("c_v"), proof, r.ring_signature("signature")),
    )


@dataclass
class PollingRecord:
    """One booth's polling output as stored between run-election and close"""
    booth: int
    records: List[EncryptedRecord]
    printouts: List[AckPrintout]
    evm_flags: List[str]
    receipts: List[Dict[str, Any]]


def encode_polling(booth: int, records: List[EncryptedRecord], printouts: List[AckPrintout],
                   evm_flags: List[str], voters: List[Tuple[int, Optional[VoterReceipt], bool, Optional[str]]]
                   ) -> Dict[str, Any]:
    return {
        "booth": booth,
        "records": [encode_record(r) for r in records],
        "printouts": [{"brid": p.brid.hex(), "signature": _hex(p.signature)} for p in printouts],
        "evm_flags": list(evm_flags),
        "receipts": [
            {
                "voter": voter,
                "receipt": encode_receipt(receipt) if receipt is not None else None,
                "acknowledged": acknowledged,
                "error": error,
            }
            for voter, receipt, acknowledged, error in voters
        ],
    }


@decoding("polling record")
def decode_polling(ctx: GroupContext, body: Dict[str, Any]) -> PollingRecord:
    printouts = [
        AckPrintout(from_hex(p["brid"], "brid"), BlindedSignature.from_bytes(ctx, from_hex(p["signature"], "ack")))
        for p in body["printouts"]
    ]
    return PollingRecord(
        booth=body["booth"],
        records=[decode_record(ctx, r) for r in body["records"]],
        printouts=printouts,
        evm_flags=list(body["evm_flags"]),
        receipts=list(body["receipts"]),
    )


@decoding("voter receipt")
def receipt_for(ctx: GroupContext, polling: PollingRecord, voter: int) -> Optional[VoterReceipt]:
    """
    Raises:
        KeyError (as ArtifactCorruptError): If the booth has no such voter
    """
    for entry in polling.receipts:
        if entry["voter"] == voter:
            return decode_receipt(ctx, entry["receipt"]) if entry["receipt"] is not None else None
    raise KeyError(f"booth {polling.booth} has no voter {voter}")


def encode_ledger(ledger: BoothLedger) -> Dict[str, Any]:
    return {
        "booth": ledger.booth,
        "records": [encode_record(r) for r in ledger.records],
        "aggregate": ledger.aggregate.hex(),
        "count": ledger.count,
        "aggregate_signature": _hex(ledger.aggregate_signature),
        "count_signature": _hex(ledger.count_signature),
        "flags": list(ledger.flags),
    }


@decoding("booth ledger")
def decode_ledger(ctx: GroupContext, body: Dict[str, Any]) -> BoothLedger:
    r = _Reader(ctx, body)
    return BoothLedger(
        booth=r.integer("booth"),
        records=[decode_record(ctx, e) for e in body["records"]],
        aggregate=RecordHash(r.raw("aggregate")),
        count=r.integer("count"),
        aggregate_signature=r.ring_signature("aggregate_signature"),
        count_signature=r.ring_signature("count_signature"),
        flags=list(body["flags"]),
    )


# Collection and the authority's store

def encode_envelopes(envelopes: List[EncryptedRecordEnvelope]) -> Dict[str, Any]:
    return {"envelopes": [
        {"ciphertext": _hex(e.ciphertext), "brid": e.brid.hex(), "ack": _hex(e.sigma_ack_blinded)}
        for e in envelopes
    ]}


@decoding("collection/envelopes.json")
def decode_envelopes(ctx: GroupContext, body: Dict[str, Any]) -> List[EncryptedRecordEnvelope]:
    out = []
    for entry in body["envelopes"]:
        r = _Reader(ctx, entry)
        out.append(EncryptedRecordEnvelope(HybridCiphertext.from_bytes(ctx, r.raw("ciphertext")), r.raw("brid"),
                                           BlindedSignature.from_bytes(ctx, r.raw("ack"))))
    return out


def encode_store(store: EAStore) -> Dict[str, Any]:
    return {"records": [
        {
            "brid": rec.brid.hex(), "rid": _hex(rec.rid), "r_I": _hex(rec.r_I), "v": rec.v,
            "r_v": _hex(rec.r_v), "w": str(rec.w), "h": rec.h.hex(),
            "record_signature": _hex(rec.record_signature), "sigma_ack": _hex(rec.sigma_ack),
            "c_rid": _hex(rec.c_rid), "c_v": _hex(rec.c_v),
        }
        for rec in sorted(store.records, key=lambda rec: rec.rid.value)
    ]}


@decoding("private/ea_store.json")
def decode_store(ctx: GroupContext, m: int, body: Dict[str, Any]) -> EAStore:
    store = EAStore(m)
    for entry in body["records"]:
        r = _Reader(ctx, entry)
        store.add(EARecord(
            brid=r.raw("brid"), rid=r.scalar("rid"), r_I=r.scalar("r_I"), v=r.integer("v"), r_v=r.scalar("r_v"),
            w=int(entry["w"]), h=RecordHash(r.raw("h")), record_signature=r.ring_signature("record_signature"),
            sigma_ack=UnblindedSignature.from_bytes(ctx, r.raw("sigma_ack")),
            c_rid=r.commitment("c_rid"), c_v=r.commitment("c_v"),
        ))
    return store


def encode_flags(flags: List[AuditFlag], flagged_records: List[str]) -> Dict[str, Any]:
    return {"flags": [f.to_dict() for f in flags], "flagged_records": list(flagged_records)}


@decoding("audit/ea_flags.json")
def decode_flags(body: Dict[str, Any]) -> List[AuditFlag]:
    return [AuditFlag(f["record"], FlagReason(f["reason"]), f["detail"]) for f in body["flags"]]
