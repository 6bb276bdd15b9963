"""
On-disk formats for election artifacts.

Bulletin boards are text files: one header line, then one row per line
with pipe-separated hex fields::

    # verivote/1 board=bb3 backend=mock profile=test fingerprint=... element=32 scalar=32 m=5 rows=2 body_sha256=...
    0a1f...|00000003|0a22...|...

Every other artifact is JSON wrapped as {"header", "body", "body_sha256"}.
Readers compare the header with the parameters they expect and the hash
with the body they read, and refuse either mismatch.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, fields
from typing import Any, Callable, Dict, List, Sequence, Tuple

from verivote.groups import GroupContext, GroupError
from verivote.services.booth import BB1Row
from verivote.services.commitments import Commitment
from verivote.services.election_authority import BB2Row, BB3Row
from verivote.services.tally import TallyResult
from verivote.services.tokens import BB0Row
from verivote.sigkit import GroupSignature, RecordHash, SignatureError, UnblindedSignature
from verivote.storage.base import ArtifactCorruptError, ArtifactHeaderError
from verivote.utils.encoding import EncodingError, bytes_to_int, from_hex, int_to_bytes, small_int

FORMAT_VERSION = "verivote/1"
BOARD_NAMES = ("bb0", "bb1", "bb2", "bb3", "tally")

# w = u + v is kept unreduced; 64 bytes holds any u < q plus v
_W_WIDTH = 64


@dataclass(frozen=True)
class ArtifactHeader:
    kind: str
    backend: str
    profile: str
    fingerprint: str
    element: int
    scalar: int
    m: int

    @classmethod
    def for_context(cls, ctx: GroupContext, kind: str, m: int) -> "ArtifactHeader":
        return cls(kind, ctx.backend_id.value, ctx.profile.value, ctx.fingerprint,
                   ctx.element_width, ctx.scalar_width, m)

    def to_dict(self) -> Dict[str, Any]:
        return {"format": FORMAT_VERSION, **asdict(self)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ArtifactHeader":
        if data.get("format") != FORMAT_VERSION:
            raise ArtifactHeaderError(f"unsupported artifact format: {data.get('format')!r}")
        try:
            return cls(
                kind=str(data["kind"]), backend=str(data["backend"]), profile=str(data["profile"]),
                fingerprint=str(data["fingerprint"]), element=int(data["element"]),
                scalar=int(data["scalar"]), m=int(data["m"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ArtifactHeaderError(f"incomplete artifact header: {exc}") from exc

    def check(self, expected: "ArtifactHeader"):
        """
        Raises:
            ArtifactHeaderError: Naming every field that differs
        """
        mismatched = [
            f"{f.name}={getattr(self, f.name)} (expected {getattr(expected, f.name)})"
            for f in fields(self) if getattr(self, f.name) != getattr(expected, f.name)
        ]
        if mismatched:
            raise ArtifactHeaderError(f"{self.kind} header mismatch: " + ", ".join(mismatched))


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def canonical_json(body: Any) -> bytes:
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")


def wrap_json(header: ArtifactHeader, body: Any) -> str:
    return json.dumps(
        {"header": header.to_dict(), "body": body, "body_sha256": _sha256(canonical_json(body))},
        indent=2, sort_keys=True,
    ) + "\n"


def unwrap_json(text: str, expected: ArtifactHeader) -> Any:
    """
    Raises:
        ArtifactCorruptError: If the text is not a wrapped artifact or the hash differs
        ArtifactHeaderError: If the header differs from expected
    """
    try:
        doc = json.loads(text)
        header, body, digest = doc["header"], doc["body"], doc["body_sha256"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ArtifactCorruptError(f"{expected.kind} is not a wrapped artifact: {exc}") from exc
    ArtifactHeader.from_dict(header).check(expected)
    if _sha256(canonical_json(body)) != digest:
        raise ArtifactCorruptError(f"{expected.kind} body does not match its hash")
    return body


# Boards

def _header_line(header: ArtifactHeader, rows: int, digest: str) -> str:
    return (
        f"# {FORMAT_VERSION} board={header.kind} backend={header.backend} profile={header.profile} "
        f"fingerprint={header.fingerprint} element={header.element} scalar={header.scalar} "
        f"m={header.m} rows={rows} body_sha256={digest}"
    )


def _parse_header_line(line: str) -> Tuple[ArtifactHeader, int, str]:
    parts = line.split()
    if len(parts) < 2 or parts[0] != "#" or parts[1] != FORMAT_VERSION:
        raise ArtifactHeaderError("board header line is missing or has an unknown format")
    try:
        values = dict(part.split("=", 1) for part in parts[2:])
        header = ArtifactHeader(
            kind=values["board"], backend=values["backend"], profile=values["profile"],
            fingerprint=values["fingerprint"], element=int(values["element"]),
            scalar=int(values["scalar"]), m=int(values["m"]),
        )
        return header, int(values["rows"]), values["body_sha256"]
    except (KeyError, ValueError) as exc:
        raise ArtifactHeaderError(f"malformed board header: {exc}") from exc


def render_rows(header: ArtifactHeader, rows: Sequence[Sequence[bytes]]) -> str:
    body = "".join("|".join(field.hex() for field in row) + "\n" for row in rows)
    return _header_line(header, len(rows), _sha256(body.encode("ascii"))) + "\n" + body


def parse_rows(text: str, expected: ArtifactHeader, width: int) -> List[List[bytes]]:
    """
    Raises:
        ArtifactHeaderError: If the header line differs from expected
        ArtifactCorruptError: If the body hash, row count or a row is wrong
    """
    first, _, body = text.partition("\n")
    header, rows, digest = _parse_header_line(first)
    header.check(expected)
    if _sha256(body.encode("utf-8")) != digest:
        raise ArtifactCorruptError(f"{expected.kind} body does not match its hash")
    lines = body.splitlines()
    if len(lines) != rows:
        raise ArtifactCorruptError(f"{expected.kind} declares {rows} rows but holds {len(lines)}")
    parsed = []
    for n, line in enumerate(lines, start=1):
        cells = line.split("|")
        if len(cells) != width:
            raise ArtifactCorruptError(f"{expected.kind} row {n} has {len(cells)} fields, expected {width}")
        try:
            parsed.append([from_hex(cell, f"{expected.kind}[{n}]") for cell in cells])
        except EncodingError as exc:
            raise ArtifactCorruptError(f"{expected.kind} row {n}: {exc}") from exc
    return parsed


def _bb1_encode(row: BB1Row) -> List[bytes]:
    return [small_int(row.booth), row.aggregate.to_bytes(), row.aggregate_signature.to_bytes(),
            small_int(row.count), row.count_signature.to_bytes()]


def _bb1_decode(ctx: GroupContext, cells: List[bytes]) -> BB1Row:
    booth, aggregate, aggregate_sig, count, count_sig = cells
    return BB1Row(bytes_to_int(booth), RecordHash(aggregate), GroupSignature.from_bytes(ctx, aggregate_sig),
                  bytes_to_int(count), GroupSignature.from_bytes(ctx, count_sig))


def _bb3_encode(row: BB3Row) -> List[bytes]:
    return [row.rid.to_bytes(), small_int(row.v), row.rho.to_bytes(), row.h.to_bytes(),
            row.mu_h.to_bytes(), row.sigma_ack.to_bytes()]


def _bb3_decode(ctx: GroupContext, cells: List[bytes]) -> BB3Row:
    rid, v, rho, h, mu_h, sigma_ack = cells
    return BB3Row(ctx.scalar_from_bytes(rid), bytes_to_int(v), ctx.scalar_from_bytes(rho), RecordHash(h),
                  GroupSignature.from_bytes(ctx, mu_h), UnblindedSignature.from_bytes(ctx, sigma_ack))


_BoardCodec = Tuple[int, Callable[[Any], List[bytes]], Callable[[GroupContext, List[bytes]], Any]]

_BOARDS: Dict[str, _BoardCodec] = {
    "bb0": (1, lambda row: [row.key.to_bytes()],
            lambda ctx, cells: BB0Row(ctx.element_from_bytes(cells[0]))),
    "bb1": (5, _bb1_encode, _bb1_decode),
    "bb2": (2, lambda row: [row.c_rid.to_bytes(), int_to_bytes(row.w, _W_WIDTH)],
            lambda ctx, cells: BB2Row(Commitment.from_bytes(ctx, cells[0]), bytes_to_int(cells[1]))),
    "bb3": (6, _bb3_encode, _bb3_decode),
    "tally": (2, lambda row: [small_int(row[0]), small_int(row[1])],
              lambda ctx, cells: (bytes_to_int(cells[0]), bytes_to_int(cells[1]))),
}


def dump_board(ctx: GroupContext, name: str, m: int, rows: Sequence[Any]) -> str:
    _, encode, _ = _BOARDS[name]
    return render_rows(ArtifactHeader.for_context(ctx, name, m), [encode(row) for row in rows])


def load_board(ctx: GroupContext, name: str, m: int, text: str) -> List[Any]:
    """
    Parse a board file into its row type.

    Raises:
        ArtifactHeaderError: If the board was written for another context or m
        ArtifactCorruptError: If the body is altered or a value does not decode
    """
    width, _, decode = _BOARDS[name]
    cells = parse_rows(text, ArtifactHeader.for_context(ctx, name, m), width)
    try:
        return [decode(ctx, row) for row in cells]
    except (GroupError, SignatureError, EncodingError, ValueError) as exc:
        raise ArtifactCorruptError(f"{name} holds a value that does not decode: {exc}") from exc


def dump_tally(ctx: GroupContext, result: TallyResult) -> str:
    return dump_board(ctx, "tally", result.m, list(enumerate(result.counts)))


def load_tally(ctx: GroupContext, m: int, text: str) -> TallyResult:
    rows = load_board(ctx, "tally", m, text)
    counts = [0] * m
    for candidate, count in rows:
        if not 0 <= candidate < m:
            raise ArtifactCorruptError(f"tally row for candidate {candidate} outside [0, {m})")
        counts[candidate] = count
    return TallyResult(counts, sum(counts))
