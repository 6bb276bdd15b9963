"""
Counting BB3.
"""

from dataclasses import dataclass
from typing import List, Sequence

from verivote.errors import VerivoteError
from verivote.services.election_authority import BB3Row


class BoardError(VerivoteError):
    """Base exception for malformed bulletin boards"""
    pass


class InvalidBoardError(BoardError):
    """Raised when a board row violates the table's constraints"""
    pass


@dataclass(frozen=True)
class TallyResult:
    counts: List[int]
    total: int

    @property
    def m(self) -> int:
        return len(self.counts)

    def to_lines(self) -> List[str]:
        lines = [f"candidate {j}: {n}" for j, n in enumerate(self.counts)]
        lines.append(f"total: {self.total}")
        return lines


def tally(bb3: Sequence[BB3Row], m: int) -> TallyResult:
    """
    Raises:
        InvalidBoardError: If any row carries a vote outside [0, m)
    """
    counts = [0] * m
    for row in bb3:
        if not 0 <= row.v < m:
            raise InvalidBoardError(f"vote {row.v} outside [0, {m})", field="v", value=row.v)
        counts[row.v] += 1
    return TallyResult(counts, len(bb3))
