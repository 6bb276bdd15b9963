"""
Pedersen commitments C = g^rho h^r.

The scheme is perfectly hiding and computationally binding: two distinct
openings of the same commitment reveal log_g(h).
"""

from dataclasses import dataclass
from typing import List, Tuple

from verivote.groups import ContextMismatchError, GroupContext, GroupElement, Scalar
from verivote.groups.mock_backend import MockBackend
from verivote.groups.base import GroupError
from verivote.utils.randomness import RandomSource


@dataclass(frozen=True)
class Opening:
    """The committed message rho and the randomness r"""
    message: Scalar
    randomness: Scalar

    def __add__(self, other: "Opening") -> "Opening":
        return Opening(self.message + other.message, self.randomness + other.randomness)


@dataclass(frozen=True)
class Commitment:
    """A Pedersen commitment

    Multiplying two commitments commits to the sum of the messages with
    the sum of the randomness::

        commit(ctx, a, r) * commit(ctx, b, s) == commit(ctx, a + b, r + s)
    """

    element: GroupElement

    def __mul__(self, other: "Commitment") -> "Commitment":
        return combine(self, other)

    def __pow__(self, exponent) -> "Commitment":
        return Commitment(self.element ** exponent)

    def to_bytes(self) -> bytes:
        return self.element.to_bytes()

    @classmethod
    def from_bytes(cls, ctx: GroupContext, data: bytes) -> "Commitment":
        return cls(ctx.element_from_bytes(data))

    def __hash__(self):
        return hash(self.element)


def commit(ctx: GroupContext, message: Scalar, randomness: Scalar) -> Commitment:
    return Commitment(ctx.g ** message * ctx.h ** randomness)


def commit_random(ctx: GroupContext, message: Scalar, rng: RandomSource) -> Tuple[Commitment, Opening]:
    randomness = ctx.random_scalar(rng)
    return commit(ctx, message, randomness), Opening(message, randomness)


def verify_opening(ctx: GroupContext, c: Commitment, o: Opening) -> bool:
    try:
        return commit(ctx, o.message, o.randomness) == c
    except ContextMismatchError:
        return False


def combine(a: Commitment, b: Commitment) -> Commitment:
    """Homomorphic combination; raises ContextMismatchError across contexts"""
    return Commitment(a.element * b.element)


@dataclass(frozen=True)
class AlternativeOpening:
    opening: Opening
    implied_log_h: int


def binding_oracle(ctx: GroupContext, commitment: Commitment, opening: Opening) -> List[AlternativeOpening]:
    """
    Enumerate every other opening of a commitment (toy groups only).

    For each alternative (rho', r') the implied log_g(h) is
    (rho - rho') / (r' - r) mod q.

    Raises:
        GroupError: If the context is not a small mock group
    """
    backend = ctx.backend
    if not isinstance(backend, MockBackend) or ctx.q > 1 << 12:
        raise GroupError("binding oracle needs a small mock group")

    q = ctx.q
    results: List[AlternativeOpening] = []
    for rho in range(q):
        for r in range(q):
            if rho == opening.message.value and r == opening.randomness.value:
                continue
            candidate = Opening(ctx.scalar(rho), ctx.scalar(r))
            if commit(ctx, candidate.message, candidate.randomness) != commitment:
                continue
            delta_r = (r - opening.randomness.value) % q
            implied = ((opening.message.value - rho) * pow(delta_r, -1, q)) % q
            results.append(AlternativeOpening(candidate, implied))
    return results
