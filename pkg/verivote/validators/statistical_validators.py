"""
Statistical checks on the protocol's randomness.

These back the properties that cannot be checked row by row: how often
the rids of printed tokens land within m of each other, whether the w'
values on voters' receipts leak anything about their votes, and whether
the shuffler's permutations are uniform.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy import stats

from verivote.groups import GroupContext
from verivote.services.base import PollingOfficerPublic
from verivote.services.election_authority import rid_proximity_pairs
from verivote.services.shuffler import shuffle
from verivote.services.tokens import make_token
from verivote.sigkit import KeyPair
from verivote.utils.randomness import RandomSource


def birthday_collision_probability(n: int, q: int, m: int) -> float:
    """1 - exp(-n(n-1) / (q/m)): chance that some pair of n rids lies within m"""
    return float(-np.expm1(-n * (n - 1) * m / q))


@dataclass(frozen=True)
class CollisionEstimate:
    empirical: float
    expected: float
    trials: int

    @property
    def relative_error(self) -> float:
        return abs(self.empirical - self.expected) / self.expected if self.expected else math.inf


def rid_collision_rate(rid_samples: Sequence[Sequence[int]], q: int, m: int) -> CollisionEstimate:
    """Fraction of samples holding two rids closer than m on the cycle Z_q"""
    if not rid_samples:
        raise ValueError("at least one sample of rids is required")
    n = len(rid_samples[0])
    collided = sum(1 for rids in rid_samples if rid_proximity_pairs(list(rids), m, q))
    return CollisionEstimate(collided / len(rid_samples), birthday_collision_probability(n, q, m),
                             len(rid_samples))


def token_rid_collisions(ctx: GroupContext, ea_keys: KeyPair, po: PollingOfficerPublic, tokens_per_batch: int,
                         batches: int, m: int, rng: RandomSource) -> CollisionEstimate:
    """
    Print batches of real tokens for one booth and measure how often a
    batch holds two rids within m of each other.
    """
    samples = []
    for _ in range(batches):
        printed = [make_token(ctx, ea_keys, po, j, m, rng)[1] for j in range(tokens_per_batch)]
        samples.append([issued.rid.value for issued in printed])
    return rid_collision_rate(samples, ctx.q, m)


@dataclass(frozen=True)
class ReceiptFreenessResult:
    uniformity_p: float
    independence_p: float
    advantage: float
    sessions: int

    def passes(self, alpha: float = 0.01) -> bool:
        return self.uniformity_p > alpha and self.independence_p > alpha


def receipt_freeness_statistic(votes: Sequence[int], residues: Sequence[int], m: int) -> ReceiptFreenessResult:
    """
    Test that published w' values are uniform on Z_m and independent of v.

    The advantage is that of the best guesser of v from w' over always
    guessing the most common vote; it tends to zero when w' is independent
    of v.
    """
    if len(votes) != len(residues) or not votes:
        raise ValueError("votes and residues must be non-empty and of equal length")
    table = np.zeros((m, m), dtype=np.int64)
    for v, w_prime in zip(votes, residues):
        table[v, w_prime] += 1

    uniformity_p = float(stats.chisquare(table.sum(axis=0)).pvalue)

    observed = table[table.sum(axis=1) > 0]
    observed = observed[:, observed.sum(axis=0) > 0]
    if observed.shape[0] < 2 or observed.shape[1] < 2:
        independence_p = 1.0
    else:
        independence_p = float(stats.chi2_contingency(observed)[1])

    total = table.sum()
    best_guess = table.max(axis=0).sum() / total
    baseline = table.sum(axis=1).max() / total
    return ReceiptFreenessResult(uniformity_p, independence_p, float(best_guess - baseline), int(total))


@dataclass(frozen=True)
class ShuffleUniformity:
    counts: Dict[Tuple[int, ...], int]
    trials: int
    p_value: float

    @property
    def expected(self) -> float:
        return self.trials / len(self.counts)

    @property
    def sigma(self) -> float:
        p = 1 / len(self.counts)
        return math.sqrt(self.trials * p * (1 - p))

    def max_deviation(self) -> float:
        """Largest |count - expected| in units of sigma"""
        return max(abs(c - self.expected) for c in self.counts.values()) / self.sigma


def shuffle_uniformity(n_items: int, trials: int, rng: RandomSource) -> ShuffleUniformity:
    """Frequency of every permutation over repeated shuffles of range(n_items)"""
    counts = {perm: 0 for perm in itertools.permutations(range(n_items))}
    for _ in range(trials):
        counts[tuple(shuffle(list(range(n_items)), rng))] += 1
    p_value = float(stats.chisquare(np.array(list(counts.values()))).pvalue)
    return ShuffleUniformity(counts, trials, p_value)
