"""Crowds that do not bet equiprobably: fixed-deduction expectations, the Jensen bound on
the crowd's fixed payouts, a lower bound on the syndicate's jackpot take, and exhaustive
checks that equiprobable betting is best for the crowd on tiny games.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .expectation import ev_share, fixed_charge_per_ticket
from .pools import syndicate_fixed_deductions
from .rules import PrizeSchedule, canadian_649

MAX_ENUM_SIZE = 8


@dataclass(frozen=True)
class CrowdWeights:
    """Probabilities q_1..q_t with which crowd members pick each ticket.

    Stored as blocks of (count, weight): `count` tickets each picked with probability
    `weight`. An explicit vector is a list of blocks of count 1; a full 6/49 weight vector
    never needs to be materialized.
    """

    blocks: tuple[tuple[int, float], ...]

    def __post_init__(self):
        blocks = tuple((int(n), w) for n, w in self.blocks if n > 0)
        object.__setattr__(self, "blocks", blocks)
        if any(w < 0 for _, w in blocks):
            raise ValueError("weights must be non-negative")
        total = math.fsum(n * float(w) for n, w in blocks)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total!r}, not 1")

    @classmethod
    def from_vector(cls, q: Sequence[float]) -> "CrowdWeights":
        return cls(tuple((1, w) for w in q))

    @classmethod
    def uniform(cls, t: int) -> "CrowdWeights":
        return cls(((t, Fraction(1, t)),))

    @classmethod
    def single_hot(cls, t: int, index: int = 0) -> "CrowdWeights":
        if not 0 <= index < t:
            raise ValueError("index out of range")
        return cls(((1, 1),) if t == 1 else ((index, 0), (1, 1), (t - index - 1, 0)))

    @classmethod
    def two_block(cls, t: int, popular_tickets: int, popular_mass: float) -> "CrowdWeights":
        """`popular_tickets` tickets share `popular_mass` of the bets; the rest share the remainder."""
        if not 0 < popular_tickets < t or not 0 <= popular_mass <= 1:
            raise ValueError("need 0 < popular_tickets < t and popular_mass in [0, 1]")
        m = Fraction(popular_mass) if isinstance(popular_mass, Fraction) else popular_mass
        return cls(((popular_tickets, m / popular_tickets), (t - popular_tickets, (1 - m) / (t - popular_tickets))))

    @property
    def dimension(self) -> int:
        return sum(n for n, _ in self.blocks)

    def functional_sum(self, fn: Callable[[float], float]) -> float:
        """Sum of fn(q_i) over all t tickets."""
        return math.fsum(n * fn(float(w)) for n, w in self.blocks)

    def to_vector(self) -> list:
        return [w for n, w in self.blocks for _ in range(n)]

    def is_uniform(self) -> bool:
        return len({float(w) for _, w in self.blocks}) == 1


def expected_fixed_deductions_uniform(c: float, schedule: PrizeSchedule | None = None) -> float:
    """Expected fixed and free-play charges (dollars) when the crowd bets equiprobably."""
    schedule = schedule or canadian_649()
    return fixed_charge_per_ticket(schedule) * c + syndicate_fixed_deductions(schedule) / 100


def jensen_check(q: CrowdWeights, c: float, charge_per_ticket: float | None = None) -> tuple[float, float]:
    """Both sides of the bound on the crowd's fixed payouts.

    lhs = H * sum_i (1 - exp(-c q_i)), rhs = H * t * (1 - exp(-c/t)); concavity gives lhs <= rhs.
    H defaults to the 6/49 fixed charge per ticket.
    """
    if charge_per_ticket is None:
        charge_per_ticket = fixed_charge_per_ticket(canadian_649())
    t = q.dimension
    lhs = charge_per_ticket * q.functional_sum(lambda w: -math.expm1(-c * w))
    rhs = charge_per_ticket * t * -math.expm1(-c / t)
    return lhs, rhs


def syndicate_jackpot_lower_bound(schedule: PrizeSchedule | None, a: float, c: float, f: float = 0.0) -> float:
    """Lower bound (dollars) on the syndicate's expected jackpot payout under the
    proportional-fixed-payouts crowd model.

    The whole fixed deduction, syndicate and crowd, is subtracted from the jackpot base
    rather than only the jackpot share of it; the bound is the looser for it.
    """
    schedule = schedule or canadian_649()
    jackpot = schedule.jackpot_tier()
    if jackpot is None:
        raise ValueError("schedule has no jackpot tier")
    t = schedule.total_tickets
    price = schedule.ticket_price_cents / 100
    per_ticket = float(jackpot.allocation.fraction) * (1 - float(schedule.take)) * price  # 0.954 for 6/49
    base = (a + per_ticket * (t + c * (1 - f)) - syndicate_fixed_deductions(schedule) / 100
            - c * fixed_charge_per_ticket(schedule))
    return base * ev_share(1, c / t)


def _compositions(total: int, parts: int):
    """All non-negative integer vectors of length `parts` summing to `total`."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 2 - prev)
        yield out


def _multinomial(counts) -> int:
    out, n = 1, 0
    for k in counts:
        n += k
        out *= math.comb(n, k)
    return out


def crowd_optimality_bruteforce(t_small: int, c_small: int, q) -> tuple[Fraction, Fraction]:
    """Exact E_q[X/(1+X)] and E_uniform[X/(1+X)], X the crowd's tickets on the drawn ticket.

    Every assignment of the c crowd tickets to the t tickets is enumerated (grouped by
    ticket-count vector with its multinomial multiplicity) against every equiprobable draw.
    Float weights are converted exactly, so the comparison is free of rounding.
    """
    if not (1 <= t_small <= MAX_ENUM_SIZE and 0 <= c_small <= MAX_ENUM_SIZE):
        raise ValueError(f"enumeration limited to t, c <= {MAX_ENUM_SIZE}")
    weights = q.to_vector() if isinstance(q, CrowdWeights) else list(q)
    if len(weights) != t_small:
        raise ValueError("weight vector length must equal t_small")
    qs = [Fraction(w) for w in weights]
    if sum(qs) != 1 and abs(float(sum(qs)) - 1) > 1e-12:
        raise ValueError("weights must sum to 1")
    qs = [w / sum(qs) for w in qs]
    uniform = [Fraction(1, t_small)] * t_small
    return _enumerate(t_small, c_small, qs), _enumerate(t_small, c_small, uniform)


def _enumerate(t: int, c: int, qs: list[Fraction]) -> Fraction:
    total = Fraction(0)
    for counts in _compositions(c, t):
        prob = Fraction(_multinomial(counts))
        for k, w in zip(counts, qs):
            if k:
                prob *= w**k
        if not prob:
            continue
        # each draw w is equally likely; X is the count on the drawn ticket
        total += prob * sum(Fraction(x, 1 + x) for x in counts) / t
    return total
