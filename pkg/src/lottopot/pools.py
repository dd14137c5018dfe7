"""Pool accounting and deterministic settlement of a single drawing.

All money here is in cents. Amounts that can be fractional (the prize pool is 40% of the
betting pool, a share of the Pools Fund, ...) are kept as exact `Fraction`s; only the
per-ticket prize of a pool-share tier is rounded, half-even, to a whole cent.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Union

from .rules import (
    FixedCash,
    FreePlayCredit,
    PoolShare,
    PrizeSchedule,
    Rollover,
    to_fraction,
)

Money = Union[int, Fraction]


class InfeasibleError(ValueError):
    """Fixed deductions exceed the prize pool."""


def _money(x: Fraction) -> Money:
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


def round_cents(x: Fraction) -> int:
    """Round an exact amount of cents to a whole cent, ties to even."""
    return round(Fraction(x))


@dataclass(frozen=True)
class CrowdOutcome:
    counts: Mapping[str, int]

    def __post_init__(self):
        if any(int(v) != v or v < 0 for v in self.counts.values()):
            raise ValueError("crowd tier counts must be non-negative integers")

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def get(self, name: str) -> int:
        return int(self.counts.get(name, 0))

    def check(self, schedule: PrizeSchedule, crowd_tickets: int | None = None) -> None:
        unknown = set(self.counts) - set(schedule.tier_names)
        if unknown:
            raise ValueError(f"outcome names unknown tiers: {sorted(unknown)}")
        if crowd_tickets is not None and self.total != crowd_tickets:
            raise ValueError(f"outcome counts sum to {self.total}, expected {crowd_tickets}")


@dataclass(frozen=True)
class PoolBreakdown:
    betting_pool: Money
    prize_pool: Money
    fixed_deductions: Money
    pools_fund: Money


@dataclass(frozen=True)
class TierSettlement:
    name: str
    crowd_tickets: int
    syndicate_tickets: int
    pool: Money  # amount set aside for a pool-share tier (before per-ticket rounding)
    per_ticket: int
    crowd_payout: int
    syndicate_payout: int
    residue: Money  # pool minus what was paid out, from per-ticket rounding
    carried: Money  # pool-share money nobody won, plus rollover shares


@dataclass(frozen=True)
class SettlementReport:
    breakdown: PoolBreakdown
    tiers: tuple[TierSettlement, ...]
    carryover: int
    guarantee_topup: Money
    syndicate_free_plays: int
    crowd_free_plays: int
    free_play_charges: Money
    cost: int
    gain: int
    exact_gain: Fraction  # gain with pool-share tiers split exactly, no cent rounding

    @property
    def syndicate_payout(self) -> int:
        return sum(t.syndicate_payout for t in self.tiers)

    @property
    def crowd_payout(self) -> int:
        return sum(t.crowd_payout for t in self.tiers)

    @property
    def residue(self) -> Money:
        return _money(sum((Fraction(t.residue) for t in self.tiers), Fraction(0)))

    @property
    def carried(self) -> Money:
        return _money(sum((Fraction(t.carried) for t in self.tiers), Fraction(0)))

    def tier(self, name: str) -> TierSettlement:
        for row in self.tiers:
            if row.name == name:
                return row
        raise KeyError(name)

    def conservation_gap(self) -> Fraction:
        """Money in minus money accounted for; zero when every cent is tracked."""
        money_in = self.carryover + Fraction(self.guarantee_topup) + Fraction(self.breakdown.prize_pool)
        money_out = (self.crowd_payout + self.syndicate_payout + Fraction(self.residue)
                     + Fraction(self.carried) + Fraction(self.free_play_charges))
        return money_in - money_out


def betting_pool(schedule: PrizeSchedule, crowd_tickets, free_fraction=0, syndicate_covers: bool = True) -> Money:
    """Cash wagered: every syndicate ticket plus the crowd's paid (non-free) tickets."""
    f = to_fraction(free_fraction)
    c = to_fraction(crowd_tickets)
    if c < 0 or not 0 <= f < 1:
        raise ValueError("need crowd_tickets >= 0 and 0 <= free_fraction < 1")
    tickets = (schedule.total_tickets if syndicate_covers else 0) + c * (1 - f)
    return _money(schedule.ticket_price_cents * tickets)


def prize_pool(schedule: PrizeSchedule, betting: Money) -> Money:
    return _money(Fraction(betting) * (1 - schedule.take))


def fixed_deductions(schedule: PrizeSchedule, outcome: CrowdOutcome | None, include_syndicate: bool = False) -> Money:
    """Fixed-cash prizes plus free-play charges against the prize pool."""
    sizes = schedule.sizes()
    total = 0
    for tier in schedule.tiers:
        holders = outcome.get(tier.name) if outcome is not None else 0
        if include_syndicate:
            holders += sizes[tier.name]
        total += tier.deduction_cents * holders
    return total


def syndicate_fixed_deductions(schedule: PrizeSchedule) -> int:
    return fixed_deductions(schedule, None, include_syndicate=True)


def pools_fund(prize: Money, deductions: Money) -> Money:
    fund = Fraction(prize) - Fraction(deductions)
    if fund < 0:
        raise InfeasibleError("fixed deductions exceed prize pool")
    return _money(fund)


def settle(schedule: PrizeSchedule, carryover_cents: int, crowd_tickets: int, free_fraction,
           outcome: CrowdOutcome) -> SettlementReport:
    """Settle one drawing in which the syndicate holds one of every ticket."""
    outcome.check(schedule, crowd_tickets)
    sizes = schedule.sizes()
    bp = betting_pool(schedule, crowd_tickets, free_fraction, True)
    pp = Fraction(prize_pool(schedule, bp))
    deductions = fixed_deductions(schedule, outcome, include_syndicate=True)
    fund = Fraction(pools_fund(pp, deductions))
    jackpot = schedule.jackpot_tier()

    rows = []
    topup = Fraction(0)
    exact_syndicate = Fraction(0)
    synd_free = crowd_free = 0
    free_charges = 0
    for tier in schedule.tiers:
        n_crowd = outcome.get(tier.name)
        n_synd = sizes[tier.name]
        alloc = tier.allocation
        pool = Fraction(0)
        per_ticket = crowd_pay = synd_pay = 0
        residue = carried = Fraction(0)
        if isinstance(alloc, PoolShare):
            pool = alloc.fraction * fund
            if tier is jackpot:
                pool += carryover_cents
                if schedule.jackpot_guarantee_cents is not None and pool < schedule.jackpot_guarantee_cents:
                    topup = schedule.jackpot_guarantee_cents - pool
                    pool = Fraction(schedule.jackpot_guarantee_cents)
            winners = n_crowd + n_synd
            if winners == 0:
                carried = pool
            else:
                per_ticket = round_cents(pool / winners)
                crowd_pay = per_ticket * n_crowd
                synd_pay = per_ticket * n_synd
                residue = pool - per_ticket * winners
                exact_syndicate += pool * n_synd / winners
        elif isinstance(alloc, Rollover):
            pool = carried = alloc.fraction * fund
        elif isinstance(alloc, FixedCash):
            per_ticket = alloc.amount_cents
            crowd_pay = per_ticket * n_crowd
            synd_pay = per_ticket * n_synd
            exact_syndicate += synd_pay
        elif isinstance(alloc, FreePlayCredit):
            synd_free += n_synd
            crowd_free += n_crowd
            free_charges += alloc.deduction_cents * (n_crowd + n_synd)
        rows.append(TierSettlement(tier.name, n_crowd, n_synd, _money(pool), per_ticket, crowd_pay,
                                   synd_pay, _money(residue), _money(carried)))

    cost = schedule.ticket_price_cents * schedule.total_tickets
    report = SettlementReport(
        breakdown=PoolBreakdown(bp, _money(pp), deductions, _money(fund)),
        tiers=tuple(rows),
        carryover=carryover_cents,
        guarantee_topup=_money(topup),
        syndicate_free_plays=synd_free,
        crowd_free_plays=crowd_free,
        free_play_charges=free_charges,
        cost=cost,
        gain=sum(r.syndicate_payout for r in rows) - cost,
        exact_gain=exact_syndicate - cost,
    )
    return report


def expected_outcome(schedule: PrizeSchedule, crowd_tickets: int) -> CrowdOutcome:
    """Mean multinomial tier counts, rounded by largest remainder so they sum to c."""
    t = schedule.total_tickets
    raw = {name: Fraction(crowd_tickets * size, t) for name, size in schedule.sizes().items()}
    counts = {name: int(v) for name, v in raw.items()}
    short = crowd_tickets - sum(counts.values())
    by_remainder = sorted(raw, key=lambda name: (raw[name] - counts[name], name), reverse=True)
    for name in by_remainder[:short]:
        counts[name] += 1
    return CrowdOutcome(counts)


# --- scenario files -------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    carryover_cents: int
    crowd_tickets: int
    free_fraction: Fraction = Fraction(0)
    outcome: Union[CrowdOutcome, str, None] = None  # counts, "expected" or "sample"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "free_fraction", to_fraction(self.free_fraction))
        if self.carryover_cents < 0 or self.crowd_tickets < 0:
            raise ValueError("carryover and crowd size must be non-negative")
        if not 0 <= self.free_fraction < 1:
            raise ValueError("free_fraction must lie in [0, 1)")


def scenario_from_dict(data: dict) -> Scenario:
    outcome = data.get("outcome")
    if isinstance(outcome, dict):
        outcome = CrowdOutcome({str(k): int(v) for k, v in outcome.items()})
    elif outcome not in (None, "expected", "sample"):
        raise ValueError(f"outcome must be a mapping, 'expected' or 'sample', not {outcome!r}")
    return Scenario(
        carryover_cents=int(data["carryover_cents"]),
        crowd_tickets=int(data["crowd_tickets"]),
        free_fraction=to_fraction(str(data.get("free_fraction", 0))),
        outcome=outcome,
        seed=int(data.get("seed", 0)),
    )


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def resolve_outcome(schedule: PrizeSchedule, scenario: Scenario) -> CrowdOutcome:
    if isinstance(scenario.outcome, CrowdOutcome):
        return scenario.outcome
    if scenario.outcome == "sample":
        from .montecarlo import rng_for, sample_crowd_outcome

        return sample_crowd_outcome(schedule, scenario.crowd_tickets, rng_for(scenario.seed))
    return expected_outcome(schedule, scenario.crowd_tickets)
