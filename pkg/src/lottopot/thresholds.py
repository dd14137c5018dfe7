"""Carryover thresholds for target returns, design-factor variants and the summary tables."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from scipy.optimize import bisect

from .expectation import (
    FAIR_SPLIT_MIN_SIZE,
    ev_share,
    expected_gain,
    mu,
    nu,
    prize_pool_dollars,
    pure_jackpot_expected_gain,
)
from .rules import (
    FixedCash,
    FreePlayCredit,
    Nothing,
    PoolShare,
    PrizeSchedule,
    PrizeTier,
    Rollover,
    canadian_649,
    to_fraction,
)

BRACKET_HI = 1e8  # dollars, i.e. 10**10 cents


class NoSolutionError(ValueError):
    pass


@dataclass(frozen=True)
class ThresholdQuery:
    schedule: PrizeSchedule
    crowd_tickets: float
    free_fraction: float = 0.10
    target_return: float = 0.0

    def __post_init__(self):
        if self.target_return < -1:
            raise ValueError("target_return must be >= -1")


def _solve_affine(gain_at, slope: float, target: float, what: str) -> float:
    """Smallest non-negative carryover with gain_at(a) >= target; gain is affine in a with `slope`.

    The closed form is checked against a bisection to one cent.
    """
    if slope <= 0:
        raise NoSolutionError(f"{what}: gain does not depend on the carryover")
    closed = (target - gain_at(0.0)) / slope
    if -0.01 < closed < 0:
        closed = 0.0

    def excess(a):
        return gain_at(a) - target

    if excess(0.0) >= 0:
        return 0.0  # target met without any carryover
    if excess(BRACKET_HI) < 0:
        raise NoSolutionError(f"{what}: threshold above ${BRACKET_HI:,.0f}")
    bisected = bisect(excess, 0.0, BRACKET_HI, xtol=0.01, maxiter=200)
    if abs(bisected - closed) > 1.0:
        raise ArithmeticError(f"{what}: closed form {closed:.2f} and bisection {bisected:.2f} disagree")
    return closed


def solve_carryover(query: ThresholdQuery, fair_split_min_size: int = FAIR_SPLIT_MIN_SIZE) -> float:
    """Smallest carryover (dollars) giving the target expected return on the covering cost."""
    s = query.schedule
    cost = s.ticket_price_cents * s.total_tickets / 100
    c, f = query.crowd_tickets, query.free_fraction

    def gain_at(a):
        return expected_gain(s, a, c, f, fair_split_min_size).expected_gain

    slope = ev_share(1, c / s.total_tickets) if s.jackpot_tier() is not None else 0.0
    return _solve_affine(gain_at, slope, query.target_return * cost, "solve_carryover")


def solve_carryover_pure(t: int, c: float, f: float, take: float, price: float, target: float) -> float:
    def gain_at(a):
        return pure_jackpot_expected_gain(t, a, c, f, take, price)

    return _solve_affine(gain_at, ev_share(1, c / t), target * price * t, "solve_carryover_pure")


# --- design factors -------------------------------------------------------

@dataclass(frozen=True)
class DesignFactor:
    kind: str  # identity | set_take | remove_fixed | remove_mid_pool | remove_free_play
    take: float | None = None
    mid_pool_mode: str = "reassign"  # or "lapse": freed shares roll over to the next draw
    label: str = ""

    @classmethod
    def identity(cls, label="CURRENT 6/49"):
        return cls("identity", label=label)

    @classmethod
    def set_take(cls, take, label=None):
        return cls("set_take", take=take, label=label or f"TAKE={take:.2f}")

    @classmethod
    def remove_fixed(cls, label="NO 2/6+, 3/6"):
        return cls("remove_fixed", label=label)

    @classmethod
    def remove_mid_pool(cls, mode="reassign", label="NO 4/6, 5/6"):
        return cls("remove_mid_pool", mid_pool_mode=mode, label=label)

    @classmethod
    def remove_free_play(cls, label="NO FREE PLAY"):
        return cls("remove_free_play", label=label)


def apply_design_factor(schedule: PrizeSchedule, factor: DesignFactor) -> PrizeSchedule:
    if factor.kind == "identity":
        return schedule
    if factor.kind == "set_take":
        return schedule.with_tiers(schedule.tiers, take=to_fraction(factor.take))
    if factor.kind == "remove_fixed":
        return schedule.with_tiers(
            PrizeTier(t.name, t.match, Nothing()) if isinstance(t.allocation, FixedCash) else t
            for t in schedule.tiers)
    if factor.kind == "remove_free_play":
        return schedule.with_tiers(
            PrizeTier(t.name, t.match, Nothing()) if isinstance(t.allocation, FreePlayCredit) else t
            for t in schedule.tiers)
    if factor.kind == "remove_mid_pool":
        if factor.mid_pool_mode not in ("reassign", "lapse"):
            raise ValueError(f"unknown mid_pool_mode {factor.mid_pool_mode!r}")
        jackpot = schedule.jackpot_tier()
        if jackpot is None:
            raise ValueError("schedule has no jackpot tier")
        freed = sum((t.allocation.fraction for t in schedule.tiers
                     if isinstance(t.allocation, PoolShare) and t is not jackpot), Fraction(0))
        tiers = []
        for t in schedule.tiers:
            if t is jackpot and factor.mid_pool_mode == "reassign":
                t = PrizeTier(t.name, t.match, PoolShare(t.allocation.fraction + freed))
            elif t is not jackpot and isinstance(t.allocation, PoolShare):
                # lapse: the whole freed share rolls over via the first tier removed
                if factor.mid_pool_mode == "lapse" and freed:
                    t = PrizeTier(t.name, t.match, Rollover(freed))
                    freed = Fraction(0)
                else:
                    t = PrizeTier(t.name, t.match, Nothing())
            tiers.append(t)
        return schedule.with_tiers(tiers)
    raise ValueError(f"unknown design factor {factor.kind!r}")


# --- tables ---------------------------------------------------------------

MILLION = 1e6
DEFAULT_CROWD_TICKETS = tuple(k * 10 * MILLION / 3 for k in range(1, 11))
DEFAULT_GROSS_BETS = tuple(d * MILLION for d in (20, 40, 60, 80, 100))
DEFAULT_FACTORS = (
    DesignFactor.set_take(0.55),
    DesignFactor.identity(),
    DesignFactor.set_take(0.65),
    DesignFactor.remove_fixed(),
    DesignFactor.remove_mid_pool(),
    DesignFactor.remove_free_play(),
)


@dataclass
class Table:
    title: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)


def table_thresholds(schedule: PrizeSchedule | None = None, crowd_tickets: Sequence[float] = DEFAULT_CROWD_TICKETS,
                     free_fraction: float = 0.10, targets: Sequence[float] = (0.0, 0.10, 0.20)) -> Table:
    schedule = schedule or canadian_649()
    price = schedule.ticket_price_cents / 100
    table = Table(
        "Carryover thresholds for buying the pot",
        ["crowd_tickets_m", "crowd_bet_m"] + [_target_label(r) for r in targets]
        + ["expected_pools_fund_m", "fund_over_prize_pool_pct", "ev56plus_pct"],
    )
    for c in crowd_tickets:
        fund = mu(schedule, c, free_fraction)
        row = [c / MILLION, c * price * (1 - free_fraction) / MILLION]
        row += [solve_carryover(ThresholdQuery(schedule, c, free_fraction, r)) / MILLION for r in targets]
        row += [fund / MILLION, 100 * fund / prize_pool_dollars(schedule, c, free_fraction),
                100 * nu(c, schedule.game)]
        table.rows.append(row)
    return table


def table_pure_vs_649(schedule: PrizeSchedule | None = None, crowd_tickets: Sequence[float] = DEFAULT_CROWD_TICKETS,
                      free_fraction: float = 0.10, targets: Sequence[float] = (0.0, 0.10, 0.20)) -> Table:
    schedule = schedule or canadian_649()
    price = schedule.ticket_price_cents / 100
    t = schedule.total_tickets
    take = float(schedule.take)
    table = Table(
        "Carryover thresholds: pure jackpot lottery vs 6/49",
        ["crowd_tickets_m", "crowd_bet_m"] + [f"pure_{_target_label(r)}" for r in targets]
        + [f"lotto_{_target_label(r)}" for r in targets],
    )
    for c in crowd_tickets:
        row = [c / MILLION, c * price * (1 - free_fraction) / MILLION]
        row += [solve_carryover_pure(t, c, free_fraction, take, price, r) / MILLION for r in targets]
        row += [solve_carryover(ThresholdQuery(schedule, c, free_fraction, r)) / MILLION for r in targets]
        table.rows.append(row)
    return table


def table_design_factors(schedule: PrizeSchedule | None = None, gross_bets: Sequence[float] = DEFAULT_GROSS_BETS,
                         factors: Sequence[DesignFactor] = DEFAULT_FACTORS, free_fraction: float = 0.10) -> Table:
    """Breakeven thresholds per design factor; gross_bets are crowd dollars before free plays."""
    schedule = schedule or canadian_649()
    price = schedule.ticket_price_cents / 100
    columns = ["design_factor"]
    for i, bet in enumerate(gross_bets):
        columns.append(f"{bet / MILLION:g}m")
        if i == 0:
            columns.append(f"{bet / MILLION:g}m_diff")
    table = Table("Breakeven carryover thresholds for design factors", columns)
    if not gross_bets:
        return table

    def breakeven(s, bet):
        return solve_carryover(ThresholdQuery(s, bet / price, free_fraction, 0.0)) / MILLION

    baseline = breakeven(schedule, gross_bets[0])
    for factor in factors:
        variant = apply_design_factor(schedule, factor)
        values = [breakeven(variant, bet) for bet in gross_bets]
        row = [factor.label or factor.kind, values[0], values[0] - baseline] + values[1:]
        table.rows.append(row)
    return table


def emit_table(which: str, **grid) -> Table:
    """Build one of the summary tables: thresholds (5), pure_vs_649 (6), design_factors (7)."""
    builders = {
        "thresholds": table_thresholds, "5": table_thresholds,
        "pure_vs_649": table_pure_vs_649, "6": table_pure_vs_649,
        "design_factors": table_design_factors, "7": table_design_factors,
    }
    try:
        builder = builders[str(which)]
    except KeyError:
        raise ValueError(f"unknown table {which!r}") from None
    return builder(**grid)


def _target_label(r: float) -> str:
    return "breakeven_m" if r == 0 else f"plus{round(100 * r)}pct_m"


def _fmt(value) -> str:
    return value if isinstance(value, str) else f"{value:.2f}"


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_text(table: Table) -> str:
    cells = [table.columns] + [[_fmt(v) for v in row] for row in table.rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(table.columns))]
    lines = [table.title]
    for n, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) if i == 0 and isinstance(c, str) and not _numeric(c) else c.rjust(w)
                               for i, (c, w) in enumerate(zip(row, widths))))
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _numeric(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return not math.isnan(float(text))
