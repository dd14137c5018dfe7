"""Game structure, prize schedules and tier combinatorics for pick-k lotteries."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Union

BONUS_REQUIRED = "required"
BONUS_EXCLUDED = "excluded"
BONUS_ANY = "any"
_BONUS_MODES = (BONUS_REQUIRED, BONUS_EXCLUDED, BONUS_ANY)


class ScheduleError(ValueError):
    """Raised when a prize schedule cannot be loaded or is structurally invalid."""


def to_fraction(value) -> Fraction:
    """Exact rational for a decimal literal; floats go through their repr so 0.1 -> 1/10."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class GameStructure:
    field_size: int
    picks: int
    has_bonus: bool = True

    def __post_init__(self):
        if not 1 <= self.picks < self.field_size:
            raise ValueError(f"need 1 <= picks < field_size, got {self.picks}/{self.field_size}")
        if self.has_bonus and self.field_size - self.picks < 1:
            raise ValueError("no number left to draw as bonus")

    @property
    def total_tickets(self) -> int:
        return math.comb(self.field_size, self.picks)


@dataclass(frozen=True)
class MatchSpec:
    """Tickets with a main-number match count in `main_matches` and the given bonus status.

    `main_matches` is a tuple so that catch-all classes such as "No Win" (0 or 1 matches)
    can be a single tier.
    """

    main_matches: tuple[int, ...]
    bonus: str = BONUS_ANY

    def __init__(self, main_matches: Union[int, Iterable[int]], bonus: str = BONUS_ANY):
        if isinstance(main_matches, int):
            matches = (main_matches,)
        else:
            matches = tuple(sorted(set(int(m) for m in main_matches)))
        if not matches:
            raise ValueError("MatchSpec needs at least one match count")
        if min(matches) < 0:
            raise ValueError("match counts must be non-negative")
        if bonus not in _BONUS_MODES:
            raise ValueError(f"bonus must be one of {_BONUS_MODES}, got {bonus!r}")
        object.__setattr__(self, "main_matches", matches)
        object.__setattr__(self, "bonus", bonus)

    def accepts(self, matches: int, has_bonus: bool) -> bool:
        if matches not in self.main_matches:
            return False
        if self.bonus == BONUS_REQUIRED:
            return has_bonus
        if self.bonus == BONUS_EXCLUDED:
            return not has_bonus
        return True

    def label(self, picks: int) -> str:
        suffix = {BONUS_REQUIRED: "+", BONUS_EXCLUDED: "-", BONUS_ANY: ""}[self.bonus]
        return ",".join(f"{m}/{picks}{suffix}" for m in self.main_matches)


# Allocation rules. Money is integer cents throughout.

@dataclass(frozen=True)
class FixedCash:
    amount_cents: int
    kind = "fixed"


@dataclass(frozen=True)
class PoolShare:
    fraction: Fraction
    kind = "share"

    def __post_init__(self):
        object.__setattr__(self, "fraction", to_fraction(self.fraction))


@dataclass(frozen=True)
class FreePlayCredit:
    deduction_cents: int
    kind = "freeplay"


@dataclass(frozen=True)
class Rollover:
    """A Pools Fund share that is never paid out this draw and is carried forward."""

    fraction: Fraction
    kind = "rollover"

    def __post_init__(self):
        object.__setattr__(self, "fraction", to_fraction(self.fraction))


@dataclass(frozen=True)
class Nothing:
    kind = "nothing"


Allocation = Union[FixedCash, PoolShare, FreePlayCredit, Rollover, Nothing]


@dataclass(frozen=True)
class PrizeTier:
    name: str
    match: MatchSpec
    allocation: Allocation

    @property
    def deduction_cents(self) -> int:
        """Per-ticket charge against the prize pool (fixed cash or free-play credit)."""
        if isinstance(self.allocation, FixedCash):
            return self.allocation.amount_cents
        if isinstance(self.allocation, FreePlayCredit):
            return self.allocation.deduction_cents
        return 0

    @property
    def share(self) -> Fraction:
        if isinstance(self.allocation, (PoolShare, Rollover)):
            return self.allocation.fraction
        return Fraction(0)


@dataclass(frozen=True)
class PrizeSchedule:
    game: GameStructure
    tiers: tuple[PrizeTier, ...]
    ticket_price_cents: int
    take: Fraction
    jackpot_guarantee_cents: int | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))
        object.__setattr__(self, "take", to_fraction(self.take))

    @property
    def total_tickets(self) -> int:
        return self.game.total_tickets

    def tier(self, name: str) -> PrizeTier:
        for tier in self.tiers:
            if tier.name == name:
                return tier
        raise KeyError(name)

    @property
    def tier_names(self) -> list[str]:
        return [tier.name for tier in self.tiers]

    def jackpot_tier(self) -> PrizeTier | None:
        """The pool-share tier for a full match; this is where the carryover goes."""
        for tier in self.tiers:
            if self.game.picks in tier.match.main_matches and isinstance(tier.allocation, PoolShare):
                return tier
        return None

    def sizes(self) -> dict[str, int]:
        return {tier.name: tier_size(self.game, tier.match) for tier in self.tiers}

    def probabilities(self) -> dict[str, Fraction]:
        t = self.total_tickets
        return {name: Fraction(size, t) for name, size in self.sizes().items()}

    def with_tiers(self, tiers: Iterable[PrizeTier], **changes) -> "PrizeSchedule":
        return replace(self, tiers=tuple(tiers), **changes)


@dataclass(frozen=True)
class Ticket:
    numbers: frozenset[int]

    def __init__(self, numbers: Iterable[int]):
        object.__setattr__(self, "numbers", frozenset(numbers))

    def check(self, game: GameStructure) -> None:
        if len(self.numbers) != game.picks:
            raise ValueError(f"ticket needs {game.picks} distinct numbers, got {sorted(self.numbers)}")
        if min(self.numbers) < 1 or max(self.numbers) > game.field_size:
            raise ValueError(f"ticket numbers must lie in 1..{game.field_size}")


@dataclass(frozen=True)
class Draw:
    winning: frozenset[int]
    bonus: int | None = None

    def __init__(self, winning: Iterable[int], bonus: int | None = None):
        winning = frozenset(winning)
        if bonus is not None and bonus in winning:
            raise ValueError("bonus number cannot be one of the winning numbers")
        object.__setattr__(self, "winning", winning)
        object.__setattr__(self, "bonus", bonus)

    def check(self, game: GameStructure) -> None:
        Ticket(self.winning).check(game)
        if game.has_bonus:
            if self.bonus is None or self.bonus in self.winning or not 1 <= self.bonus <= game.field_size:
                raise ValueError("bonus must be a number in range not among the winning numbers")
        elif self.bonus is not None:
            raise ValueError("game has no bonus number")


def total_tickets(game: GameStructure) -> int:
    return game.total_tickets


def tier_size(game: GameStructure, match: MatchSpec) -> int:
    """Tickets falling in `match` for any fixed draw.

    For m main matches the remaining k-m numbers come from the n-k non-winning numbers,
    one of which is the bonus.
    """
    n, k = game.field_size, game.picks
    total = 0
    for m in match.main_matches:
        if m > k:
            continue
        rest = k - m
        if not game.has_bonus:
            total += math.comb(k, m) * math.comb(n - k, rest)
            continue
        without_bonus = math.comb(k, m) * math.comb(n - k - 1, rest)
        with_bonus = math.comb(k, m) * math.comb(n - k - 1, rest - 1) if rest >= 1 else 0
        if match.bonus == BONUS_EXCLUDED:
            total += without_bonus
        elif match.bonus == BONUS_REQUIRED:
            total += with_bonus
        else:
            total += without_bonus + with_bonus
    return total


def tier_probability(game: GameStructure, match: MatchSpec) -> float:
    return tier_size(game, match) / game.total_tickets


def classify(ticket: Ticket, draw: Draw, schedule: PrizeSchedule) -> PrizeTier:
    matches = len(ticket.numbers & draw.winning)
    got_bonus = draw.bonus is not None and draw.bonus in ticket.numbers
    for tier in schedule.tiers:
        if tier.match.accepts(matches, got_bonus):
            return tier
    raise ScheduleError(f"no tier covers {matches} matches (bonus={got_bonus})")


def validate_schedule(schedule: PrizeSchedule) -> list[str]:
    """Structural problems with `schedule`; an empty list means it is valid."""
    problems = []
    game = schedule.game
    if schedule.ticket_price_cents <= 0:
        problems.append("ticket price must be positive")
    if not 0 <= schedule.take < 1:
        problems.append(f"take {float(schedule.take)} outside [0, 1)")
    if schedule.jackpot_guarantee_cents is not None and schedule.jackpot_guarantee_cents < 0:
        problems.append("jackpot guarantee must be non-negative")

    names = [tier.name for tier in schedule.tiers]
    if len(set(names)) != len(names):
        problems.append("tier names are not unique")

    # Partition check by outcome class rather than by size, so overlaps are caught too.
    bonus_states = (False, True) if game.has_bonus else (False,)
    for m in range(game.picks + 1):
        for got_bonus in bonus_states:
            mode = (BONUS_REQUIRED if got_bonus else BONUS_EXCLUDED) if game.has_bonus else BONUS_ANY
            if tier_size(game, MatchSpec(m, mode)) == 0:
                continue
            covering = [t.name for t in schedule.tiers if t.match.accepts(m, got_bonus)]
            if len(covering) != 1:
                what = "uncovered" if not covering else f"covered by {covering}"
                problems.append(f"outcome {m}/{game.picks}{'+' if got_bonus else '-'} is {what}")
    for tier in schedule.tiers:
        if max(tier.match.main_matches) > game.picks:
            problems.append(f"tier {tier.name}: more matches than picks")
    sizes = schedule.sizes()
    if sum(sizes.values()) != game.total_tickets and not any("outcome" in p for p in problems):
        problems.append("tier sizes do not sum to total tickets")

    share_total = Fraction(0)
    for tier in schedule.tiers:
        alloc = tier.allocation
        if isinstance(alloc, FixedCash) and alloc.amount_cents < 0:
            problems.append(f"tier {tier.name}: negative fixed amount")
        if isinstance(alloc, FreePlayCredit) and alloc.deduction_cents < 0:
            problems.append(f"tier {tier.name}: negative free-play deduction")
        if isinstance(alloc, (PoolShare, Rollover)):
            if not 0 < alloc.fraction <= 1:
                problems.append(f"tier {tier.name}: share {float(alloc.fraction)} outside (0, 1]")
            share_total += alloc.fraction
    if share_total != 1 and any(isinstance(t.allocation, (PoolShare, Rollover)) for t in schedule.tiers):
        problems.append(f"pool shares sum to {float(share_total)} != 1")
    return problems


# --- rules files ----------------------------------------------------------

def _allocation_from_dict(data: dict) -> Allocation:
    kind = data.get("kind")
    if kind == "fixed":
        return FixedCash(int(data["value_cents"]))
    if kind == "share":
        return PoolShare(to_fraction(str(data["fraction"])))
    if kind == "freeplay":
        return FreePlayCredit(int(data["value_cents"]))
    if kind == "rollover":
        return Rollover(to_fraction(str(data["fraction"])))
    if kind == "nothing":
        return Nothing()
    raise ScheduleError(f"unknown allocation kind {kind!r}")


def _allocation_to_dict(alloc: Allocation) -> dict:
    if isinstance(alloc, FixedCash):
        return {"kind": "fixed", "value_cents": alloc.amount_cents}
    if isinstance(alloc, FreePlayCredit):
        return {"kind": "freeplay", "value_cents": alloc.deduction_cents}
    if isinstance(alloc, (PoolShare, Rollover)):
        return {"kind": alloc.kind, "fraction": float(alloc.fraction)}
    return {"kind": "nothing"}


def schedule_from_dict(data: dict) -> PrizeSchedule:
    try:
        g = data["game"]
        game = GameStructure(int(g["field_size"]), int(g["picks"]), bool(g.get("has_bonus", True)))
        tiers = []
        for entry in data["tiers"]:
            match = MatchSpec(entry["main_matches"], entry.get("bonus", BONUS_ANY))
            tiers.append(PrizeTier(entry["name"], match, _allocation_from_dict(entry["allocation"])))
        guarantee = data.get("jackpot_guarantee_cents")
        return PrizeSchedule(
            game=game,
            tiers=tuple(tiers),
            ticket_price_cents=int(data["ticket_price_cents"]),
            take=to_fraction(str(data["take"])),
            jackpot_guarantee_cents=None if guarantee is None else int(guarantee),
            name=data.get("name", ""),
        )
    except (KeyError, TypeError) as exc:
        raise ScheduleError(f"malformed rules document: {exc}") from exc


def schedule_to_dict(schedule: PrizeSchedule) -> dict:
    out = {
        "name": schedule.name,
        "game": {
            "field_size": schedule.game.field_size,
            "picks": schedule.game.picks,
            "has_bonus": schedule.game.has_bonus,
        },
        "ticket_price_cents": schedule.ticket_price_cents,
        "take": float(schedule.take),
    }
    if schedule.jackpot_guarantee_cents is not None:
        out["jackpot_guarantee_cents"] = schedule.jackpot_guarantee_cents
    out["tiers"] = [
        {
            "name": tier.name,
            "main_matches": tier.match.main_matches[0] if len(tier.match.main_matches) == 1 else list(tier.match.main_matches),
            "bonus": tier.match.bonus,
            "allocation": _allocation_to_dict(tier.allocation),
        }
        for tier in schedule.tiers
    ]
    return out


def load_schedule(path: str | Path) -> PrizeSchedule:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScheduleError(f"{path}: not valid JSON ({exc})") from exc
    return schedule_from_dict(data)


# --- built-in schedules ---------------------------------------------------

def canadian_649() -> PrizeSchedule:
    """The 6/49 rules in force from September 2013: $3 tickets, 60% take."""
    game = GameStructure(49, 6, True)
    tiers = (
        PrizeTier("6/6", MatchSpec(6), PoolShare(Fraction("0.795"))),
        PrizeTier("5/6+", MatchSpec(5, BONUS_REQUIRED), PoolShare(Fraction("0.06"))),
        PrizeTier("5/6-", MatchSpec(5, BONUS_EXCLUDED), PoolShare(Fraction("0.05"))),
        PrizeTier("4/6", MatchSpec(4), PoolShare(Fraction("0.095"))),
        PrizeTier("3/6", MatchSpec(3), FixedCash(1000)),
        PrizeTier("2/6+", MatchSpec(2, BONUS_REQUIRED), FixedCash(500)),
        PrizeTier("2/6-", MatchSpec(2, BONUS_EXCLUDED), FreePlayCredit(141)),
        PrizeTier("No Win", MatchSpec((0, 1)), Nothing()),
    )
    return PrizeSchedule(game, tiers, ticket_price_cents=300, take=Fraction("0.60"),
                         jackpot_guarantee_cents=500_000_000, name="6/49 (2013)")


def canadian_649_1982() -> PrizeSchedule:
    """The original 1982-2004 rules: $1 tickets, 55% take, $10 for 3/6."""
    game = GameStructure(49, 6, True)
    tiers = (
        PrizeTier("6/6", MatchSpec(6), PoolShare(Fraction("0.50"))),
        PrizeTier("5/6+", MatchSpec(5, BONUS_REQUIRED), PoolShare(Fraction("0.15"))),
        PrizeTier("5/6-", MatchSpec(5, BONUS_EXCLUDED), PoolShare(Fraction("0.12"))),
        PrizeTier("4/6", MatchSpec(4), PoolShare(Fraction("0.23"))),
        PrizeTier("3/6", MatchSpec(3), FixedCash(1000)),
        PrizeTier("No Win", MatchSpec((0, 1, 2)), Nothing()),
    )
    return PrizeSchedule(game, tiers, ticket_price_cents=100, take=Fraction("0.55"), name="6/49 (1982-2004)")
