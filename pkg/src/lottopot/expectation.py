"""Closed-form expected gain for a syndicate holding one of every ticket.

Expectations are floats in dollars. A crowd of ``c`` tickets picked equiprobably puts
``X ~ Bin(c, s/t)`` tickets into a tier of size ``s``; the syndicate's fraction of that
tier's pool is ``E[s / (s + X)]``, evaluated with the Poisson approximation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import binom

from .pools import InfeasibleError
from .rules import GameStructure, PoolShare, PrizeSchedule, canadian_649, to_fraction

LAMBDA_FLOOR = 1e-12
FAIR_SPLIT_MIN_SIZE = 100


def ev_share(n: int, lam: float) -> float:
    """E[n / (n + X)] for X ~ Poisson(lam).

    Uses the upward recursion E_n = (n/lam)(1 - E_{n-1}) from E_1 = (1 - e^-lam)/lam where it
    is stable (lam >= n). Below that each step multiplies the error by n/lam, so the
    Poisson series is summed directly instead.
    """
    if n < 1 or int(n) != n:
        raise ValueError(f"n must be a positive integer, got {n}")
    if lam < 0:
        raise ValueError(f"lam must be non-negative, got {lam}")
    n = int(n)
    if lam < LAMBDA_FLOOR:
        return 1.0
    if lam >= n:
        value = -math.expm1(-lam) / lam
        for k in range(2, n + 1):
            value = (k / lam) * (1.0 - value)
        return value
    return _ev_share_series(n, lam)


def _ev_share_series(n: int, lam: float) -> float:
    terms = []
    pmf = math.exp(-lam)
    j = 0
    while True:
        terms.append(pmf * n / (n + j))
        j += 1
        pmf *= lam / j
        if j > lam and pmf < 1e-20:
            break
    return math.fsum(terms)


def ev_share_exact(n: int, c: int, p) -> float:
    """E[n / (n + X)] for X ~ Bin(c, p), summed over the binomial mass.

    A `Fraction` p with small c is summed in exact rational arithmetic.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if c < 0 or int(c) != c:
        raise ValueError("c must be a non-negative integer")
    c = int(c)
    if isinstance(p, Fraction) and c <= 200:
        return float(_ev_share_rational(n, c, p))
    p = float(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if c == 0 or p == 0:
        return 1.0
    mean = c * p
    sd = math.sqrt(mean * (1 - p))
    lo = max(0, int(mean - 12 * sd - 20))
    hi = min(c, int(mean + 12 * sd + 40))
    j = np.arange(lo, hi + 1)
    mass = binom.pmf(j, c, p)
    if 1.0 - math.fsum(mass) > 1e-14:
        raise ArithmeticError("binomial truncation lost too much mass")
    return math.fsum(mass * (n / (n + j)))


def _ev_share_rational(n: int, c: int, p: Fraction) -> Fraction:
    q = 1 - p
    return sum((math.comb(c, j) * p**j * q ** (c - j) * Fraction(n, n + j) for j in range(c + 1)), Fraction(0))


def fair_split_factor(c: float, t: int = canadian_649().total_tickets) -> float:
    return 1.0 / (1.0 + c / t)


def nu(c: float, game: GameStructure = GameStructure(49, 6, True)) -> float:
    """Expected syndicate fraction of the second-prize (k-1 plus bonus) pool; that tier has k tickets."""
    k = game.picks
    return ev_share(k, k * c / game.total_tickets)


def fixed_charge_per_ticket(schedule: PrizeSchedule) -> float:
    """Expected fixed-prize and free-play charge per ticket, in dollars (0.4073651 for 6/49)."""
    sizes = schedule.sizes()
    total = sum(tier.deduction_cents * sizes[tier.name] for tier in schedule.tiers)
    return float(Fraction(total, 100 * schedule.total_tickets))


def syndicate_fixed_cash(schedule: PrizeSchedule) -> float:
    """Cash the syndicate collects from fixed-amount tiers, in dollars."""
    sizes = schedule.sizes()
    return sum(tier.allocation.amount_cents * sizes[tier.name]
               for tier in schedule.tiers if tier.allocation.kind == "fixed") / 100


def mu(schedule: PrizeSchedule, c: float, f: float = 0.0) -> float:
    """Expected Pools Fund in dollars."""
    t = schedule.total_tickets
    price = schedule.ticket_price_cents / 100
    keep = 1 - float(schedule.take)
    value = keep * price * (t + c * (1 - float(f))) - (t + c) * fixed_charge_per_ticket(schedule)
    if value < 0:
        raise InfeasibleError("fixed deductions exceed prize pool at this crowd size")
    return value


def prize_pool_dollars(schedule: PrizeSchedule, c: float, f: float = 0.0) -> float:
    t = schedule.total_tickets
    return (1 - float(schedule.take)) * schedule.ticket_price_cents / 100 * (t + c * (1 - float(f)))


@dataclass(frozen=True)
class ExpectationReport:
    carryover: float
    crowd_tickets: float
    free_fraction: float
    lam: float
    mu: float
    nu: float
    jackpot_term: float
    share_terms: dict[str, float]
    share_factors: dict[str, float]
    share_methods: dict[str, str]
    fixed_term: float
    cost: float
    expected_gain: float = field(default=0.0)

    @property
    def expected_return(self) -> float:
        return self.expected_gain / self.cost


def share_factor(size: int, lam: float, fair_split_min_size: int = FAIR_SPLIT_MIN_SIZE) -> tuple[float, str]:
    """Syndicate's expected fraction of a tier pool when it holds `size` of the tickets."""
    if size >= fair_split_min_size:
        return 1.0 / (1.0 + lam), "fair-split"
    return ev_share(size, size * lam), "poisson-recursion"


def expected_gain(schedule: PrizeSchedule, carryover: float, c: float, f: float = 0.0,
                  fair_split_min_size: int = FAIR_SPLIT_MIN_SIZE) -> ExpectationReport:
    """Expected net gain (dollars) of covering every ticket against an equiprobable crowd."""
    if carryover < 0:
        raise ValueError("carryover must be non-negative")
    t = schedule.total_tickets
    lam = c / t
    fund = mu(schedule, c, f)
    jackpot = schedule.jackpot_tier()
    sizes = schedule.sizes()

    jackpot_term = 0.0
    terms, factors, methods = {}, {}, {}
    for tier in schedule.tiers:
        if not isinstance(tier.allocation, PoolShare):
            continue
        size = sizes[tier.name]
        if size == 0:
            continue
        factor, method = share_factor(size, lam, fair_split_min_size)
        factors[tier.name] = factor
        methods[tier.name] = method
        share = float(tier.allocation.fraction)
        if tier is jackpot:
            jackpot_term = (carryover + share * fund) * factor
        else:
            terms[tier.name] = share * fund * factor

    fixed = syndicate_fixed_cash(schedule)
    cost = schedule.ticket_price_cents * t / 100
    gain = jackpot_term + math.fsum(terms.values()) + fixed - cost
    return ExpectationReport(
        carryover=carryover, crowd_tickets=c, free_fraction=float(f), lam=lam, mu=fund,
        nu=nu(c, schedule.game) if schedule.game.has_bonus else float("nan"),
        jackpot_term=jackpot_term, share_terms=terms, share_factors=factors, share_methods=methods,
        fixed_term=fixed, cost=cost, expected_gain=gain,
    )


def pure_jackpot_expected_gain(t: int, a: float, c: float, f: float = 0.0, take: float = 0.0,
                               price: float = 1.0, exact: bool = False) -> float:
    """Expected gain when the only prize is a jackpot split equally among winning tickets.

    With `exact` the crowd's winning-ticket count is binomial rather than Poisson; c must
    then be an integer.
    """
    jackpot = a + (1 - take) * price * (t + c * (1 - f))
    if exact:
        factor = ev_share_exact(1, int(c), Fraction(1, t))
    else:
        factor = ev_share(1, c / t)
    return jackpot * factor - price * t


def pure_jackpot_expected_gain_exact(t: int, a, c: int, f=0, take=0, price=1) -> Fraction:
    """Rational version of the binomial-exact pure-jackpot gain, for enumeration oracles."""
    f, take, price, a = (to_fraction(v) for v in (f, take, price, a))
    jackpot = a + (1 - take) * price * (t + c * (1 - f))
    return jackpot * _ev_share_rational(1, c, Fraction(1, t)) - price * t
