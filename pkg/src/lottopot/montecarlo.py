"""Stochastic and exhaustive oracles for the closed-form expectations.

RNG: numpy's PCG64 seeded through ``SeedSequence(seed)``; partition ``p`` of ``P`` uses
``SeedSequence(seed).spawn(P)[p]`` and runs its contiguous share of the trials. Results
depend only on (seed, trials, partitions), not on how many worker processes run them.
Gains are aggregated as exact integer cents, so the reduction is order-independent.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .crowd import CrowdWeights, _compositions, _multinomial
from .pools import (
    CrowdOutcome,
    Scenario,
    betting_pool,
    fixed_deductions,
    prize_pool,
    settle,
    syndicate_fixed_deductions,
)
from .rules import Draw, PrizeSchedule, Ticket, classify

UNIFORM = "uniform"
PROPORTIONAL = "proportional-fixed-payouts"
MAX_SMALL_TICKETS = 300
MAX_SMALL_CROWD = 6


def rng_for(seed: int, partition: int = 0, partitions: int = 1) -> np.random.Generator:
    child = np.random.SeedSequence(seed).spawn(partitions)[partition]
    return np.random.Generator(np.random.PCG64(child))


def sample_crowd_counts(schedule: PrizeSchedule, c: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Multinomial(c, p) tier counts by sequential conditional binomials.

    Returns shape (n_tiers,) or (size, n_tiers), tiers in schedule order.
    """
    if c < 0 or int(c) != c:
        raise ValueError("crowd size must be a non-negative integer")
    probs = [float(p) for p in schedule.probabilities().values()]
    shape = () if size is None else (size,)
    remaining = np.full(shape, int(c), dtype=np.int64)
    left = 1.0
    out = []
    for i, p in enumerate(probs):
        if i == len(probs) - 1:
            draw = remaining.copy()
        else:
            cond = min(1.0, p / left) if left > 0 else 0.0
            draw = rng.binomial(remaining, cond)
        out.append(draw)
        remaining = remaining - draw
        left -= p
    return np.stack(out, axis=-1)


def sample_crowd_outcome(schedule: PrizeSchedule, c: int, rng: np.random.Generator) -> CrowdOutcome:
    counts = sample_crowd_counts(schedule, c, rng)
    return CrowdOutcome(dict(zip(schedule.tier_names, (int(n) for n in counts))))


@dataclass(frozen=True)
class SimulationConfig:
    trials: int = 10_000
    seed: int = 0
    partitions: int = 1
    workers: int = 1
    crowd_model: str = UNIFORM
    weights: CrowdWeights | None = None

    def __post_init__(self):
        if self.trials < 1 or self.partitions < 1 or self.workers < 1:
            raise ValueError("trials, partitions and workers must be >= 1")
        if self.crowd_model not in (UNIFORM, PROPORTIONAL):
            raise ValueError(f"unknown crowd model {self.crowd_model!r}")
        if self.crowd_model == PROPORTIONAL and self.weights is None:
            raise ValueError("proportional-fixed-payouts model needs crowd weights")


@dataclass(frozen=True)
class SimulationResult:
    mean: float  # dollars
    standard_error: float
    trials: int
    tier_mean_payouts: dict[str, float] = field(default_factory=dict)  # syndicate, dollars

    @property
    def mean_gain(self) -> float:
        return self.mean


def _partition_sizes(trials: int, partitions: int) -> list[int]:
    base, extra = divmod(trials, partitions)
    return [base + (p < extra) for p in range(partitions)]


def _gain_partition(args):
    schedule, scenario, seed, partition, partitions, n = args
    rng = rng_for(seed, partition, partitions)
    counts = sample_crowd_counts(schedule, scenario.crowd_tickets, rng, size=n)
    names = schedule.tier_names
    total = total_sq = 0
    per_tier = [0] * len(names)
    for row in counts:
        report = settle(schedule, scenario.carryover_cents, scenario.crowd_tickets, scenario.free_fraction,
                        CrowdOutcome(dict(zip(names, (int(x) for x in row)))))
        total += report.gain
        total_sq += report.gain * report.gain
        for i, tier in enumerate(report.tiers):
            per_tier[i] += tier.syndicate_payout
    return n, total, total_sq, per_tier


def _jackpot_partition(args):
    schedule, scenario, weights, seed, partition, partitions, n = args
    rng = rng_for(seed, partition, partitions)
    c = scenario.crowd_tickets
    t = schedule.total_tickets
    jackpot = schedule.jackpot_tier()
    share = jackpot.allocation.fraction
    # crowd-independent part of the jackpot base, in cents
    prize = Fraction(prize_pool(schedule, betting_pool(schedule, c, scenario.free_fraction, True)))
    base_fund = prize - syndicate_fixed_deductions(schedule)

    block_counts = np.array([cnt for cnt, _ in weights.blocks], dtype=float)
    block_weights = np.array([float(w) for _, w in weights.blocks])
    block = rng.choice(len(block_counts), size=n, p=block_counts / t)
    q = block_weights[block]
    n_jackpot = rng.binomial(c, q)
    counts = sample_crowd_counts(schedule, c, rng, size=n)
    charges = np.array([tier.deduction_cents for tier in schedule.tiers], dtype=float)
    crowd_fixed = (counts @ charges) * (t * q)  # payouts scale with the drawn ticket's popularity
    fund = np.maximum(float(base_fund) - crowd_fixed, 0.0)
    payout = (scenario.carryover_cents + float(share) * fund) / (1 + n_jackpot)
    mean = math.fsum(payout) / n
    return n, mean, math.fsum((payout - mean) ** 2)


def _run(worker, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(worker, jobs))
    return [worker(job) for job in jobs]


def _summarize(parts, names) -> SimulationResult:
    """Combine exact per-partition integer sums (n, sum, sum of squares, per-tier sums)."""
    n = sum(p[0] for p in parts)
    total = sum(p[1] for p in parts)
    total_sq = sum(p[2] for p in parts)
    mean = Fraction(total, n)
    var = (total_sq - n * mean**2) / (n - 1) if n > 1 else Fraction(0)
    per_tier = {name: sum(p[3][i] for p in parts) / n / 100 for i, name in enumerate(names)}
    return SimulationResult(float(mean) / 100, math.sqrt(float(var) / n) / 100, n, per_tier)


def _summarize_float(parts) -> SimulationResult:
    """Combine per-partition (n, mean, sum of squared deviations) with the pairwise update."""
    n, mean, m2 = 0, 0.0, 0.0
    for k, k_mean, k_m2 in parts:
        delta = k_mean - mean
        total = n + k
        mean += delta * k / total
        m2 += k_m2 + delta * delta * n * k / total
        n = total
    var = m2 / (n - 1) if n > 1 else 0.0
    return SimulationResult(mean / 100, math.sqrt(var / n) / 100, n)


def simulate_gain(schedule: PrizeSchedule, scenario: Scenario, config: SimulationConfig = SimulationConfig()) -> SimulationResult:
    """Mean syndicate gain over sampled equiprobable crowds, each drawing settled exactly."""
    if config.crowd_model != UNIFORM:
        raise ValueError("simulate_gain samples the uniform crowd; use simulate_jackpot_payout")
    sizes = _partition_sizes(config.trials, config.partitions)
    jobs = [(schedule, scenario, config.seed, p, config.partitions, n) for p, n in enumerate(sizes) if n]
    return _summarize(_run(_gain_partition, jobs, config.workers), schedule.tier_names)


def simulate_jackpot_payout(schedule: PrizeSchedule, scenario: Scenario, config: SimulationConfig) -> SimulationResult:
    """Mean syndicate 6/6 payout v/(1+N_1) when crowd picks follow `config.weights` and the
    crowd's fixed payouts scale with the drawn ticket's popularity t*q_i.
    """
    if config.crowd_model != PROPORTIONAL:
        raise ValueError("simulate_jackpot_payout needs the proportional-fixed-payouts crowd model")
    if schedule.jackpot_tier() is None:
        raise ValueError("schedule has no jackpot tier")
    if config.weights.dimension != schedule.total_tickets:
        raise ValueError("crowd weights must cover every ticket")
    sizes = _partition_sizes(config.trials, config.partitions)
    jobs = [(schedule, scenario, config.weights, config.seed, p, config.partitions, n)
            for p, n in enumerate(sizes) if n]
    return _summarize_float(_run(_jackpot_partition, jobs, config.workers))


# --- exhaustive oracle for miniature games --------------------------------

@dataclass(frozen=True)
class SmallExactResult:
    expected_gain: Fraction  # cents
    expected_fixed_deductions: Fraction  # cents, crowd plus syndicate
    draws: int
    tickets: int


def simulate_small_exact(schedule: PrizeSchedule, scenario: Scenario) -> SmallExactResult:
    """Exact expected gain by enumerating every draw and every crowd configuration.

    For each draw, every ticket is classified by set intersection; the c independent
    equiprobable crowd tickets are then enumerated by tier-count vector with exact
    multinomial weights and each configuration is settled without rounding.
    """
    game = schedule.game
    t = game.total_tickets
    c = scenario.crowd_tickets
    if t > MAX_SMALL_TICKETS or c > MAX_SMALL_CROWD:
        raise ValueError(f"enumeration limited to t <= {MAX_SMALL_TICKETS} and c <= {MAX_SMALL_CROWD}")
    numbers = range(1, game.field_size + 1)
    tickets = [Ticket(combo) for combo in itertools.combinations(numbers, game.picks)]
    names = schedule.tier_names
    sizes = schedule.sizes()

    draws = 0
    gain_sum = Fraction(0)
    fixed_sum = Fraction(0)
    cache: dict[tuple[int, ...], tuple[Fraction, Fraction]] = {}
    for winning in itertools.combinations(numbers, game.picks):
        bonuses = [b for b in numbers if b not in winning] if game.has_bonus else [None]
        for bonus in bonuses:
            draw = Draw(winning, bonus)
            tally = dict.fromkeys(names, 0)
            for ticket in tickets:
                tally[classify(ticket, draw, schedule).name] += 1
            if tally != sizes:
                raise AssertionError(f"tier sizes for draw {sorted(winning)}+{bonus} differ from the formula")
            key = tuple(tally[name] for name in names)
            if key not in cache:
                cache[key] = _expected_over_crowd(schedule, scenario, key)
            g, d = cache[key]
            gain_sum += g
            fixed_sum += d
            draws += 1
    return SmallExactResult(gain_sum / draws, fixed_sum / draws, draws, t)


def _expected_over_crowd(schedule: PrizeSchedule, scenario: Scenario, tier_counts) -> tuple[Fraction, Fraction]:
    t = schedule.total_tickets
    c = scenario.crowd_tickets
    probs = [Fraction(k, t) for k in tier_counts]
    names = schedule.tier_names
    gain = Fraction(0)
    deductions = Fraction(0)
    for counts in _compositions(c, len(names)):
        weight = Fraction(_multinomial(counts))
        for k, p in zip(counts, probs):
            if k:
                weight *= p**k
        if not weight:
            continue
        outcome = CrowdOutcome(dict(zip(names, counts)))
        report = settle(schedule, scenario.carryover_cents, c, scenario.free_fraction, outcome)
        gain += weight * report.exact_gain
        deductions += weight * fixed_deductions(schedule, outcome, include_syndicate=True)
    return gain, deductions
