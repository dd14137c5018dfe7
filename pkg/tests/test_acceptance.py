"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a single ``CRITERION n: PASS|FAIL`` line with the worst deviation found.
Run ``python3 tests/test_acceptance.py`` for just the summary lines.
"""
import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lottopot.crowd import CrowdWeights, crowd_optimality_bruteforce, jensen_check  # noqa: E402
from lottopot.expectation import ev_share, ev_share_exact, expected_gain, pure_jackpot_expected_gain_exact  # noqa: E402
from lottopot.montecarlo import SimulationConfig, simulate_gain, simulate_small_exact  # noqa: E402
from lottopot.pools import CrowdOutcome, Scenario, fixed_deductions, settle, syndicate_fixed_deductions  # noqa: E402
from lottopot.rules import (  # noqa: E402
    BONUS_EXCLUDED,
    BONUS_REQUIRED,
    FixedCash,
    GameStructure,
    MatchSpec,
    Nothing,
    PoolShare,
    PrizeSchedule,
    PrizeTier,
    canadian_649,
)
from lottopot.thresholds import (  # noqa: E402
    DesignFactor,
    ThresholdQuery,
    apply_design_factor,
    emit_table,
    solve_carryover,
)
from reference_tables import (  # noqa: E402
    DESIGN_FACTORS,
    PURE_VS_649,
    SETTLEMENT_CROWD,
    SETTLEMENT_GAIN,
    SETTLEMENT_POOLS_FUND,
    SETTLEMENT_PRIZE_POOL,
    SETTLEMENT_SYNDICATE_PAYOUT,
    THRESHOLDS,
)

T = 13_983_816
LOTTO = canadian_649()


RESULTS: dict[int, str] = {}  # printed by the terminal-summary hook in conftest


def report(number, ok, detail):
    line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS[number] = line
    print(line, flush=True)
    return line


def rel(got, want):
    return abs(got - want) / abs(want)


def check_table(table, reference, columns, tol):
    """Worst relative error and the cells over `tol`, comparing table columns to reference columns."""
    worst, bad = 0.0, []
    for r, (row, ref) in enumerate(zip(table.rows, reference)):
        for col_t, col_r in columns:
            err = rel(row[col_t], ref[col_r])
            worst = max(worst, err)
            if err > tol:
                bad.append(f"row {r + 1} {table.columns[col_t]} {row[col_t]:.2f} vs {ref[col_r]:.2f}")
    return worst, bad


def criterion_1():
    start = time.perf_counter()
    table = emit_table("thresholds")
    elapsed = time.perf_counter() - start
    worst, bad = check_table(table, THRESHOLDS, [(2, 2), (3, 3), (4, 4), (5, 5), (6, 6), (7, 7)], 5e-3)
    ok = not bad and elapsed < 5 and len(table.rows) == 10
    failing_columns = sorted({cell.split()[2] for cell in bad})
    detail = f"worst rel err {worst:.4f}, {len(bad)}/60 cells over 0.5%, {elapsed:.2f}s"
    if bad:
        detail += f"; failing columns {failing_columns}; e.g. " + "; ".join(bad[:2])
    return ok, detail


def criterion_2():
    start = time.perf_counter()
    table = emit_table("pure_vs_649")
    elapsed = time.perf_counter() - start
    worst, bad = check_table(table, PURE_VS_649, [(i, i) for i in range(2, 8)], 5e-3)
    ordered = all(row[2 + k] < row[5 + k] for row in table.rows for k in range(3))
    ok = not bad and ordered and elapsed < 5
    return ok, f"worst rel err {worst:.4f}, pure < 6/49 everywhere: {ordered}, {elapsed:.2f}s"


def criterion_3():
    start = time.perf_counter()
    table = emit_table("design_factors")
    elapsed = time.perf_counter() - start
    worst = max(rel(row[1], ref[1]) for row, ref in zip(table.rows, DESIGN_FACTORS))
    delta = max(abs(row[2] - ref[2]) for row, ref in zip(table.rows, DESIGN_FACTORS))
    labels = [row[0] for row in table.rows] == [ref[0] for ref in DESIGN_FACTORS]
    ok = worst <= 5e-3 and delta <= 0.1 and labels and elapsed < 5
    return ok, f"$20M column worst rel err {worst:.4f}, worst delta error {delta:.3f}, {elapsed:.2f}s"


def criterion_4():
    start = time.perf_counter()
    result = settle(LOTTO, 3_000_000_000, 10_000_000, Fraction("0.1"), CrowdOutcome(SETTLEMENT_CROWD))
    elapsed = time.perf_counter() - start
    b = result.breakdown
    pools_exact = (b.prize_pool == 2_758_057_920 and b.pools_fund == 1_780_656_965
                   and b.prize_pool // 100 == SETTLEMENT_PRIZE_POOL and b.pools_fund // 100 == SETTLEMENT_POOLS_FUND
                   and fixed_deductions(LOTTO, CrowdOutcome(SETTLEMENT_CROWD)) == 407_749_005
                   and syndicate_fixed_deductions(LOTTO) == 569_651_950)
    tier_err = max(rel(result.tier(name).syndicate_payout / 100, want)
                   for name, want in SETTLEMENT_SYNDICATE_PAYOUT.items() if want)
    gain_err = rel(result.gain / 100, SETTLEMENT_GAIN)
    ok = pools_exact and tier_err <= 3e-3 and gain_err <= 3e-3 and elapsed < 1 and result.conservation_gap() == 0
    return ok, (f"pool figures exact: {pools_exact}, worst tier rel err {tier_err:.4f}, "
                f"gain ${result.gain / 100:,.2f} (rel err {gain_err:.5f}), {elapsed * 1000:.0f}ms")


def criterion_5():
    t = 2520 * 10**4
    worst_oracle = worst_identity = 0.0
    for n in range(1, 11):
        for lam in (0.01, 0.1, 1.0, 5.0):
            c = round(lam * t / n)
            worst_oracle = max(worst_oracle, abs(ev_share_exact(n, c, n / t) - ev_share(n, n * c / t)))
            if n > 1:
                worst_identity = max(worst_identity, abs((n / lam) * (1 - ev_share(n - 1, lam)) - ev_share(n, lam)))
    ok = worst_oracle <= 1e-6 and worst_identity <= 1e-12
    return ok, f"max |poisson - binomial| {worst_oracle:.2e} (t={t:,}), max recursion residual {worst_identity:.2e}"


def criterion_6(trials=10_000):
    start = time.perf_counter()
    worst_z, outputs = 0.0, []
    for k in range(1, 11):
        c = round(k * 1e7 / 3)
        a = solve_carryover(ThresholdQuery(LOTTO, c, 0.10, 0.0))
        scenario = Scenario(round(a * 100), c, Fraction("0.1"))
        config = SimulationConfig(trials=trials, seed=k, partitions=4, workers=4)
        result = simulate_gain(LOTTO, scenario, config)
        again = simulate_gain(LOTTO, scenario, SimulationConfig(trials=trials, seed=k, partitions=4, workers=1))
        outputs.append(result == again)
        closed = expected_gain(LOTTO, scenario.carryover_cents / 100, c, 0.1).expected_gain
        worst_z = max(worst_z, abs(result.mean - closed) / result.standard_error)
    elapsed = time.perf_counter() - start
    ok = worst_z < 3 and all(outputs) and elapsed < 300
    return ok, f"max |z| {worst_z:.2f} over 10 grid points at {trials} trials, deterministic: {all(outputs)}, {elapsed:.1f}s"


def _mini_fixtures():
    pure = PrizeSchedule(GameStructure(6, 3, False), (
        PrizeTier("top", MatchSpec(3), PoolShare(1)), PrizeTier("rest", MatchSpec((0, 1, 2)), Nothing())), 100, Fraction(0))
    pure_bonus = PrizeSchedule(GameStructure(7, 3, True), (
        PrizeTier("top", MatchSpec(3), PoolShare(1)), PrizeTier("rest", MatchSpec((0, 1, 2)), Nothing())),
        100, Fraction(1, 2))
    shares = PrizeSchedule(GameStructure(7, 3, True), (
        PrizeTier("3/3", MatchSpec(3), PoolShare(Fraction(3, 5))),
        PrizeTier("2/3+", MatchSpec(2, BONUS_REQUIRED), PoolShare(Fraction(1, 4))),
        PrizeTier("2/3-", MatchSpec(2, BONUS_EXCLUDED), PoolShare(Fraction(3, 20))),
        PrizeTier("1/3", MatchSpec(1), FixedCash(7)),
        PrizeTier("0/3", MatchSpec(0), Nothing())), 100, Fraction(1, 10))
    return pure, pure_bonus, shares


def _binomial_share(n, c, p):
    return sum(Fraction(math.comb(c, j)) * p**j * (1 - p) ** (c - j) * Fraction(n, n + j) for j in range(c + 1))


def criterion_7():
    pure, pure_bonus, shares = _mini_fixtures()
    diffs = []
    r = simulate_small_exact(pure, Scenario(0, 2, 0))
    diffs.append(abs(r.expected_gain - pure_jackpot_expected_gain_exact(20, 0, 2, 0, 0, 100)))
    r = simulate_small_exact(pure_bonus, Scenario(5000, 4, Fraction(1, 4)))
    diffs.append(abs(r.expected_gain - pure_jackpot_expected_gain_exact(35, 5000, 4, Fraction(1, 4), Fraction(1, 2), 100)))
    r = simulate_small_exact(shares, Scenario(0, 4, 0))
    h = Fraction(7 * shares.sizes()["1/3"], shares.total_tickets)
    diffs.append(abs(r.expected_fixed_deductions - (4 * h + syndicate_fixed_deductions(shares))))
    no_fixed = shares.with_tiers([PrizeTier(t.name, t.match, Nothing()) if t.name == "1/3" else t for t in shares.tiers])
    r = simulate_small_exact(no_fixed, Scenario(1000, 3, 0))
    fund = (1 - no_fixed.take) * 100 * (35 + 3)
    closed = sum(tier.allocation.fraction * fund * _binomial_share(no_fixed.sizes()[tier.name], 3,
                                                                   Fraction(no_fixed.sizes()[tier.name], 35))
                 for tier in no_fixed.tiers if tier.allocation.kind == "share")
    closed += 1000 * _binomial_share(1, 3, Fraction(1, 35)) - 100 * 35
    diffs.append(abs(r.expected_gain - closed))
    exact_ok = max(diffs) <= Fraction(1, 10**12)

    rng = random.Random(7)
    n_q, violations = 0, 0
    for t in range(2, 5):
        for c in (2, 3):
            for _ in range(17):
                q = [Fraction(rng.randint(0, 1000)) + Fraction(1, 10**6) for _ in range(t)]
                q = [x / sum(q) for x in q]
                e_q, e_u = crowd_optimality_bruteforce(t, c, q)
                violations += not (e_q < e_u)
                n_q += 1
    e_q, e_u = crowd_optimality_bruteforce(4, 3, CrowdWeights.uniform(4))
    equality = e_q == e_u
    ok = exact_ok and violations == 0 and n_q >= 100 and equality
    return ok, (f"{len(diffs)} miniature fixtures, max |exact - closed form| {float(max(diffs)):.1e}; "
                f"{n_q} random q with E_q < E_uniform in all, equality at uniform: {equality}")


def criterion_8():
    rng = random.Random(11)
    jensen_bad = 0
    for _ in range(1000):
        dim = rng.randint(2, 40)
        raw = [rng.expovariate(1.0) for _ in range(dim)]
        q = CrowdWeights.from_vector([x / math.fsum(raw) for x in raw])
        lhs, rhs = jensen_check(q, rng.uniform(0.01, 1000))
        jensen_bad += lhs > rhs * (1 + 1e-12)
    grid = [k / 100 for k in range(1, 1001)]
    fair_ok = all(ev_share(1, lam) > 1 / (1 + lam) for lam in grid)

    def thr(schedule, c, target=0.0):
        return solve_carryover(ThresholdQuery(schedule, c, 0.10, target))

    crowd = [k * 1e7 / 3 for k in range(1, 11)]
    mono_c = all(thr(LOTTO, lo) < thr(LOTTO, hi) for lo, hi in zip(crowd, crowd[1:]))
    takes = [apply_design_factor(LOTTO, DesignFactor.set_take(x)) for x in (0.5, 0.55, 0.6, 0.65, 0.7)]
    mono_take = all(thr(lo, 1e7) < thr(hi, 1e7) for lo, hi in zip(takes, takes[1:]))
    mono_target = all(thr(LOTTO, 1e7, lo) < thr(LOTTO, 1e7, hi) for lo, hi in ((0, 0.1), (0.1, 0.2), (0.2, 0.5)))

    conserved, tracked = True, True
    for _ in range(200):
        counts = {name: rng.randint(0, 2_000_000) for name in LOTTO.tier_names}
        counts["3/6"] = rng.randint(0, 200_000)
        outcome = CrowdOutcome(counts)
        result = settle(LOTTO, rng.randint(0, 10**10), outcome.total, Fraction(rng.randint(0, 50), 100), outcome)
        conserved &= result.conservation_gap() == 0
        tracked &= all(abs(Fraction(row.residue)) <= Fraction(row.crowd_tickets + row.syndicate_tickets, 2)
                       for row in result.tiers)
    ok = jensen_bad == 0 and fair_ok and mono_c and mono_take and mono_target and conserved and tracked
    return ok, (f"jensen violations {jensen_bad}/1000, better-than-fair on {len(grid)} lambdas: {fair_ok}, "
                f"monotone in c/take/target: {mono_c}/{mono_take}/{mono_target}, "
                f"conservation exact on 200 settlements: {conserved}, residue bounded: {tracked}")


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, detail = CRITERIA[number]()
    line = report(number, ok, detail)
    assert ok, line


if __name__ == "__main__":
    failures = 0
    for number, fn in CRITERIA.items():
        ok, detail = fn()
        report(number, ok, detail)
        failures += not ok
    sys.exit(1 if failures else 0)
