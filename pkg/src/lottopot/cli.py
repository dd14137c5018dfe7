"""Command-line entry point.

Exit status: 0 success, 1 validation or infeasibility failure, 2 usage error.
Data goes to stdout, diagnostics to stderr. Output never contains colour codes, so
NO_COLOR is honoured trivially.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .crowd import CrowdWeights, expected_fixed_deductions_uniform, jensen_check, syndicate_jackpot_lower_bound
from .expectation import expected_gain, fixed_charge_per_ticket
from .montecarlo import SimulationConfig, simulate_gain
from .pools import InfeasibleError, Scenario, load_scenario, resolve_outcome, settle
from .rules import ScheduleError, canadian_649, load_schedule, validate_schedule
from .thresholds import NoSolutionError, ThresholdQuery, emit_table, render_csv, render_text, solve_carryover, \
    solve_carryover_pure


class UsageError(Exception):
    pass


def dollars(cents) -> str:
    value = float(Fraction(cents)) / 100
    return f"-${-value:,.2f}" if value < 0 else f"${value:,.2f}"


def _usd(value: float) -> str:
    return f"-${-value:,.2f}" if value < 0 else f"${value:,.2f}"


def _schedule(path):
    if path is None:
        return canadian_649()
    try:
        schedule = load_schedule(path)
    except FileNotFoundError:
        raise UsageError(f"rules file not found: {path}") from None
    problems = validate_schedule(schedule)
    if problems:
        raise ScheduleError(f"{path}: " + "; ".join(problems))
    return schedule


def _targets(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad --targets {text!r}") from None


def _weights(text: str, t: int) -> CrowdWeights:
    kind, _, rest = text.partition(":")
    if kind == "uniform":
        return CrowdWeights.uniform(t)
    if kind == "single-hot":
        return CrowdWeights.single_hot(t)
    if kind == "two-block":
        try:
            tickets, mass = rest.split(":")
            return CrowdWeights.two_block(t, int(tickets), float(mass))
        except ValueError:
            raise UsageError("two-block weights are given as two-block:TICKETS:MASS") from None
    raise UsageError(f"unknown weights {text!r}")


def cmd_validate(args, out):
    try:
        schedule = load_schedule(args.rules)
    except FileNotFoundError:
        raise UsageError(f"rules file not found: {args.rules}") from None
    sizes = schedule.sizes()
    t = schedule.total_tickets
    out.write(f"{schedule.name or args.rules}: pick {schedule.game.picks} of {schedule.game.field_size}"
              f"{' plus bonus' if schedule.game.has_bonus else ''}, {t:,} tickets, "
              f"price {dollars(schedule.ticket_price_cents)}, take {float(schedule.take):.2%}\n")
    for tier in schedule.tiers:
        out.write(f"  {tier.name:<8} {sizes[tier.name]:>12,}  p={sizes[tier.name] / t:.6f}  {_describe(tier.allocation)}\n")
    problems = validate_schedule(schedule)
    for problem in problems:
        sys.stderr.write(f"violation: {problem}\n")
    out.write("invalid\n" if problems else "valid\n")
    return 1 if problems else 0


def _describe(alloc) -> str:
    kind = alloc.kind
    if kind == "fixed":
        return f"fixed {dollars(alloc.amount_cents)}"
    if kind == "freeplay":
        return f"free play ({dollars(alloc.deduction_cents)} deduction)"
    if kind in ("share", "rollover"):
        return f"{kind} {float(alloc.fraction):.2%} of Pools Fund"
    return "nothing"


def cmd_ev(args, out):
    schedule = _schedule(args.rules)
    report = expected_gain(schedule, args.carryover, args.crowd_tickets, args.free_frac)
    if args.format == "json":
        payload = {k: v for k, v in report.__dict__.items()}
        payload["expected_return"] = report.expected_return
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return 0
    out.write(f"lambda            {report.lam:.6f}\n")
    out.write(f"expected fund     {_usd(report.mu)}\n")
    out.write(f"EV56+             {report.nu:.4%}\n")
    out.write(f"jackpot term      {_usd(report.jackpot_term)}\n")
    for name, value in report.share_terms.items():
        out.write(f"{name + ' term':<18}{_usd(value)}  ({report.share_methods[name]}, factor {report.share_factors[name]:.6f})\n")
    out.write(f"fixed prizes      {_usd(report.fixed_term)}\n")
    out.write(f"cost              {_usd(report.cost)}\n")
    out.write(f"expected gain     {_usd(report.expected_gain)} ({report.expected_return:+.2%})\n")
    return 0


def cmd_threshold(args, out):
    schedule = _schedule(args.rules)
    for target in _targets(args.targets):
        if args.pure:
            value = solve_carryover_pure(schedule.total_tickets, args.crowd_tickets, args.free_frac,
                                         float(schedule.take), schedule.ticket_price_cents / 100, target)
        else:
            value = solve_carryover(ThresholdQuery(schedule, args.crowd_tickets, args.free_frac, target))
        out.write(f"{target:+.2%}\t{_usd(value)}\n")
    return 0


def cmd_tables(args, out):
    table = emit_table(args.which)
    out.write(render_csv(table) if args.format == "csv" else render_text(table))
    return 0


def cmd_settle(args, out):
    schedule = _schedule(args.rules)
    try:
        scenario = load_scenario(args.scenario)
    except FileNotFoundError:
        raise UsageError(f"scenario file not found: {args.scenario}") from None
    outcome = resolve_outcome(schedule, scenario)
    report = settle(schedule, scenario.carryover_cents, scenario.crowd_tickets, scenario.free_fraction, outcome)
    b = report.breakdown
    out.write(f"betting pool      {dollars(b.betting_pool)}\n")
    out.write(f"prize pool        {dollars(b.prize_pool)}\n")
    out.write(f"fixed deductions  {dollars(b.fixed_deductions)}\n")
    out.write(f"pools fund        {dollars(b.pools_fund)}\n")
    out.write(f"{'tier':<8} {'crowd':>12} {'crowd payout':>16} {'syndicate':>12} {'syndicate payout':>18}\n")
    for row in report.tiers:
        out.write(f"{row.name:<8} {row.crowd_tickets:>12,} {dollars(row.crowd_payout):>16} "
                  f"{row.syndicate_tickets:>12,} {dollars(row.syndicate_payout):>18}\n")
    out.write(f"syndicate payout  {dollars(report.syndicate_payout)}\n")
    out.write(f"free plays earned {report.syndicate_free_plays:,}\n")
    out.write(f"rounding residue  {dollars(report.residue)}\n")
    out.write(f"gain              {dollars(report.gain)}\n")
    return 0


def cmd_simulate(args, out):
    schedule = _schedule(args.rules)
    if args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        scenario = Scenario(round(args.carryover * 100), int(args.crowd_tickets), Fraction(str(args.free_frac)))
    config = SimulationConfig(trials=args.trials, seed=args.seed, partitions=args.partitions, workers=args.workers)
    result = simulate_gain(schedule, scenario, config)
    closed = expected_gain(schedule, scenario.carryover_cents / 100, scenario.crowd_tickets, float(scenario.free_fraction))
    out.write(f"trials            {result.trials}\n")
    out.write(f"mean gain         {_usd(result.mean)}\n")
    out.write(f"standard error    {_usd(result.standard_error)}\n")
    out.write(f"closed form       {_usd(closed.expected_gain)}\n")
    z = (result.mean - closed.expected_gain) / result.standard_error if result.standard_error else 0.0
    out.write(f"z                 {z:+.2f}\n")
    return 0


def cmd_bounds(args, out):
    schedule = _schedule(args.rules)
    weights = _weights(args.weights, schedule.total_tickets)
    h = fixed_charge_per_ticket(schedule)
    bound = syndicate_jackpot_lower_bound(schedule, args.carryover, args.crowd_tickets, args.free_frac)
    lhs, rhs = jensen_check(weights, args.crowd_tickets, h)
    out.write(f"expected fixed deductions (uniform crowd)  {_usd(expected_fixed_deductions_uniform(args.crowd_tickets, schedule))}\n")
    out.write(f"jackpot payout lower bound                 {_usd(bound)}\n")
    out.write(f"crowd fixed-payout bound lhs               {_usd(lhs)}\n")
    out.write(f"crowd fixed-payout bound rhs               {_usd(rhs)}\n")
    out.write(f"lhs <= rhs                                 {lhs <= rhs * (1 + 1e-12)}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lottopot", description="Buying-the-pot analysis for jackpot-sharing lotteries.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_flags(p, carryover_required=True):
        p.add_argument("--rules", help="rules JSON (default: built-in 2013 6/49)")
        p.add_argument("--carryover", type=float, required=carryover_required, help="carryover in dollars")
        p.add_argument("--crowd-tickets", type=float, required=carryover_required, help="crowd ticket count")
        p.add_argument("--free-frac", type=float, default=0.10, help="fraction of crowd tickets that are free plays")

    p = sub.add_parser("validate", help="check a rules file")
    p.add_argument("rules")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("ev", help="closed-form expected gain")
    scenario_flags(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_ev)

    p = sub.add_parser("threshold", help="carryover needed for target returns")
    p.add_argument("--rules")
    p.add_argument("--crowd-tickets", type=float, required=True)
    p.add_argument("--free-frac", type=float, default=0.10)
    p.add_argument("--targets", default="0,0.10,0.20")
    p.add_argument("--pure", action="store_true", help="pure-jackpot model with the same take and price")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("tables", help="regenerate the threshold tables")
    p.add_argument("--which", choices=("5", "6", "7"), required=True)
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("settle", help="settle one drawing from a scenario file")
    p.add_argument("--rules")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_settle)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the expected gain")
    scenario_flags(p, carryover_required=False)
    p.add_argument("--scenario")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--partitions", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="jackpot lower bound and Jensen check for a non-uniform crowd")
    scenario_flags(p)
    p.add_argument("--weights", default="uniform", help="uniform | single-hot | two-block:TICKETS:MASS")
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "simulate" and not args.scenario and (args.carryover is None or args.crowd_tickets is None):
        sys.stderr.write("simulate needs --scenario or both --carryover and --crowd-tickets\n")
        return 2
    try:
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (ScheduleError, InfeasibleError, NoSolutionError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
