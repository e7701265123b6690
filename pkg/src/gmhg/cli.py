"""Command-line front end.

Machine-readable JSON goes to stdout, a short human summary to stderr.
Exit codes: 0 ok, 1 domain failure, 2 usage or parse error, 3 refusal
(budget exceeded or unsupported structure).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from . import __version__, oracle, strategy
from .csp import (
    DEFAULT_SEARCH_BUDGET,
    DEFAULT_TABLE_BUDGET,
    NotATree,
    arc_consistency,
    brute_force_solve,
    induce_csp,
    primal_graph_stats,
    tree_solve,
)
from .discretization import fixed_plan, linf_distance, plan_gg, plan_gmhg, round_to_grid
from .experiments import brute_force_scaling, make_game, rounding_experiment
from .formats import ParseError, dumps_game, dumps_strategy, load_game, load_strategy, strategy_to_dict
from .game_model import BudgetExceeded, GameError, payoff_ranges, representation_size, validate
from .generators import rng_for

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_REFUSAL = 0, 1, 2, 3
REPORT_FORMAT = "solve-report-v1"


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_valid(path):
    game = load_game(path)
    problems = validate(game)
    if problems:
        raise CommandError("invalid game: " + "; ".join(problems), EXIT_DOMAIN)
    return game


def _nonneg(text: str) -> float:
    value = float(text)
    if not value >= 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text}")
    return value


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def game_digest(game) -> dict:
    stats = representation_size(game)
    return {"n": stats.n, "m": stats.m, "k": stats.k, "l": stats.l, "c": stats.c, "representation_size": stats.entries}


def cmd_validate(args) -> int:
    game = load_game(args.game)
    problems = validate(game)
    _emit({"valid": not problems, "violations": problems})
    for p in problems:
        _say(f"violation: {p}")
    return EXIT_DOMAIN if problems else EXIT_OK


def cmd_info(args) -> int:
    game = _load_valid(args.game)
    ranges = payoff_ranges(game)
    plan = plan_gmhg(game, ranges, args.eps)
    out = {
        "game": game_digest(game),
        "ranges": [
            {"owner": r.owner, "clique": list(r.clique), "upper": r.upper, "lower": r.lower, "range": r.range}
            for r in ranges.entries
        ],
        "plan": plan.to_dict(),
        "notes": list(plan.notes),
        "primal_graph": primal_graph_stats(game).to_dict(),
    }
    try:
        out["graphical_plan"] = plan_gg(game, args.eps).to_dict()
    except GameError as exc:
        out["graphical_plan"] = None
        out["graphical_skipped"] = str(exc)
    _emit(out)
    _say(f"s = {list(plan.grid)}" + (" (degenerate: no interaction)" if plan.degenerate else ""))
    return EXIT_OK


def cmd_check(args) -> int:
    game = _load_valid(args.game)
    p = strategy.as_profile(game, load_strategy(args.strategy))
    check = strategy.is_epsilon_ne(game, p, args.eps)
    _emit({"eps": args.eps, "regrets": list(check.regrets), "max_regret": check.max_regret, "pass": check.ok})
    _say(("pass" if check.ok else "fail") + f": max regret {check.max_regret:.6g} vs eps {args.eps}")
    return EXIT_OK if check.ok else EXIT_DOMAIN


def cmd_round(args) -> int:
    game = _load_valid(args.game)
    p = strategy.as_profile(game, load_strategy(args.strategy))
    plan = fixed_plan(game, args.grid, args.eps) if args.grid else plan_gmhg(game, None, args.eps)
    q = round_to_grid(p, plan)
    distance = linf_distance(p, [x.probs for x in q])
    text = dumps_strategy(q)
    if args.out:
        Path(args.out).write_text(text)
        _emit({"out": str(args.out), "linf_distance": distance, "plan": plan.to_dict()})
    else:
        sys.stdout.write(text)
    _say(f"l-inf distance {distance:.6g} (max step {float(max(plan.steps)):.6g})")
    return EXIT_OK


def _solution_entry(game, profile, eps) -> dict:
    check = strategy.is_epsilon_ne(game, [x.probs for x in profile], eps)
    if not check.ok:
        raise AssertionError(f"solver returned a profile with regret {check.max_regret}")  # pragma: no cover
    return {**strategy_to_dict(profile), "regrets": list(check.regrets)}


def cmd_solve(args) -> int:
    game = _load_valid(args.game)
    plan = fixed_plan(game, args.grid, args.eps) if args.grid else plan_gmhg(game, None, args.eps)
    start = time.perf_counter()
    csp = induce_csp(game, plan, args.eps, lattice_budget=args.budget)
    trace_info: dict = {"domain_sizes": csp.domain_sizes(), "profiles": csp.num_profiles}
    count = None
    if args.method == "brute":
        solutions = brute_force_solve(csp, "all" if args.all else "first", args.budget, args.table_budget)
    elif args.method == "nashprop-brute":
        filtered, trace = arc_consistency(csp, args.table_budget)
        trace_info["propagation"] = trace.to_dict()
        trace_info["filtered_domain_sizes"] = filtered.domain_sizes()
        solutions = [] if trace.empty else brute_force_solve(filtered, "all" if args.all else "first", args.budget, args.table_budget)
    else:
        if args.all:
            compact = tree_solve(csp, "all-compact", args.table_budget)
            trace_info["table_sizes"] = {str(k): v for k, v in compact.table_sizes().items()}
            solutions = []
            count = 0
            for prof in compact.profiles():
                count += 1
                if len(solutions) < args.max_solutions:
                    solutions.append(prof)
        else:
            solutions = tree_solve(csp, "first", args.table_budget)
    elapsed = time.perf_counter() - start
    listed = solutions[: args.max_solutions]
    report = {
        "format": REPORT_FORMAT,
        "game": game_digest(game),
        "plan": plan.to_dict(),
        "method": args.method,
        "eps": args.eps,
        "num_solutions": len(solutions) if count is None else count,
        "solutions": [_solution_entry(game, prof, args.eps) for prof in listed],
        "trace": trace_info,
        "wall_time": elapsed,
    }
    _emit(report)
    _say(f"{report['num_solutions']} grid eps-NE found by {args.method} in {elapsed:.3f}s")
    return EXIT_OK if solutions else EXIT_DOMAIN


def cmd_oracle(args) -> int:
    game = _load_valid(args.game)
    if args.method == "analytic2x2":
        result = oracle.analytic_2x2(game)
    elif args.method == "finegrid":
        result = oracle.finegrid_refine(game, levels=args.levels)
    else:
        if args.r is None or args.eps is None:
            raise CommandError("support-enum needs --r and --eps", EXIT_USAGE)
        result = oracle.support_enum(game, args.r, args.eps)
    if result is None:
        _emit({"format": "oracle-result-v1", "found": False, "method": args.method})
        _say("no r-uniform profile within eps")
        return EXIT_DOMAIN
    _emit({"format": "oracle-result-v1", "found": True, **result.to_dict()})
    _say(f"{result.method}: certified regret {result.certified_regret:.3g}")
    return EXIT_OK


def cmd_gen(args) -> int:
    canonical = args.kind in ("mp", "coord", "rps")
    if canonical and any(v is not None for v in (args.n, args.m, args.k, args.seed)):
        raise CommandError(f"--kind {args.kind} takes no --n/--m/--k/--seed", EXIT_USAGE)
    if not canonical and args.seed is None:
        raise CommandError(f"--kind {args.kind} needs --seed", EXIT_USAGE)
    if args.k is not None and args.kind != "random-gg":
        raise CommandError("--k only applies to --kind random-gg", EXIT_USAGE)
    n = 2 if args.n is None else args.n
    m = 2 if args.m is None else args.m
    k = 3 if args.k is None else args.k
    if n < 1 or m < 1 or k < 1:
        raise CommandError("--n, --m and --k must be positive", EXIT_USAGE)
    rng = None if canonical else rng_for(args.seed)
    try:
        game = make_game(args.kind, rng, n=n, m=m, k=k)
    except ValueError as exc:
        raise CommandError(str(exc), EXIT_USAGE) from exc
    text = dumps_game(game)
    if args.out:
        Path(args.out).write_text(text)
        _say(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_experiment(args) -> int:
    results = rounding_experiment(args.trials, args.eps, args.kind, args.seed, n=args.n, m=args.m)
    passes = sum(r.passed for r in results)
    _emit(
        {
            "format": "rounding-experiment-v1",
            "kind": args.kind,
            "eps": args.eps,
            "seed": args.seed,
            "trials": [r.to_dict() for r in results],
            "passes": passes,
            "failures": len(results) - passes,
        }
    )
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        _say(f"{mark} trial {r.trial}: regret {r.regret:.4g} <= {r.bound:.4g} grid {list(r.grid)}{' clamped' if r.clamped else ''}")
    _say(f"{passes}/{len(results)} passed")
    return EXIT_OK if passes == len(results) else EXIT_DOMAIN


def cmd_bench(args) -> int:
    rows = brute_force_scaling(tuple(args.sizes), repeats=args.repeats, seed=args.seed)
    base = rows[0]
    for row in rows:
        row["time_ratio"] = row["seconds"] / base["seconds"]
        row["count_ratio"] = row["profiles"] / base["profiles"]
    _emit({"format": "bench-v1", "rows": rows})
    for row in rows:
        _say(f"s={row['s']:>4} profiles={row['profiles']:>7} time x{row['time_ratio']:.2f} count x{row['count_ratio']:.2f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmhg", description="Sparse-grid approximate Nash equilibria for GMhGs")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a gmhg-v1 game file")
    p.add_argument("game")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("info", help="sizes, grid plans and primal-graph statistics")
    p.add_argument("game")
    p.add_argument("--eps", type=_positive, required=True)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("check", help="per-player regrets of a strategy file")
    p.add_argument("game")
    p.add_argument("strategy")
    p.add_argument("--eps", type=_nonneg, default=0.0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("round", help="round a strategy onto the eps grid")
    p.add_argument("game")
    p.add_argument("strategy")
    p.add_argument("--eps", type=_positive, required=True)
    p.add_argument("--grid", type=int, nargs="+", help="override grid sizes (one value or one per player)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("solve", help="find grid eps-Nash equilibria")
    p.add_argument("game")
    p.add_argument("--eps", type=_nonneg, required=True)
    p.add_argument("--method", choices=("brute", "tree", "nashprop-brute"), default="brute")
    p.add_argument("--all", action="store_true", help="all solutions instead of the first")
    p.add_argument("--budget", type=int, default=DEFAULT_SEARCH_BUDGET)
    p.add_argument("--table-budget", type=int, default=DEFAULT_TABLE_BUDGET)
    p.add_argument("--grid", type=int, nargs="+", help="override grid sizes (one value or one per player)")
    p.add_argument("--max-solutions", type=int, default=1000)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="reference equilibria")
    p.add_argument("game")
    p.add_argument("--method", choices=("analytic2x2", "finegrid", "support-enum"), required=True)
    p.add_argument("--r", type=int)
    p.add_argument("--eps", type=_nonneg)
    p.add_argument("--levels", type=int, default=40)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="write a canonical or seeded random game")
    p.add_argument("--kind", choices=("mp", "coord", "rps", "random-nf", "random-tree-poly", "random-gg"), required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("experiment-theorem1", help="round oracle equilibria and check the eps guarantee")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--eps", type=_positive, default=0.05)
    p.add_argument("--kind", choices=("mp", "coord", "rps", "random-nf", "random-tree-poly", "random-gg"), default="random-nf")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=2)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bench", help="brute-force grid search scaling on 2x2 games")
    p.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 40, 80])
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "grid", None) and len(args.grid) == 1:
        args.grid = args.grid[0]
    try:
        return args.func(args)
    except CommandError as exc:
        _say(f"error: {exc}")
        return exc.code
    except (ParseError, FileNotFoundError) as exc:
        _say(f"error: {exc}")
        return EXIT_USAGE
    except (BudgetExceeded, NotATree) as exc:
        _say(f"refused: {exc}")
        return EXIT_REFUSAL
    except (GameError, ValueError) as exc:
        _say(f"error: {exc}")
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
