"""Seeded end-to-end experiments.

``rounding_experiment`` runs the rounding guarantee on random games: find a
(near-)exact equilibrium with an oracle, size the grid, round, and check the
rounded profile's regret. ``brute_force_scaling`` times grid search on
two-player two-action games for the power-law micro-benchmark.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import generators, oracle, strategy
from .csp import brute_force_solve, induce_csp
from .discretization import fixed_plan, linf_distance, plan_gmhg, round_to_grid

ETA_FRACTION = 0.1
RANDOM_KINDS = ("random-nf", "random-tree-poly", "random-gg")


@dataclass
class TrialResult:
    trial: int
    eta: float
    oracle: str
    grid: tuple[int, ...]
    clamped: bool
    distance: float
    regret: float
    bound: float
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__, grid=list(self.grid))


def make_game(kind: str, rng: np.random.Generator | None, n: int = 2, m: int = 2, k: int = 3):
    if kind == "mp":
        return generators.matching_pennies()
    if kind == "coord":
        return generators.coordination()
    if kind == "rps":
        return generators.rock_paper_scissors()
    if rng is None:
        raise ValueError(f"kind {kind!r} needs a seed")
    if kind == "random-nf":
        return generators.random_normal_form(n, m, rng)
    if kind == "random-tree-poly":
        return generators.random_tree_polymatrix(n, m, rng)
    if kind == "random-gg":
        return generators.random_graphical(n, m, k, rng)
    raise ValueError(f"unknown game kind {kind!r}")


def reference_equilibrium(game, eps: float) -> oracle.OracleResult:
    if game.n == 2 and game.num_actions == (2, 2):
        return oracle.analytic_2x2(game)
    return oracle.finegrid_refine(game)


def rounding_trial(game, eps: float, trial: int = 0) -> TrialResult:
    ne = reference_equilibrium(game, eps)
    plan = plan_gmhg(game, None, eps)
    grid_profile = round_to_grid(ne.profile, plan)
    q = [g.probs for g in grid_profile]
    regret = max(strategy.regrets(game, q))
    bound = eps + ne.certified_regret + strategy.REGRET_TOL
    note = ""
    passed = regret <= bound
    if ne.certified_regret > ETA_FRACTION * eps:
        passed = False
        note = f"oracle eta {ne.certified_regret:.3g} above {ETA_FRACTION} * eps"
    return TrialResult(
        trial=trial,
        eta=ne.certified_regret,
        oracle=ne.method,
        grid=plan.grid,
        clamped=plan.clamped,
        distance=linf_distance(ne.profile, q),
        regret=regret,
        bound=bound,
        passed=passed,
        note=note,
    )


def rounding_experiment(trials: int, eps: float, kind: str = "random-nf", seed: int = 0, n: int = 2, m: int = 2, k: int = 3):
    """One trial per spawned child of ``SeedSequence(seed)``."""
    results = []
    children = np.random.SeedSequence(seed).spawn(trials)
    for t, child in enumerate(children):
        rng = generators.rng_for(child) if kind in RANDOM_KINDS else None
        game = make_game(kind, rng, n=n, m=m, k=k)
        results.append(rounding_trial(game, eps, t))
    return results


def brute_force_scaling(grid_sizes=(10, 20, 40, 80), repeats: int = 5, seed: int = 0, eps: float = 0.05):
    """Best-of-``repeats`` wall time of exhaustive grid search per grid size.

    Tables are materialized before timing so only the search over the
    (s + 1)^2 profiles is measured.
    """
    game = generators.random_normal_form(2, 2, generators.rng_for(seed))
    rows = []
    for s in grid_sizes:
        csp = induce_csp(game, fixed_plan(game, s, eps)).materialize()
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            brute_force_solve(csp, "all", budget=10**7)
            best = min(best, time.perf_counter() - t0)
        rows.append({"s": s, "profiles": csp.num_profiles, "seconds": best})
    return rows
