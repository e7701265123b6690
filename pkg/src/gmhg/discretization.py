"""Individually-uniform discretization of mixed strategies.

Player i's probabilities are restricted to multiples of 1/s_i. The grid
sizes come from the sparse-representation bound: with

    s_i = ceil(2 |A_i| max_{j in Neigh_i} sum_{C in C_j} R_{j,C} (|C| - 1) / eps)

the grid point closest in l-infinity to any exact Nash equilibrium is an
eps-Nash equilibrium. Grid strategies are kept as integer counts so that
membership and normalization are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .game_model import BudgetExceeded, GameError, GMhG, PayoffRanges, payoff_ranges

DEFAULT_LATTICE_BUDGET = 10**6
NORMALIZED_TOL = 1e-9


def _exact(x: float) -> Fraction:
    # Decimal inputs such as 0.1 are taken at their printed value.
    return Fraction(repr(float(x))) if isinstance(x, float) else Fraction(x)


@dataclass(frozen=True)
class DiscretizationPlan:
    grid: tuple[int, ...]
    eps: float
    eps_effective: float
    eps_max: float
    clamped: bool = False
    source: str = "general"
    notes: tuple[str, ...] = field(default=())
    num_actions: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if any(int(s) != s or s < 1 for s in self.grid):
            raise ValueError(f"grid sizes must be positive integers, got {self.grid}")
        object.__setattr__(self, "grid", tuple(int(s) for s in self.grid))

    @property
    def steps(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(1, s) for s in self.grid)

    @property
    def degenerate(self) -> bool:
        """True when no player's grid is constrained by interaction."""
        return math.isinf(self.eps_max)

    def grid_values(self, i: int) -> list[Fraction]:
        s = self.grid[i]
        return [Fraction(z, s) for z in range(s + 1)]

    def to_dict(self) -> dict:
        return {
            "grid": list(self.grid),
            "tau": [str(t) for t in self.steps],
            "eps": self.eps,
            "eps_effective": self.eps_effective,
            "eps_max": None if math.isinf(self.eps_max) else self.eps_max,
            "clamped": self.clamped,
            "degenerate": self.degenerate,
            "source": self.source,
        }


def fixed_plan(game: GMhG, grid: Sequence[int] | int, eps: float) -> DiscretizationPlan:
    """A plan with explicitly chosen grid sizes (no sizing guarantee)."""
    if isinstance(grid, int):
        grid = [grid] * game.n
    if len(grid) != game.n:
        raise ValueError(f"{len(grid)} grid sizes for {game.n} players")
    return DiscretizationPlan(tuple(grid), eps, eps, math.inf, source="fixed", num_actions=game.num_actions)


def interaction_weights(game: GMhG, ranges: PayoffRanges) -> list[float]:
    """sum_{C in C_j} R_{j,C} (|C| - 1) for every player j."""
    weights = [0.0] * game.n
    for h, r in zip(game.hyperedges, ranges.entries):
        weights[h.owner] += r.range * (len(h.clique) - 1)
    return weights


def guarantee_eps_max(game: GMhG, weights: Sequence[float]) -> float:
    """Upper end of the eps range for which the grid sizes are guaranteed.

    Players whose hyperedges are all singletons (or who carry zero
    interaction weight) do not constrain eps.
    """
    bound = math.inf
    for i in range(game.n):
        widest = max((len(h.clique) for h in game.owned(i)), default=1)
        if widest <= 1 or weights[i] <= 0:
            continue
        bound = min(bound, 2 * weights[i] / (widest - 1))
    return bound


def _grid_sizes(game: GMhG, weights: Sequence[float], eps: float) -> tuple[int, ...]:
    grid = []
    e = _exact(eps)
    for i in range(game.n):
        worst = max((weights[j] for j in game.affected(i)), default=0.0)
        if worst <= 0:
            grid.append(1)
            continue
        s = math.ceil(2 * game.num_actions[i] * Fraction(worst) / e)
        grid.append(max(1, s))
    return tuple(grid)


def plan_gmhg(game: GMhG, ranges: PayoffRanges | None, eps: float) -> DiscretizationPlan:
    if not eps > 0:
        raise ValueError("eps must be positive")
    if ranges is None:
        ranges = payoff_ranges(game)
    weights = interaction_weights(game, ranges)
    eps_max = guarantee_eps_max(game, weights)
    clamped = eps > eps_max
    used = eps_max if clamped else eps
    notes = []
    if math.isinf(eps_max):
        notes.append("no interacting hyperedges; eps is unbounded")
    if clamped:
        notes.append(f"eps {eps} exceeds the guarantee bound {eps_max}; grid sized for {eps_max}")
    return DiscretizationPlan(_grid_sizes(game, weights, used), eps, used, eps_max, clamped, "general", tuple(notes), game.num_actions)


def plan_gg(game: GMhG, eps: float) -> DiscretizationPlan:
    """Grid sizes for a graphical game with payoffs normalized to [0, 1].

    Uses ceil(2 |A_i| max_{j in Neigh_i} |Neigh_j| / eps), which only needs
    the graph, not the payoff values.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    for i in range(game.n):
        if len(game.owned(i)) != 1:
            raise GameError(f"player {i} owns {len(game.owned(i))} hyperedges; a graphical game needs exactly 1")
    for h in game.hyperedges:
        if h.payoffs.size and (h.payoffs.min() < -NORMALIZED_TOL or h.payoffs.max() > 1 + NORMALIZED_TOL):
            raise GameError(f"player {h.owner}: payoffs outside [0, 1]; normalize first")
    weights = [float(len(game.neighborhood(j)) - 1) for j in range(game.n)]
    eps_max = guarantee_eps_max(game, weights)
    clamped = eps > eps_max
    used = eps_max if clamped else eps
    return DiscretizationPlan(_grid_sizes(game, weights, used), eps, used, eps_max, clamped, "graphical", (), game.num_actions)


@dataclass(frozen=True)
class LatticeStrategy:
    counts: tuple[int, ...]
    s: int

    def __post_init__(self):
        if sum(self.counts) != self.s or any(z < 0 for z in self.counts):
            raise ValueError(f"counts {self.counts} are not a composition of {self.s}")

    @property
    def probs(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.s

    @property
    def fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(z, self.s) for z in self.counts)

    def labels(self) -> list[str]:
        """Exact rendering such as ``"3/40"``; 0 and 1 stay plain."""
        return [str(f) for f in self.fractions]


def lattice_size(s: int, m: int) -> int:
    return math.comb(s + m - 1, m - 1)


def compositions(s: int, m: int) -> Iterator[tuple[int, ...]]:
    """Compositions of s into m non-negative parts, (s, 0, ...) first."""
    if m == 1:
        yield (s,)
        return
    for first in range(s, -1, -1):
        for rest in compositions(s - first, m - 1):
            yield (first,) + rest


def enumerate_lattice(
    plan: DiscretizationPlan, i: int, m: int | None = None, budget: int = DEFAULT_LATTICE_BUDGET
) -> Iterator[LatticeStrategy]:
    """Every grid mixed strategy of player i exactly once, (s, 0, ...) first."""
    s = plan.grid[i]
    if m is None:
        m = plan.num_actions[i]
    count = lattice_size(s, m)
    if count > budget:
        raise BudgetExceeded(f"player {i}: {count} lattice strategies exceeds budget {budget}", count, player=i)
    return (LatticeStrategy(z, s) for z in compositions(s, m))


def round_strategy(probs, s: int) -> LatticeStrategy:
    """Floor to the grid, then hand the leftover units to the coordinates with
    the largest remainders (ties to the lowest index)."""
    x = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    if abs(x.sum() - 1.0) > 1e-6:
        raise ValueError(f"probabilities sum to {x.sum()!r}, not 1")
    x = x * s
    floors = np.floor(x).astype(int)
    floors = np.minimum(floors, s)
    remainder = x - floors
    leftover = s - int(floors.sum())
    if leftover < 0:
        # Only reachable when the input sums above 1; trim from the largest floors.
        for k in np.argsort(-floors, kind="stable")[:-leftover]:
            floors[k] -= 1
        leftover = 0
    order = np.lexsort((np.arange(x.size), -remainder))
    floors[order[:leftover]] += 1
    return LatticeStrategy(tuple(int(z) for z in floors), s)


def round_to_grid(p, plan: DiscretizationPlan) -> list[LatticeStrategy]:
    return [round_strategy(pi, plan.grid[i]) for i, pi in enumerate(p)]


def linf_distance(p, q) -> float:
    return max(float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))) for a, b in zip(p, q))
