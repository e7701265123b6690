"""Graphical multi-hypermatrix games.

A game is a set of players, each with a finite action set, plus a list of
hyperedges. A hyperedge is owned by one player and carries a dense payoff
hypermatrix over the joint actions of its clique; the owner's payoff is the
sum of the hypermatrices it owns. Graphical games (one hyperedge per player),
polymatrix games (pairwise hyperedges) and normal-form games (one hyperedge
over all players) are special cases.

Payoffs are flattened row-major over the clique in listed order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np


class GameError(ValueError):
    """Raised when a game cannot be constructed from the given pieces."""


class BudgetExceeded(Exception):
    """An enumeration would exceed its configured budget.

    ``required`` is the number of items the operation would have to touch.
    """

    def __init__(self, message: str, required: int, player: int | None = None):
        super().__init__(message)
        self.required = required
        self.player = player


@dataclass(frozen=True)
class Player:
    id: int
    actions: tuple[str, ...]

    @property
    def num_actions(self) -> int:
        return len(self.actions)


@dataclass(frozen=True, eq=False)
class Hyperedge:
    owner: int
    clique: tuple[int, ...]
    payoffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "clique", tuple(int(j) for j in self.clique))
        arr = np.array(self.payoffs, dtype=float).ravel()
        arr.setflags(write=False)
        object.__setattr__(self, "payoffs", arr)


@dataclass(frozen=True, eq=False)
class GMhG:
    players: tuple[Player, ...]
    hyperedges: tuple[Hyperedge, ...]

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "hyperedges", tuple(self.hyperedges))

    @property
    def n(self) -> int:
        return len(self.players)

    @cached_property
    def num_actions(self) -> tuple[int, ...]:
        return tuple(p.num_actions for p in self.players)

    @cached_property
    def _owned(self) -> tuple[tuple[Hyperedge, ...], ...]:
        owned: list[list[Hyperedge]] = [[] for _ in range(self.n)]
        for h in self.hyperedges:
            if 0 <= h.owner < self.n:
                owned[h.owner].append(h)
        return tuple(tuple(hs) for hs in owned)

    def owned(self, i: int) -> tuple[Hyperedge, ...]:
        """Hyperedges owned by player ``i`` (the set C_i)."""
        return self._owned[i]

    def shape(self, clique: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.num_actions[j] for j in clique)

    def tensor(self, h: Hyperedge) -> np.ndarray:
        """The hyperedge payoffs as an array with one axis per clique member."""
        return h.payoffs.reshape(self.shape(h.clique))

    @cached_property
    def _neighborhoods(self) -> tuple[tuple[int, ...], ...]:
        out = []
        for i in range(self.n):
            members = {i}
            for h in self.owned(i):
                members.update(h.clique)
            out.append(tuple(sorted(members)))
        return tuple(out)

    def neighborhood(self, i: int) -> tuple[int, ...]:
        """N(i): players whose actions affect i's payoff, including i."""
        return self._neighborhoods[i]

    @cached_property
    def _affected(self) -> tuple[tuple[int, ...], ...]:
        out: list[set[int]] = [set() for _ in range(self.n)]
        for j in range(self.n):
            for i in self.neighborhood(j):
                if i != j:
                    out[i].add(j)
        return tuple(tuple(sorted(s)) for s in out)

    def affected(self, i: int) -> tuple[int, ...]:
        """Neigh_i: players (other than i) whose payoff depends on i."""
        return self._affected[i]

    def interaction_edges(self) -> list[tuple[int, int]]:
        """Undirected edges {i, j} with j in N(i), j != i."""
        edges = set()
        for i in range(self.n):
            for j in self.neighborhood(i):
                if j != i:
                    edges.add((min(i, j), max(i, j)))
        return sorted(edges)


@dataclass(frozen=True)
class HyperedgeRange:
    owner: int
    clique: tuple[int, ...]
    upper: float
    lower: float

    @property
    def range(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class PayoffRanges:
    """Per-hyperedge max, min and range, aligned with ``game.hyperedges``."""

    entries: tuple[HyperedgeRange, ...]

    def __getitem__(self, index: int) -> HyperedgeRange:
        return self.entries[index]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class RepresentationStats:
    entries: int
    n: int
    m: int  # max actions per player
    k: int  # max neighborhood size
    l: int  # max hyperedges owned by a player
    c: int  # max clique size


def _labels(action_spec) -> tuple[str, ...]:
    if isinstance(action_spec, (int, np.integer)):
        return tuple(str(a) for a in range(int(action_spec)))
    return tuple(str(a) for a in action_spec)


def make_game(actions: Sequence, hyperedges: Sequence[tuple[int, Sequence[int], Sequence[float]]]) -> GMhG:
    """Build a game from action specs (counts or label lists) and
    ``(owner, clique, payoffs)`` triples. No validation is performed."""
    players = tuple(Player(i, _labels(a)) for i, a in enumerate(actions))
    edges = tuple(Hyperedge(o, tuple(c), np.asarray(p, dtype=float)) for o, c, p in hyperedges)
    return GMhG(players, edges)


def validate(game: GMhG) -> list[str]:
    """Return the list of structural violations; empty when the game is valid."""
    problems = []
    ids = [p.id for p in game.players]
    if game.n < 1:
        problems.append("game has no players")
    if sorted(ids) != list(range(game.n)):
        problems.append(f"player ids {ids} are not dense in [0, {game.n})")
    elif ids != list(range(game.n)):
        problems.append("players are not listed in id order")
    for p in game.players:
        if p.num_actions < 1:
            problems.append(f"player {p.id} has no actions")
        if len(set(p.actions)) != p.num_actions:
            problems.append(f"player {p.id} has duplicate action labels")
    for index, h in enumerate(game.hyperedges):
        where = f"hyperedge {index} (owner {h.owner})"
        if not 0 <= h.owner < game.n:
            problems.append(f"{where}: owner is not a player")
        if len(set(h.clique)) != len(h.clique):
            problems.append(f"{where}: clique {list(h.clique)} has repeated players")
        if any(not 0 <= j < game.n for j in h.clique):
            problems.append(f"{where}: clique {list(h.clique)} names an unknown player")
            continue
        if h.owner not in h.clique:
            problems.append(f"{where}: owner not in clique {list(h.clique)}")
        expected = math.prod(game.shape(h.clique))
        if h.payoffs.size != expected:
            problems.append(f"{where}: {h.payoffs.size} payoff entries, expected {expected}")
        if not np.all(np.isfinite(h.payoffs)):
            problems.append(f"{where}: non-finite payoff entries")
    return problems


def check_valid(game: GMhG) -> GMhG:
    problems = validate(game)
    if problems:
        raise GameError("; ".join(problems))
    return game


def make_normal_form(n: int, actions: Sequence, tensors: Sequence[Sequence[float]]) -> GMhG:
    """Normal-form game: player i owns a single hyperedge over all players."""
    if len(actions) != n or len(tensors) != n:
        raise GameError(f"expected {n} action sets and {n} payoff tensors")
    clique = tuple(range(n))
    game = make_game(actions, [(i, clique, np.asarray(t, dtype=float).ravel()) for i, t in enumerate(tensors)])
    expected = math.prod(game.num_actions)
    for i, h in enumerate(game.hyperedges):
        if h.payoffs.size != expected:
            raise GameError(f"player {i}: tensor has {h.payoffs.size} entries, expected {expected}")
    return check_valid(game)


def make_polymatrix(
    n: int,
    actions: Sequence,
    pairwise: Mapping[tuple[int, int], Sequence],
    edges: Sequence[tuple[int, int]] | None = None,
) -> GMhG:
    """Polymatrix game over an interaction graph.

    ``pairwise[(i, j)]`` is i's |A_i| x |A_j| payoff matrix against j. With
    ``edges=None`` the interaction graph is complete (classical polymatrix).
    """
    if edges is None:
        edges = list(itertools.combinations(range(n), 2))
    hyperedges = []
    for i, j in edges:
        for a, b in ((i, j), (j, i)):
            if (a, b) not in pairwise:
                raise GameError(f"missing payoff matrix for player {a} against {b}")
    owned_pairs = sorted({p for e in edges for p in (tuple(e), tuple(e)[::-1])})
    for a, b in owned_pairs:
        hyperedges.append((a, (a, b), np.asarray(pairwise[(a, b)], dtype=float).ravel()))
    return check_valid(make_game(actions, hyperedges))


def payoff_ranges(game: GMhG) -> PayoffRanges:
    entries = []
    for h in game.hyperedges:
        if h.payoffs.size:
            entries.append(HyperedgeRange(h.owner, h.clique, float(h.payoffs.max()), float(h.payoffs.min())))
        else:
            entries.append(HyperedgeRange(h.owner, h.clique, 0.0, 0.0))
    return PayoffRanges(tuple(entries))


def local_payoff_table(game: GMhG, i: int) -> np.ndarray:
    """M'_i as a dense array over the joint actions of N(i) (sorted order)."""
    scope = game.neighborhood(i)
    axis = {j: k for k, j in enumerate(scope)}
    table = np.zeros(game.shape(scope))
    for h in game.owned(i):
        t = game.tensor(h)
        order = sorted(range(len(h.clique)), key=lambda k: axis[h.clique[k]])
        t = np.transpose(t, order)
        members = [h.clique[k] for k in order]
        expand = [game.num_actions[j] if j in members else 1 for j in scope]
        table = table + t.reshape(expand)
    return table


def global_payoff_bounds(game: GMhG, budget: int = 10**6) -> list[tuple[float, float]]:
    """Exact (max, min) of each player's local payoff by enumeration.

    This is intractable in general, so every player's joint-action count is
    checked against ``budget`` before any work is done.
    """
    for i in range(game.n):
        count = math.prod(game.shape(game.neighborhood(i)))
        if count > budget:
            raise BudgetExceeded(
                f"player {i}: {count} joint actions over N(i) exceeds budget {budget}", count, player=i
            )
    bounds = []
    for i in range(game.n):
        table = local_payoff_table(game, i)
        bounds.append((float(table.max()), float(table.min())))
    return bounds


def representation_size(game: GMhG) -> RepresentationStats:
    entries = sum(math.prod(game.shape(h.clique)) for h in game.hyperedges)
    return RepresentationStats(
        entries=entries,
        n=game.n,
        m=max(game.num_actions, default=0),
        k=max((len(game.neighborhood(i)) for i in range(game.n)), default=0),
        l=max((len(game.owned(i)) for i in range(game.n)), default=0),
        c=max((len(h.clique) for h in game.hyperedges), default=0),
    )


def to_hypergraphical(game: GMhG) -> GMhG:
    """Add zero-valued hyperedges so every clique is owned by all its members.

    The result satisfies the hypergraphical symmetry property (C is owned by i
    iff it is owned by j, for i, j in C) and leaves every expected payoff
    unchanged.
    """
    cliques: dict[frozenset, tuple[int, ...]] = {}
    owners: dict[frozenset, set[int]] = {}
    for h in game.hyperedges:
        key = frozenset(h.clique)
        cliques.setdefault(key, h.clique)
        owners.setdefault(key, set()).add(h.owner)
    added = []
    for key, clique in cliques.items():
        for i in clique:
            if i not in owners[key]:
                added.append(Hyperedge(i, clique, np.zeros(math.prod(game.shape(clique)))))
    return GMhG(game.players, game.hyperedges + tuple(added))
