"""The game-induced constraint satisfaction problem and its solvers.

Variables are players, domains are grid mixed strategies and the
constraint owned by player i holds exactly when i's regret under the local
assignment to N(i) is at most eps. Three solvers are provided:

* ``brute_force_solve``: depth-first search over the product of domains.
* ``arc_consistency``: generalized arc consistency on the best-response
  tables; ``propagate_and_search`` runs it before search (the
  ``nashprop-brute`` CLI method).
* ``tree_solve``: two-pass dynamic programming over a join tree, for games
  whose interaction graph is a forest.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import networkx as nx
from networkx.algorithms.approximation import treewidth_min_fill_in
import numpy as np

from . import strategy
from .discretization import DEFAULT_LATTICE_BUDGET, DiscretizationPlan, LatticeStrategy, enumerate_lattice
from .game_model import BudgetExceeded, GMhG

DEFAULT_TABLE_BUDGET = 10**7
DEFAULT_SEARCH_BUDGET = 10**6


class NotATree(Exception):
    """The interaction graph has a cycle; ``cycle`` lists its edges."""

    def __init__(self, cycle: list[tuple[int, int]]):
        nodes = " - ".join(str(u) for u, _ in cycle) + f" - {cycle[0][0]}"
        super().__init__(f"interaction graph is not a forest; cycle {nodes}")
        self.cycle = cycle


class BestResponseConstraint:
    """Indicator of "owner's regret <= eps" over assignments to N(owner).

    Evaluates lazily through :mod:`gmhg.strategy`, or as a materialized
    boolean table with one axis per scope player (sorted ids).
    """

    def __init__(self, csp: "GameCSP", owner: int, table: np.ndarray | None = None):
        self.csp = csp
        self.owner = owner
        self.scope = csp.game.neighborhood(owner)
        self._table = table

    @property
    def table_size(self) -> int:
        return math.prod(len(self.csp.domains[j]) for j in self.scope)

    @property
    def materialized(self) -> bool:
        return self._table is not None

    def __call__(self, assignment: Mapping[int, int]) -> bool:
        if self._table is not None:
            return bool(self._table[tuple(assignment[j] for j in self.scope)])
        csp = self.csp
        profile = list(strategy.uniform(csp.game))
        for j in self.scope:
            profile[j] = csp.domains[j][assignment[j]].probs
        return strategy.regret(csp.game, profile, self.owner) <= csp.eps + strategy.REGRET_TOL

    def table(self, budget: int = DEFAULT_TABLE_BUDGET) -> np.ndarray:
        if self._table is None:
            if self.table_size > budget:
                raise BudgetExceeded(
                    f"constraint of player {self.owner}: table of {self.table_size} entries exceeds budget {budget}",
                    self.table_size,
                    player=self.owner,
                )
            self._table = _regret_table(self.csp, self.owner) <= self.csp.eps + strategy.REGRET_TOL
            self._table.setflags(write=False)
        return self._table


def _regret_table(csp: "GameCSP", i: int) -> np.ndarray:
    """Regret of player i for every assignment to N(i)."""
    game = csp.game
    scope = game.neighborhood(i)
    axis = {j: k for k, j in enumerate(scope)}
    sizes = [len(csp.domains[j]) for j in scope]
    u = np.zeros((game.num_actions[i],) + tuple(sizes))
    for h in game.owned(i):
        letters = {j: chr(ord("a") + k) for k, j in enumerate(h.clique)}
        upper = {j: chr(ord("A") + axis[j]) for j in h.clique}
        terms = ["".join(letters[j] for j in h.clique)]
        operands = [game.tensor(h)]
        for j in h.clique:
            if j == i:
                continue
            terms.append(upper[j] + letters[j])
            operands.append(csp.probs[j])
        others = sorted((j for j in h.clique if j != i), key=axis.get)
        out = letters[i] + "".join(upper[j] for j in others)
        part = np.einsum(",".join(terms) + "->" + out, *operands, optimize=True)
        shape = [game.num_actions[i]] + [sizes[axis[j]] if j in others else 1 for j in scope]
        u = u + part.reshape(shape)
    best = u.max(axis=0)
    own = csp.probs[i]  # (D_i, m_i)
    own_axis = axis[i]
    moved = np.moveaxis(u, 1 + own_axis, 1)  # (m_i, D_i, rest...)
    expected = np.einsum("ad,ad...->d...", own.T, moved)
    expected = np.moveaxis(expected, 0, own_axis)
    return np.maximum(best - expected, 0.0)


@dataclass
class GameCSP:
    game: GMhG
    plan: DiscretizationPlan
    eps: float
    domains: list[list[LatticeStrategy]]
    constraints: list[BestResponseConstraint] = field(default_factory=list)

    def __post_init__(self):
        self.probs = [
            np.array([d.probs for d in dom]).reshape(len(dom), self.game.num_actions[j])
            for j, dom in enumerate(self.domains)
        ]
        if not self.constraints:
            self.constraints = [BestResponseConstraint(self, i) for i in range(self.game.n)]

    @property
    def n(self) -> int:
        return self.game.n

    def domain_sizes(self) -> list[int]:
        return [len(d) for d in self.domains]

    @property
    def num_profiles(self) -> int:
        return math.prod(self.domain_sizes())

    def scope(self, i: int) -> tuple[int, ...]:
        return self.constraints[i].scope

    def profile(self, indices: Sequence[int]) -> list[LatticeStrategy]:
        return [self.domains[j][d] for j, d in enumerate(indices)]

    def materialize(self, budget: int = DEFAULT_TABLE_BUDGET) -> "GameCSP":
        for c in self.constraints:
            c.table(budget)
        return self

    def restrict(self, masks: Sequence[np.ndarray]) -> "GameCSP":
        """Sub-CSP keeping the domain values selected by boolean ``masks``;
        materialized tables are sliced rather than recomputed."""
        domains = [[d for d, keep in zip(dom, mask) if keep] for dom, mask in zip(self.domains, masks)]
        sub = GameCSP(self.game, self.plan, self.eps, domains)
        for old, new in zip(self.constraints, sub.constraints):
            if old.materialized:
                idx = np.ix_(*[np.flatnonzero(masks[j]) for j in old.scope])
                t = old._table[idx]
                t.setflags(write=False)
                new._table = t
        return sub


def induce_csp(
    game: GMhG,
    plan: DiscretizationPlan,
    eps: float | None = None,
    lattice_budget: int = DEFAULT_LATTICE_BUDGET,
) -> GameCSP:
    if eps is None:
        eps = plan.eps
    domains = [list(enumerate_lattice(plan, i, game.num_actions[i], lattice_budget)) for i in range(game.n)]
    return GameCSP(game, plan, eps, domains)


def _checkers(csp: GameCSP, table_budget: int):
    """For each variable, the constraints that become fully assigned at it
    (scope max equals the variable) when assigning in id order."""
    by_last: list[list] = [[] for _ in range(csp.n)]
    for c in csp.constraints:
        if c.table_size <= table_budget:
            tab = c.table(table_budget)
            by_last[max(c.scope)].append((c.scope, tab, None))
        else:
            by_last[max(c.scope)].append((c.scope, None, c))
    return by_last


def _search(csp: GameCSP, first_only: bool, node_budget: int | None, table_budget: int) -> list[tuple[int, ...]]:
    sizes = csp.domain_sizes()
    if any(s == 0 for s in sizes):
        return []
    checks = _checkers(csp, table_budget)
    n = csp.n
    assignment = [0] * n
    solutions: list[tuple[int, ...]] = []
    visited = 0

    def consistent(var: int) -> bool:
        for scope, tab, lazy in checks[var]:
            if tab is not None:
                if not tab[tuple(assignment[j] for j in scope)]:
                    return False
            elif not lazy({j: assignment[j] for j in scope}):
                return False
        return True

    def extend(var: int) -> bool:
        nonlocal visited
        for d in range(sizes[var]):
            visited += 1
            if node_budget is not None and visited > node_budget:
                raise BudgetExceeded(f"search visited more than {node_budget} nodes", visited)
            assignment[var] = d
            if not consistent(var):
                continue
            if var == n - 1:
                solutions.append(tuple(assignment))
                if first_only:
                    return True
            elif extend(var + 1) and first_only:
                return True
        return False

    extend(0)
    return solutions


def solve_indices(
    csp: GameCSP,
    mode: str = "all",
    budget: int = DEFAULT_SEARCH_BUDGET,
    table_budget: int = DEFAULT_TABLE_BUDGET,
) -> list[tuple[int, ...]]:
    """Brute-force search returning domain-index tuples in lexicographic order."""
    if mode == "all":
        if csp.num_profiles > budget:
            raise BudgetExceeded(f"{csp.num_profiles} grid profiles exceeds budget {budget}", csp.num_profiles)
        return _search(csp, False, None, table_budget)
    if mode == "first":
        return _search(csp, True, budget, table_budget)
    raise ValueError(f"unknown mode {mode!r}")


def brute_force_solve(
    csp: GameCSP,
    mode: str = "all",
    budget: int = DEFAULT_SEARCH_BUDGET,
    table_budget: int = DEFAULT_TABLE_BUDGET,
) -> list[list[LatticeStrategy]]:
    """All grid profiles satisfying every constraint (``mode="all"``), or
    the lexicographically first one (``mode="first"``)."""
    return [csp.profile(ix) for ix in solve_indices(csp, mode, budget, table_budget)]


@dataclass
class PropagationTrace:
    sizes: list[list[int]] = field(default_factory=list)  # per round, per player
    deleted: list[tuple[int, int, tuple[int, ...]]] = field(default_factory=list)  # (round, player, counts)
    rounds: int = 0
    empty: bool = False

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "sizes": self.sizes,
            "deletions": len(self.deleted),
            "empty": self.empty,
        }


def arc_consistency(csp: GameCSP, table_budget: int = DEFAULT_TABLE_BUDGET) -> tuple[GameCSP, PropagationTrace]:
    """Delete every domain value that has no support in some constraint
    over its current domains, until nothing changes.

    Sound: a value used by any grid eps-NE always has support. An empty
    domain certifies that the grid has no eps-NE for this plan.
    """
    csp.materialize(table_budget)
    masks = [np.ones(s, dtype=bool) for s in csp.domain_sizes()]
    trace = PropagationTrace(sizes=[csp.domain_sizes()])
    changed = True
    while changed:
        changed = False
        trace.rounds += 1
        for c in csp.constraints:
            idx = np.ix_(*[np.flatnonzero(masks[j]) for j in c.scope])
            sub = c.table()[idx]
            for pos, j in enumerate(c.scope):
                others = tuple(k for k in range(len(c.scope)) if k != pos)
                support = sub.any(axis=others) if others else sub
                alive = np.flatnonzero(masks[j])
                dead = alive[~support]
                if dead.size:
                    changed = True
                    for d in dead:
                        trace.deleted.append((trace.rounds, j, csp.domains[j][d].counts))
                    masks[j][dead] = False
                    idx = np.ix_(*[np.flatnonzero(masks[k]) for k in c.scope])
                    sub = c.table()[idx]
        trace.sizes.append([int(m.sum()) for m in masks])
        if any(not m.any() for m in masks):
            trace.empty = True
            break
    return csp.restrict(masks), trace


def propagate_and_search(
    csp: GameCSP,
    mode: str = "all",
    budget: int = DEFAULT_SEARCH_BUDGET,
    table_budget: int = DEFAULT_TABLE_BUDGET,
) -> tuple[list[list[LatticeStrategy]], PropagationTrace]:
    """Arc consistency followed by backtracking search on the filtered
    domains."""
    filtered, trace = arc_consistency(csp, table_budget)
    if trace.empty:
        return [], trace
    return brute_force_solve(filtered, mode, budget, table_budget), trace


def interaction_graph(game: GMhG) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(game.n))
    g.add_edges_from(game.interaction_edges())
    return g


def constraint_primal_graph(game: GMhG) -> nx.Graph:
    """Primal graph of the CSP: a clique over every N(i)."""
    g = nx.Graph()
    g.add_nodes_from(range(game.n))
    for i in range(game.n):
        scope = game.neighborhood(i)
        g.add_edges_from((a, b) for k, a in enumerate(scope) for b in scope[k + 1 :])
    return g


def min_fill_width(g: nx.Graph) -> int:
    if g.number_of_nodes() == 0:
        return 0
    width, _ = treewidth_min_fill_in(g)
    return int(width)


@dataclass(frozen=True)
class PrimalGraphStats:
    nodes: int
    edges: int
    max_degree: int
    width_bound: int
    is_forest: bool
    constraint_edges: int
    constraint_width_bound: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def primal_graph_stats(game: GMhG) -> PrimalGraphStats:
    """Sizes and min-fill width upper bounds.

    ``width_bound`` is for the interaction graph (edge i-j when j is in
    N(i)); ``constraint_width_bound`` for the CSP primal graph with a clique
    over every N(i). Both are upper bounds, not exact treewidths.
    """
    g = interaction_graph(game)
    cg = constraint_primal_graph(game)
    return PrimalGraphStats(
        nodes=g.number_of_nodes(),
        edges=g.number_of_edges(),
        max_degree=max((d for _, d in g.degree()), default=0),
        width_bound=min_fill_width(g),
        is_forest=nx.is_forest(g) if g.number_of_nodes() else True,
        constraint_edges=cg.number_of_edges(),
        constraint_width_bound=min_fill_width(cg),
    )


@dataclass
class TreeSolution:
    """Calibrated join-tree tables representing every grid eps-NE.

    Node u of the join tree holds player u's closed neighborhood in the
    interaction graph; its table marks the local assignments that satisfy
    every constraint in u's subtree and extend to a full solution of it.
    """

    csp: GameCSP
    order: list[int]  # parents before children
    parent: dict[int, int | None]
    scopes: dict[int, tuple[int, ...]]
    tables: dict[int, np.ndarray]

    @property
    def solvable(self) -> bool:
        roots = [u for u in self.order if self.parent[u] is None]
        return all(self.tables[r].any() for r in roots)

    def table_sizes(self) -> dict[int, int]:
        return {u: int(t.size) for u, t in self.tables.items()}

    def _choices(self, u: int, assignment: dict[int, int]) -> Iterator[dict[int, int]]:
        scope = self.scopes[u]
        free = [j for j in scope if j not in assignment]
        index = tuple(assignment[j] if j in assignment else slice(None) for j in scope)
        sub = self.tables[u][index]
        for hit in np.argwhere(sub) if free else ([()] if sub else []):
            yield dict(zip(free, (int(v) for v in hit)))

    def solutions(self) -> Iterator[tuple[int, ...]]:
        """Every solution as domain indices, without dead ends."""
        n = self.csp.n
        order = self.order

        def walk(k: int, assignment: dict[int, int]):
            if k == len(order):
                yield tuple(assignment[j] for j in range(n))
                return
            for extra in self._choices(order[k], assignment):
                assignment.update(extra)
                yield from walk(k + 1, assignment)
                for j in extra:
                    del assignment[j]

        if not self.solvable:
            return
        yield from walk(0, {})

    def first(self) -> tuple[int, ...] | None:
        return next(self.solutions(), None)

    def profiles(self) -> Iterator[list[LatticeStrategy]]:
        for ix in self.solutions():
            yield self.csp.profile(ix)


def build_join_tree(game: GMhG) -> tuple[list[int], dict[int, int | None], dict[int, tuple[int, ...]]]:
    """Join tree for a forest interaction graph, or ``NotATree``.

    Each player u is a node with scope {u} plus its graph neighbors; a node's
    separator with its parent is {u, parent}. Roots are the lowest id of each
    component and nodes are listed in BFS order.
    """
    g = interaction_graph(game)
    try:
        cycle = nx.find_cycle(g)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        raise NotATree([(int(a), int(b)) for a, b in cycle])
    order: list[int] = []
    parent: dict[int, int | None] = {}
    for root in range(game.n):
        if root in parent:
            continue
        parent[root] = None
        queue = deque([root])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in sorted(g.neighbors(u)):
                if w not in parent:
                    parent[w] = u
                    queue.append(w)
    scopes = {u: tuple(sorted({u, *g.neighbors(u)})) for u in range(game.n)}
    return order, parent, scopes


def tree_solve(
    csp: GameCSP,
    mode: str = "first",
    budget: int = DEFAULT_TABLE_BUDGET,
):
    """Two-pass dynamic programming over the join tree.

    The upstream pass (leaves to roots) combines each node's best-response
    table with the messages of its children, where a message marks the
    separator assignments extendible to a solution of the child's subtree.
    ``mode="first"`` returns a list with one solution (or none);
    ``mode="all-compact"`` returns the :class:`TreeSolution` itself.
    """
    if mode not in ("first", "all-compact"):
        raise ValueError(f"unknown mode {mode!r}")
    order, parent, scopes = build_join_tree(csp.game)
    sizes = csp.domain_sizes()
    for u in order:
        width = math.prod(sizes[j] for j in scopes[u])
        if width > budget:
            raise BudgetExceeded(f"join-tree node {u}: table of {width} entries exceeds budget {budget}", width, player=u)
    tables: dict[int, np.ndarray] = {}
    for u in reversed(order):
        scope = scopes[u]
        c = csp.constraints[u]
        local = c.table(budget)
        shape = [sizes[j] if j in c.scope else 1 for j in scope]
        table = np.broadcast_to(local.reshape(shape), [sizes[j] for j in scope]).copy()
        for w in order:
            if parent.get(w) != u:
                continue
            # message over the separator (u, w), axes in sorted id order
            child_scope = scopes[w]
            keep = [child_scope.index(j) for j in sorted((u, w))]
            drop = tuple(k for k in range(len(child_scope)) if k not in keep)
            message = tables[w].any(axis=drop) if drop else tables[w]
            pair = sorted((u, w))
            shape = [sizes[j] if j in pair else 1 for j in scope]
            table &= message.reshape(shape)
        tables[u] = table
    solution = TreeSolution(csp, order, parent, scopes, tables)
    if mode == "all-compact":
        return solution
    first = solution.first()
    return [] if first is None else [csp.profile(first)]
