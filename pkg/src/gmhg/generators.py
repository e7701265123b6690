"""Canonical and seeded random games.

Random games draw payoffs uniformly from [0, 1] with numpy's PCG64 bit
generator (``numpy.random.default_rng(seed)``), so a fixed seed reproduces
the same file on every platform.
"""

from __future__ import annotations

import itertools

import numpy as np

from .game_model import GMhG, check_valid, make_game, make_normal_form, make_polymatrix

HT = ("H", "T")


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def matching_pennies() -> GMhG:
    """Player 0 wants to mismatch, player 1 wants to match; payoffs in {0, 1}."""
    return make_normal_form(2, [HT, HT], [[0, 1, 1, 0], [1, 0, 0, 1]])


def coordination() -> GMhG:
    return make_normal_form(2, [HT, HT], [[1, 0, 0, 1], [1, 0, 0, 1]])


def rock_paper_scissors() -> GMhG:
    """Zero-sum RPS rescaled to [0, 1]: win 1, tie 1/2, loss 0."""
    win = np.array([[0.5, 0.0, 1.0], [1.0, 0.5, 0.0], [0.0, 1.0, 0.5]])
    actions = ("R", "P", "S")
    return make_normal_form(2, [actions, actions], [win, 1.0 - win])


def bimatrix(a, b, labels=None) -> GMhG:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    acts = labels or [a.shape[0], a.shape[1]]
    return make_normal_form(2, acts, [a, b])


def random_normal_form(n: int, m: int, rng: np.random.Generator) -> GMhG:
    shape = (m,) * n
    return make_normal_form(n, [m] * n, [rng.random(shape) for _ in range(n)])


def random_tree(n: int, rng: np.random.Generator, max_degree: int | None = None) -> list[tuple[int, int]]:
    """A connected tree; node v attaches to a uniformly chosen earlier node
    with spare degree."""
    degree = [0] * n
    edges = []
    for v in range(1, n):
        options = [u for u in range(v) if max_degree is None or degree[u] < max_degree]
        if not options:
            raise ValueError(f"cannot build a tree on {n} nodes with max degree {max_degree}")
        u = options[int(rng.integers(len(options)))]
        degree[u] += 1
        degree[v] += 1
        edges.append((u, v))
    return edges


def polymatrix_on(n: int, m: int, edges, rng: np.random.Generator) -> GMhG:
    pairwise = {}
    for u, v in edges:
        pairwise[(u, v)] = rng.random((m, m))
        pairwise[(v, u)] = rng.random((m, m))
    return make_polymatrix(n, [m] * n, pairwise, edges=list(edges))


def random_tree_polymatrix(n: int, m: int, rng: np.random.Generator) -> GMhG:
    return polymatrix_on(n, m, random_tree(n, rng), rng)


def random_graphical(n: int, m: int, k: int, rng: np.random.Generator, extra_edges: int = 0) -> GMhG:
    """Graphical game with neighborhoods of size at most k.

    The graph is a random tree with degree at most k - 1 plus up to
    ``extra_edges`` random chords that respect the same cap.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    cap = k - 1
    if cap == 0:
        edges = []
    elif cap == 1:
        edges = [(v - 1, v) for v in range(1, n, 2)]
    else:
        edges = random_tree(n, rng, max_degree=cap)
    degree = [0] * n
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    present = set(edges)
    candidates = [e for e in itertools.combinations(range(n), 2) if e not in present]
    rng.shuffle(candidates)
    for u, v in candidates[:]:
        if extra_edges <= 0:
            break
        if degree[u] < cap and degree[v] < cap:
            present.add((u, v))
            degree[u] += 1
            degree[v] += 1
            extra_edges -= 1
    neighbors = {i: {i} for i in range(n)}
    for u, v in present:
        neighbors[u].add(v)
        neighbors[v].add(u)
    hyperedges = []
    for i in range(n):
        clique = tuple(sorted(neighbors[i]))
        hyperedges.append((i, clique, rng.random(m ** len(clique))))
    return check_valid(make_game([m] * n, hyperedges))


def random_gmhg(n: int, m: int, rng: np.random.Generator, max_edges: int = 3, max_clique: int = 3) -> GMhG:
    """Arbitrary GMhG: each player owns 1..max_edges random cliques containing it."""
    hyperedges = []
    sizes = [int(rng.integers(1, m + 1)) for _ in range(n)]
    for i in range(n):
        for _ in range(int(rng.integers(1, max_edges + 1))):
            size = int(rng.integers(1, min(max_clique, n) + 1))
            others = [j for j in range(n) if j != i]
            chosen = list(rng.choice(others, size=size - 1, replace=False)) if size > 1 else []
            clique = [i] + [int(j) for j in chosen]
            rng.shuffle(clique)
            count = int(np.prod([sizes[j] for j in clique]))
            hyperedges.append((i, tuple(int(j) for j in clique), rng.random(count)))
    return check_valid(make_game(sizes, hyperedges))
