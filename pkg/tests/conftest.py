import itertools

import numpy as np
import pytest

from gmhg import generators
from gmhg.game_model import make_game, make_polymatrix


def joint_payoff(game, p, i):
    """Expected payoff by summing over every joint action of all players."""
    total = 0.0
    for x in itertools.product(*[range(m) for m in game.num_actions]):
        prob = np.prod([p[j][x[j]] for j in range(game.n)])
        value = 0.0
        for h in game.owned(i):
            value += game.tensor(h)[tuple(x[j] for j in h.clique)]
        total += prob * value
    return total


def random_profile(game, rng):
    return [rng.dirichlet(np.ones(m)) for m in game.num_actions]


def path_polymatrix(rng, n=3, m=2):
    return generators.polymatrix_on(n, m, [(j, j + 1) for j in range(n - 1)], rng)


def triangle_polymatrix(rng, m=2):
    return generators.polymatrix_on(3, m, [(0, 1), (1, 2), (0, 2)], rng)


def star_polymatrix(leaves=3):
    one = np.array([[1.0, 0.0], [0.0, 1.0]])
    pairwise = {}
    for leaf in range(1, leaves + 1):
        pairwise[(0, leaf)] = one
        pairwise[(leaf, 0)] = one
    return make_polymatrix(leaves + 1, [2] * (leaves + 1), pairwise, edges=[(0, j) for j in range(1, leaves + 1)])


def asymmetric_pennies():
    """Player 0 mismatches with payoff 1; player 1 matches, HH pays 1 and TT 0.5.

    The unique equilibrium has player 0 at (1/3, 2/3) and player 1 at (1/2, 1/2),
    so no grid with s = 2 contains an exact equilibrium.
    """
    return make_game([("H", "T")] * 2, [(0, (0, 1), [0, 1, 1, 0]), (1, (0, 1), [1, 0, 0, 0.5])])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def mp():
    return generators.matching_pennies()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
