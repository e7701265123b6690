import itertools

import numpy as np
import pytest

from gmhg import generators, strategy
from gmhg.csp import (
    NotATree,
    arc_consistency,
    brute_force_solve,
    induce_csp,
    propagate_and_search,
    primal_graph_stats,
    solve_indices,
    tree_solve,
)
from gmhg.discretization import compositions, fixed_plan, plan_gmhg, round_to_grid
from gmhg.game_model import BudgetExceeded, make_game, make_normal_form
from gmhg.oracle import analytic_2x2

from conftest import asymmetric_pennies, path_polymatrix, star_polymatrix, triangle_polymatrix


def exhaustive_solutions(game, s, eps):
    """Grid eps-NE by direct regret evaluation of every grid profile."""
    grids = [list(compositions(s, m)) for m in game.num_actions]
    out = set()
    for combo in itertools.product(*grids):
        p = [np.array(c, dtype=float) / s for c in combo]
        if strategy.is_epsilon_ne(game, p, eps):
            out.add(combo)
    return out


def as_counts(profiles):
    return {tuple(x.counts for x in prof) for prof in profiles}


def test_induced_matching_pennies(mp):
    csp = induce_csp(mp, fixed_plan(mp, 4, 0.1), 0.1)
    assert csp.n == 2 and csp.domain_sizes() == [5, 5]
    c0 = csp.constraints[0]
    uniform_index = [d.counts for d in csp.domains[1]].index((2, 2))
    assert all(c0({0: d, 1: uniform_index}) for d in range(5))
    assert not c0({0: 0, 1: 0})  # mismatcher at (H, H): regret 1
    table = c0.table()
    assert table.shape == (5, 5)
    assert all(table[a, b] == c0.__class__(csp, 0)({0: a, 1: b}) for a in range(5) for b in range(5))


def test_brute_force_examples(mp):
    csp = induce_csp(mp, fixed_plan(mp, 40, 0.1), 0.1)
    assert ((20, 20), (20, 20)) in as_counts(brute_force_solve(csp, "all"))
    coord = generators.coordination()
    found = as_counts(brute_force_solve(induce_csp(coord, fixed_plan(coord, 5, 0.0), 0.0)))
    assert ((5, 0), (5, 0)) in found and ((0, 5), (0, 5)) in found


def test_coarse_grid_without_exact_equilibrium():
    g = asymmetric_pennies()
    assert exhaustive_solutions(g, 2, 0.0) == set()
    csp = induce_csp(g, fixed_plan(g, 2, 0.0), 0.0)
    assert brute_force_solve(csp) == []
    filtered, trace = arc_consistency(csp)
    assert trace.empty or brute_force_solve(filtered) == []
    # the s = 3 and s = 6 grids contain player 0's (1/3, 2/3) but only s = 6 has player 1's (1/2, 1/2)
    assert exhaustive_solutions(g, 6, 0.0) == {((2, 4), (3, 3))}


def test_brute_force_equals_exhaustive(rng):
    for s in (2, 3, 5):
        for eps in (0.0, 0.05, 0.2):
            g = generators.random_normal_form(2, 3, rng)
            got = as_counts(brute_force_solve(induce_csp(g, fixed_plan(g, s, eps), eps)))
            assert got == exhaustive_solutions(g, s, eps)


def test_first_mode_and_budgets(mp):
    csp = induce_csp(mp, fixed_plan(mp, 40, 0.1), 0.1)
    every = solve_indices(csp, "all")
    assert solve_indices(csp, "first") == every[:1]
    with pytest.raises(BudgetExceeded) as info:
        brute_force_solve(csp, "all", budget=100)
    assert info.value.required == 41 * 41
    with pytest.raises(BudgetExceeded):
        brute_force_solve(csp, "first", budget=3)


def test_lazy_and_table_evaluation_agree(rng):
    g = generators.random_gmhg(3, 2, rng)
    csp = induce_csp(g, fixed_plan(g, 3, 0.1), 0.1)
    lazy = as_counts(brute_force_solve(csp, table_budget=0))
    assert lazy == as_counts(brute_force_solve(csp))


def test_constraint_locality(rng):
    g = path_polymatrix(rng, n=4)
    csp = induce_csp(g, fixed_plan(g, 3, 0.2), 0.2)
    c0 = csp.constraints[0]
    assert c0.scope == (0, 1)
    for a, b in itertools.product(range(4), repeat=2):
        values = {c0({0: a, 1: b, 2: x, 3: y}) for x in range(4) for y in range(4)}
        assert len(values) == 1


def test_arc_consistency_shrinks_and_agrees(mp):
    g = asymmetric_pennies()
    csp = induce_csp(g, fixed_plan(g, 2, 0.0), 0.0)
    filtered, trace = arc_consistency(csp)
    assert trace.sizes[0] == [3, 3]
    # player 1's (1/2, 1/2) is never a best response on this grid, and then
    # player 0 loses its mixed value too
    assert filtered.domain_sizes() == [2, 2] and not trace.empty
    assert brute_force_solve(filtered) == brute_force_solve(csp) == []
    for before, after in zip(trace.sizes, trace.sizes[1:]):
        assert all(a <= b for a, b in zip(after, before))
    # matching pennies: the uniform opponent supports every value
    _, trace = arc_consistency(induce_csp(mp, fixed_plan(mp, 2, 0.01), 0.01))
    assert trace.deleted == []


def test_arc_consistency_on_single_player_games():
    silent = make_game([3], [])
    csp = induce_csp(silent, fixed_plan(silent, 2, 0.0), 0.0)
    filtered, trace = arc_consistency(csp)
    assert trace.deleted == [] and filtered.domain_sizes() == [6]
    single = make_game([2], [(0, (0,), [2, 5])])
    filtered, trace = arc_consistency(induce_csp(single, fixed_plan(single, 4, 0.0), 0.0))
    assert [d.counts for d in filtered.domains[0]] == [(0, 4)]


def test_arc_consistency_is_a_fixpoint():
    rng = generators.rng_for(4)
    for _ in range(5):
        g = triangle_polymatrix(rng)
        filtered, _ = arc_consistency(induce_csp(g, fixed_plan(g, 4, 0.1), 0.1))
        again, trace = arc_consistency(filtered)
        assert trace.deleted == [] and again.domain_sizes() == filtered.domain_sizes()


def test_propagate_and_search_matches_brute(rng):
    g = triangle_polymatrix(rng)
    csp = induce_csp(g, fixed_plan(g, 4, 0.15), 0.15)
    sols, trace = propagate_and_search(csp)
    assert as_counts(sols) == as_counts(brute_force_solve(csp))
    assert trace.to_dict()["rounds"] == trace.rounds


def test_tree_solve_on_a_path(rng):
    g = path_polymatrix(rng)
    plan = plan_gmhg(g, None, 0.25)
    csp = induce_csp(g, fixed_plan(g, 6, 0.25), 0.25)
    (sol,) = tree_solve(csp, "first")
    assert strategy.is_epsilon_ne(g, [x.probs for x in sol], 0.25)
    indices = tuple(csp.domains[j].index(x) for j, x in enumerate(sol))
    assert all(c({j: indices[j] for j in c.scope}) for c in csp.constraints)
    assert plan.grid  # guaranteed sizing is available for the same game


def test_tree_solve_two_players_matches_brute():
    rng = generators.rng_for(11)
    for s in range(1, 9):
        g = generators.random_normal_form(2, 2, rng)
        csp = induce_csp(g, fixed_plan(g, s, 0.1), 0.1)
        compact = tree_solve(csp, "all-compact")
        assert set(compact.solutions()) == set(solve_indices(csp, "all"))
        assert compact.solvable == bool(solve_indices(csp, "all"))


def test_tree_solve_refuses_a_triangle(rng):
    csp = induce_csp(triangle_polymatrix(rng), fixed_plan(triangle_polymatrix(rng), 2, 0.1), 0.1)
    with pytest.raises(NotATree) as info:
        tree_solve(csp)
    assert len(info.value.cycle) == 3


def test_tree_solve_on_a_forest(rng):
    # two disconnected pairs plus an isolated player
    g = generators.polymatrix_on(5, 2, [(0, 1), (2, 3)], rng)
    csp = induce_csp(g, fixed_plan(g, 4, 0.1), 0.1)
    assert set(tree_solve(csp, "all-compact").solutions()) == set(solve_indices(csp, "all"))


def test_tree_solve_table_budget(rng):
    g = path_polymatrix(rng)
    with pytest.raises(BudgetExceeded):
        tree_solve(induce_csp(g, fixed_plan(g, 10, 0.1), 0.1), budget=100)


def test_primal_graph_examples(rng):
    path = primal_graph_stats(path_polymatrix(rng))
    assert (path.edges, path.width_bound, path.is_forest) == (2, 1, True)
    k4 = primal_graph_stats(make_normal_form(4, [2] * 4, [np.zeros(16)] * 4))
    assert (k4.edges, k4.width_bound) == (6, 3)
    star = primal_graph_stats(star_polymatrix(5))
    assert (star.width_bound, star.max_degree, star.nodes) == (1, 5, 6)
    # scopes of the star's graphical form span all players
    gg = make_game([2] * 4, [(0, (0, 1, 2, 3), np.zeros(16))] + [(j, (0, j), np.zeros(4)) for j in (1, 2, 3)])
    stats = primal_graph_stats(gg)
    assert stats.width_bound == 1 and stats.constraint_width_bound == 3


def test_sized_grid_contains_an_equilibrium():
    rng = generators.rng_for(8)
    for _ in range(10):
        g = generators.random_normal_form(2, 2, rng)
        plan = plan_gmhg(g, None, 0.25)
        csp = induce_csp(g, plan, 0.25)
        found = as_counts(brute_force_solve(csp, budget=10**7))
        rounded = tuple(x.counts for x in round_to_grid(analytic_2x2(g).profile, plan))
        assert rounded in found


def test_every_solution_is_an_epsilon_equilibrium():
    rng = generators.rng_for(21)
    for _ in range(5):
        g = generators.random_gmhg(3, 2, rng)
        csp = induce_csp(g, fixed_plan(g, 4, 0.2), 0.2)
        for prof in brute_force_solve(csp):
            assert strategy.is_epsilon_ne(g, [x.probs for x in prof], 0.2)
