"""Sparse uniform discretization and grid solvers for approximate Nash
equilibria in graphical multi-hypermatrix games."""

__version__ = "0.1.0"

from .game_model import (
    BudgetExceeded,
    GameError,
    GMhG,
    Hyperedge,
    Player,
    global_payoff_bounds,
    make_game,
    make_normal_form,
    make_polymatrix,
    payoff_ranges,
    representation_size,
    to_hypergraphical,
    validate,
)
from .strategy import (
    conditional_payoff,
    expected_payoff,
    is_epsilon_ne,
    product_difference_expansion,
    regret,
)
from .discretization import (
    DiscretizationPlan,
    LatticeStrategy,
    enumerate_lattice,
    fixed_plan,
    plan_gg,
    plan_gmhg,
    round_to_grid,
)
from .csp import (
    GameCSP,
    NotATree,
    arc_consistency,
    brute_force_solve,
    induce_csp,
    primal_graph_stats,
    tree_solve,
)
from .oracle import OracleResult, analytic_2x2, finegrid_refine, support_enum, support_enum_bimatrix
