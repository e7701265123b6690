"""Reference equilibria for small games.

Every result carries a regret recomputed with :mod:`gmhg.strategy`, never a
value reported by the search itself.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import strategy
from .discretization import compositions, lattice_size
from .game_model import BudgetExceeded, GameError, GMhG

EXACT_TOL = 1e-9
DEFAULT_BUDGET = 2 * 10**5


@dataclass(frozen=True)
class OracleResult:
    profile: tuple[np.ndarray, ...]
    certified_regret: float
    method: str
    degenerate: bool = False
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "mixed": [[float(v) for v in p] for p in self.profile],
            "certified_regret": self.certified_regret,
            "degenerate": self.degenerate,
            **self.info,
        }


def certify(game: GMhG, profile, method: str, degenerate: bool = False, **info) -> OracleResult:
    profile = strategy.as_profile(game, profile)
    return OracleResult(profile, max(strategy.regrets(game, profile)), method, degenerate, info)


def _pure_payoffs(game: GMhG) -> tuple[np.ndarray, np.ndarray]:
    a = np.empty((2, 2))
    b = np.empty((2, 2))
    for x, y in itertools.product(range(2), repeat=2):
        p = strategy.pure(game, (x, y))
        a[x, y] = strategy.expected_payoff(game, p, 0)
        b[x, y] = strategy.expected_payoff(game, p, 1)
    return a, b


def analytic_2x2(game: GMhG) -> OracleResult:
    """Nash equilibrium of a two-player two-action game.

    Pure profiles are checked first; otherwise the indifference equations
    give the fully mixed equilibrium.
    """
    if game.n != 2 or game.num_actions != (2, 2):
        raise GameError("analytic_2x2 needs exactly 2 players with 2 actions each")
    a, b = _pure_payoffs(game)
    flat_a = np.allclose(a[0], a[1], atol=EXACT_TOL, rtol=0)
    flat_b = np.allclose(b[:, 0], b[:, 1], atol=EXACT_TOL, rtol=0)
    if flat_a or flat_b:
        # An indifferent player plays action 0; the other best-responds.
        if flat_a:
            x = 0
            y = int(np.argmax(b[x]))
        else:
            y = 0
            x = int(np.argmax(a[:, y]))
        return certify(game, strategy.pure(game, (x, y)), "analytic2x2", degenerate=True)
    for x, y in itertools.product(range(2), repeat=2):
        if a[x, y] >= a[1 - x, y] - EXACT_TOL and b[x, y] >= b[x, 1 - y] - EXACT_TOL:
            return certify(game, strategy.pure(game, (x, y)), "analytic2x2")
    # Player 0 plays action 0 with probability p making player 1 indifferent,
    # player 1 plays action 0 with probability q making player 0 indifferent.
    db = b[0, 0] - b[0, 1] - b[1, 0] + b[1, 1]
    da = a[0, 0] - a[0, 1] - a[1, 0] + a[1, 1]
    candidates = []
    if abs(da) > EXACT_TOL and abs(db) > EXACT_TOL:
        p = (b[1, 1] - b[1, 0]) / db
        q = (a[1, 1] - a[0, 1]) / da
        if 0 <= p <= 1 and 0 <= q <= 1:
            candidates.append(((p, 1 - p), (q, 1 - q)))
    # Ties can leave only partially mixed equilibria; try the remaining mixes.
    mixes = [(1.0, 0.0), (0.0, 1.0), (0.5, 0.5)]
    for p, q in itertools.product(mixes, mixes):
        candidates.append((p, q))
    for cand in candidates:
        result = certify(game, cand, "analytic2x2")
        if result.certified_regret <= EXACT_TOL:
            return result
    raise RuntimeError("no equilibrium found; payoffs are inconsistent")  # pragma: no cover


def _offsets(m: int, radius: int) -> np.ndarray:
    """Integer vectors with zero sum and entries in [-radius, radius]."""
    rows = [d for d in itertools.product(range(-radius, radius + 1), repeat=m - 1) if abs(sum(d)) <= radius]
    return np.array([list(d) + [-sum(d)] for d in rows], dtype=float).reshape(-1, m)


def _lattice_probs(s: int, m: int) -> np.ndarray:
    return np.array(list(compositions(s, m)), dtype=float).reshape(-1, m) / s


def _product_batch(per_player: Sequence[np.ndarray]) -> list[np.ndarray]:
    sizes = [len(x) for x in per_player]
    grids = np.indices(sizes).reshape(len(sizes), -1)
    return [x[g] for x, g in zip(per_player, grids)]


def _max_regret(game: GMhG, batch: list[np.ndarray]) -> np.ndarray:
    return strategy.batch_regrets(game, batch).max(axis=1)


def finegrid_refine(
    game: GMhG,
    start=None,
    levels: int = 40,
    beam: int = 8,
    radius: int = 2,
    coarse: int | None = None,
    budget: int = DEFAULT_BUDGET,
    tol: float = 1e-12,
) -> OracleResult:
    """Approximate equilibrium by shrinking grid neighborhoods.

    A coarse global lattice (affordable under ``budget``) seeds a beam of
    low max-regret profiles together with ``start``. Each level halves the
    step and searches the joint neighborhood of every beam member. The
    result is an eta-NE for the reported eta, not an exact equilibrium.
    """
    if start is None:
        start = strategy.uniform(game)
    start = strategy.as_profile(game, start)
    cands: list[tuple[np.ndarray, ...]] = [start]
    if coarse is None:
        coarse = 0
        for s in range(1, 33):
            if math.prod(lattice_size(s, m) for m in game.num_actions) > budget:
                break
            coarse = s
    if coarse:
        batch = _product_batch([_lattice_probs(coarse, m) for m in game.num_actions])
        scores = _max_regret(game, batch)
        for k in np.argsort(scores, kind="stable")[:beam]:
            cands.append(tuple(b[k] for b in batch))
    step = 1.0 / max(coarse, 1)
    offsets = [_offsets(m, radius) for m in game.num_actions]
    width = math.prod(len(o) for o in offsets)
    if width > budget:
        raise BudgetExceeded(f"neighborhood of {width} profiles exceeds budget {budget}", width)
    best = min(cands, key=lambda c: _max_regret(game, [x[None, :] for x in c])[0])
    best_score = _max_regret(game, [x[None, :] for x in best])[0]
    used = 0
    for level in range(levels):
        if best_score <= tol:
            break
        used = level + 1
        step /= 2
        pool: list[list[np.ndarray]] = [[] for _ in range(game.n)]
        for cand in cands:
            local = []
            for x, off in zip(cand, offsets):
                pts = x[None, :] + step * off
                pts = pts[np.all(pts >= -1e-15, axis=1)]
                local.append(np.clip(pts, 0.0, None))
            for j, block in enumerate(_product_batch(local)):
                pool[j].append(block)
        batch = [np.concatenate(blocks) for blocks in pool]
        scores = _max_regret(game, batch)
        order = np.argsort(scores, kind="stable")
        cands = []
        seen = set()
        for k in order:
            key = tuple(np.round(np.concatenate([b[k] for b in batch]), 15))
            if key in seen:
                continue
            seen.add(key)
            cands.append(tuple(b[k] for b in batch))
            if len(cands) == beam:
                break
        if scores[order[0]] < best_score:
            best_score = scores[order[0]]
            best = cands[0]
    return certify(game, best, "finegrid", levels=used)


def r_uniform_strategies(r: int, m: int) -> np.ndarray:
    """All mixed strategies with probabilities in {0, 1/r, ..., 1}."""
    return _lattice_probs(r, m)


def support_enum(game: GMhG, r: int, eps: float, budget: int = DEFAULT_BUDGET * 10, chunk: int = 1 << 15):
    """First joint r-uniform profile (in lattice order) with max regret <= eps.

    The search space has prod_i C(|A_i| + r - 1, r) profiles, which grows
    as (m r)^(r n); it is refused up front when above ``budget``.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    per_player = [r_uniform_strategies(r, m) for m in game.num_actions]
    sizes = [len(x) for x in per_player]
    total = math.prod(sizes)
    if total > budget:
        raise BudgetExceeded(f"{total} r-uniform profiles exceeds budget {budget}", total)
    for lo in range(0, total, chunk):
        flat = np.arange(lo, min(total, lo + chunk))
        idx = np.unravel_index(flat, sizes)
        batch = [x[g] for x, g in zip(per_player, idx)]
        scores = _max_regret(game, batch)
        for k in np.flatnonzero(scores <= eps + strategy.REGRET_TOL):
            result = certify(game, [b[k] for b in batch], "support-enum", r=r)
            if result.certified_regret <= eps + strategy.REGRET_TOL:
                return result
    return None


def support_enum_bimatrix(game: GMhG, r: int, eps: float, budget: int = DEFAULT_BUDGET * 10):
    if game.n != 2:
        raise GameError("support_enum_bimatrix needs a two-player game")
    return support_enum(game, r, eps, budget)
