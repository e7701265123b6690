"""Mixed strategies, expected payoffs, regret and epsilon-Nash checks.

A joint mixed strategy is a sequence with one probability vector per player.
Expected payoffs are computed hyperedge by hyperedge, so the cost is the
representation size of the game and never the size of the full joint
action space.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .game_model import GMhG, Hyperedge

PROB_TOL = 1e-9
REGRET_TOL = 1e-9
# Hyperedges larger than this are summed with math.fsum.
COMPENSATED_THRESHOLD = 2**16

Profile = Sequence[np.ndarray]


def as_profile(game: GMhG, p, tol: float = PROB_TOL) -> tuple[np.ndarray, ...]:
    """Coerce ``p`` to a tuple of float arrays and check it is a valid joint
    mixed strategy for ``game``."""
    if len(p) != game.n:
        raise ValueError(f"profile has {len(p)} entries, game has {game.n} players")
    out = []
    for i, probs in enumerate(p):
        arr = np.asarray(probs, dtype=float).ravel()
        if arr.size != game.num_actions[i]:
            raise ValueError(f"player {i}: {arr.size} probabilities for {game.num_actions[i]} actions")
        if np.any(arr < -tol) or not np.all(np.isfinite(arr)):
            raise ValueError(f"player {i}: probabilities must be finite and non-negative")
        if abs(arr.sum() - 1.0) > tol:
            raise ValueError(f"player {i}: probabilities sum to {arr.sum()!r}")
        out.append(arr)
    return tuple(out)


def pure(game: GMhG, actions: Sequence[int]) -> tuple[np.ndarray, ...]:
    """Point-mass joint strategy on the joint action ``actions``."""
    out = []
    for i, a in enumerate(actions):
        v = np.zeros(game.num_actions[i])
        v[a] = 1.0
        out.append(v)
    return tuple(out)


def uniform(game: GMhG) -> tuple[np.ndarray, ...]:
    return tuple(np.full(m, 1.0 / m) for m in game.num_actions)


def _contract(game: GMhG, h: Hyperedge, p: Profile, keep: int | None = None):
    t = game.tensor(h)
    keep_axis = None if keep is None else h.clique.index(keep)
    if t.size > COMPENSATED_THRESHOLD:
        return _contract_fsum(t, h.clique, p, keep_axis)
    for axis in reversed(range(len(h.clique))):
        if axis == keep_axis:
            continue
        t = np.tensordot(t, p[h.clique[axis]], axes=([axis], [0]))
    return t


def _contract_fsum(t, clique, p, keep_axis):
    vectors = [p[j] for j in clique]
    if keep_axis is None:
        weights = vectors[0]
        for v in vectors[1:]:
            weights = np.multiply.outer(weights, v)
        return math.fsum((weights * t).ravel())
    others = [v for k, v in enumerate(vectors) if k != keep_axis]
    weights = np.ones(())
    for v in others:
        weights = np.multiply.outer(weights, v)
    moved = np.moveaxis(t, keep_axis, 0)
    return np.array([math.fsum((weights * moved[a]).ravel()) for a in range(moved.shape[0])])


def expected_payoff(game: GMhG, p: Profile, i: int) -> float:
    """M_i(p), summed over i's hyperedges only."""
    return float(sum(_contract(game, h, p) for h in game.owned(i)))


def payoff_vector(game: GMhG, p: Profile, i: int) -> np.ndarray:
    """Conditional payoffs M_i(a, p_{-i}) for every action a of player i."""
    u = np.zeros(game.num_actions[i])
    for h in game.owned(i):
        u = u + _contract(game, h, p, keep=i)
    return u


def conditional_payoff(game: GMhG, p: Profile, i: int, a: int) -> float:
    return float(payoff_vector(game, p, i)[a])


def best_response(game: GMhG, p: Profile, i: int) -> int:
    """A pure best response; ties go to the lowest action index."""
    return int(np.argmax(payoff_vector(game, p, i)))


def regret(game: GMhG, p: Profile, i: int) -> float:
    """Gain from i's best unilateral deviation, clamped at zero."""
    gap = float(payoff_vector(game, p, i).max()) - expected_payoff(game, p, i)
    return max(gap, 0.0)


def regrets(game: GMhG, p: Profile) -> list[float]:
    return [regret(game, p, i) for i in range(game.n)]


@dataclass(frozen=True)
class EpsilonCheck:
    ok: bool
    regrets: tuple[float, ...]

    def __bool__(self) -> bool:
        return self.ok

    @property
    def max_regret(self) -> float:
        return max(self.regrets, default=0.0)


def is_epsilon_ne(game: GMhG, p: Profile, eps: float) -> EpsilonCheck:
    if eps < 0:
        raise ValueError("eps must be non-negative")
    rs = tuple(regrets(game, p))
    return EpsilonCheck(all(r <= eps + REGRET_TOL for r in rs), rs)


def batch_payoff_vectors(game: GMhG, probs: Sequence[np.ndarray], i: int) -> np.ndarray:
    """Conditional payoff vectors of player i for a batch of profiles.

    ``probs[j]`` has shape (B, |A_j|); the result has shape (B, |A_i|).
    Used by the grid searches; the scalar functions above remain the
    reference evaluation.
    """
    batch = probs[0].shape[0]
    u = np.zeros((batch, game.num_actions[i]))
    for h in game.owned(i):
        letters = [chr(ord("a") + k) for k in range(len(h.clique))]
        operands = [game.tensor(h)]
        terms = ["".join(letters)]
        for k, j in enumerate(h.clique):
            if j == i:
                continue
            operands.append(probs[j])
            terms.append("Z" + letters[k])
        if len(operands) == 1:  # singleton clique: no dependence on others
            u += game.tensor(h)[None, :]
            continue
        out = "Z" + letters[h.clique.index(i)]
        u += np.einsum(",".join(terms) + "->" + out, *operands, optimize=True)
    return u


def batch_regrets(game: GMhG, probs: Sequence[np.ndarray]) -> np.ndarray:
    """Regrets of every player for a batch of profiles, shape (B, n)."""
    batch = probs[0].shape[0]
    out = np.empty((batch, game.n))
    for i in range(game.n):
        u = batch_payoff_vectors(game, probs, i)
        out[:, i] = u.max(axis=1) - np.einsum("Za,Za->Z", u, probs[i])
    return np.maximum(out, 0.0)


def deltas(p: Profile, q: Profile) -> list[np.ndarray]:
    """Per-player differences p_i - q_i."""
    return [np.asarray(a, dtype=float) - np.asarray(b, dtype=float) for a, b in zip(p, q)]


MAX_EXPANSION_PLAYERS = 20


def product_difference_expansion(p: Profile, q: Profile, players: Sequence[int], actions: Sequence[int]) -> float:
    """Right-hand side of the product-difference identity

        p(x_B) - q(x_B) = sum over nonempty S of B of Delta(x_S) q(x_{B-S}),

    where Delta(x_S) is the product of p_k(x_k) - q_k(x_k) over k in S.
    """
    if len(players) > MAX_EXPANSION_PLAYERS:
        raise ValueError(f"expansion over {len(players)} players needs 2^{len(players)} terms")
    d = [float(p[j][a]) - float(q[j][a]) for j, a in zip(players, actions)]
    qs = [float(q[j][a]) for j, a in zip(players, actions)]
    total = 0.0
    size = len(players)
    for mask in itertools.product((False, True), repeat=size):
        if not any(mask):
            continue
        term = 1.0
        for k in range(size):
            term *= d[k] if mask[k] else qs[k]
        total += term
    return total
