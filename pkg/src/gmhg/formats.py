"""JSON file formats: games (``gmhg-v1``) and strategies (``strategy-v1``)."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .discretization import LatticeStrategy
from .game_model import GMhG, Hyperedge, Player

GAME_FORMAT = "gmhg-v1"
STRATEGY_FORMAT = "strategy-v1"


class ParseError(ValueError):
    pass


def _reject_constant(name):
    raise ParseError(f"non-finite number {name} is not allowed")


def _loads(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{where}: expected a number, got {x!r}")
    if not math.isfinite(x):
        raise ParseError(f"{where}: non-finite number")
    return float(x)


def _check_format(obj, expected: str):
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object")
    fmt = obj.get("format")
    if fmt != expected:
        raise ParseError(f"unsupported format {fmt!r}; expected {expected!r}")


def game_to_dict(game: GMhG) -> dict:
    return {
        "format": GAME_FORMAT,
        "players": [{"id": p.id, "actions": list(p.actions)} for p in game.players],
        "hyperedges": [
            {"owner": h.owner, "clique": list(h.clique), "payoffs": [float(v) for v in h.payoffs]}
            for h in game.hyperedges
        ],
    }


def game_from_dict(obj) -> GMhG:
    """Parse a ``gmhg-v1`` object. Structural checks beyond the wire format
    (ownership, cardinality) are left to :func:`gmhg.game_model.validate`."""
    _check_format(obj, GAME_FORMAT)
    players_raw = obj.get("players")
    edges_raw = obj.get("hyperedges")
    if not isinstance(players_raw, list) or not isinstance(edges_raw, list):
        raise ParseError("'players' and 'hyperedges' must be lists")
    players = []
    seen = set()
    for k, p in enumerate(players_raw):
        if not isinstance(p, dict) or not isinstance(p.get("id"), int) or isinstance(p.get("id"), bool):
            raise ParseError(f"players[{k}]: needs an integer 'id'")
        if p["id"] in seen:
            raise ParseError(f"duplicate player id {p['id']}")
        seen.add(p["id"])
        actions = p.get("actions")
        if not isinstance(actions, list) or not all(isinstance(a, str) for a in actions):
            raise ParseError(f"players[{k}]: 'actions' must be a list of strings")
        players.append(Player(p["id"], tuple(actions)))
    players.sort(key=lambda p: p.id)
    edges = []
    for k, h in enumerate(edges_raw):
        where = f"hyperedges[{k}]"
        if not isinstance(h, dict):
            raise ParseError(f"{where}: must be an object")
        owner, clique, payoffs = h.get("owner"), h.get("clique"), h.get("payoffs")
        if not isinstance(owner, int) or isinstance(owner, bool):
            raise ParseError(f"{where}: 'owner' must be an integer")
        if not isinstance(clique, list) or not all(isinstance(j, int) and not isinstance(j, bool) for j in clique):
            raise ParseError(f"{where}: 'clique' must be a list of integers")
        if not isinstance(payoffs, list):
            raise ParseError(f"{where}: 'payoffs' must be a list")
        values = np.array([_number(v, where) for v in payoffs], dtype=float)
        edges.append(Hyperedge(owner, tuple(clique), values))
    return GMhG(tuple(players), tuple(edges))


def dumps_game(game: GMhG) -> str:
    return json.dumps(game_to_dict(game), indent=2) + "\n"


def loads_game(text: str) -> GMhG:
    return game_from_dict(_loads(text))


def load_game(path) -> GMhG:
    return loads_game(Path(path).read_text())


def write_game(game: GMhG, path) -> None:
    Path(path).write_text(dumps_game(game))


def _probability(x, where: str) -> float:
    if isinstance(x, str):
        try:
            return float(Fraction(x))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"{where}: bad probability {x!r}") from exc
    return _number(x, where)


def strategy_to_dict(profile: Sequence) -> dict:
    """Grid strategies serialize as exact ``"z/s"`` strings, others as floats."""
    mixed = []
    for p in profile:
        if isinstance(p, LatticeStrategy):
            mixed.append(p.labels())
        else:
            mixed.append([float(v) for v in np.asarray(p, dtype=float)])
    return {"format": STRATEGY_FORMAT, "mixed": mixed}


def strategy_from_dict(obj) -> list[np.ndarray]:
    _check_format(obj, STRATEGY_FORMAT)
    mixed = obj.get("mixed")
    if not isinstance(mixed, list) or not all(isinstance(row, list) for row in mixed):
        raise ParseError("'mixed' must be a list of lists")
    return [np.array([_probability(v, f"mixed[{i}]") for v in row]) for i, row in enumerate(mixed)]


def dumps_strategy(profile: Sequence) -> str:
    return json.dumps(strategy_to_dict(profile)) + "\n"


def loads_strategy(text: str) -> list[np.ndarray]:
    return strategy_from_dict(_loads(text))


def load_strategy(path) -> list[np.ndarray]:
    return loads_strategy(Path(path).read_text())
