import json
import subprocess
import sys

import numpy as np
import pytest

from gmhg import generators
from gmhg.cli import main
from gmhg.discretization import LatticeStrategy
from gmhg.formats import (
    ParseError,
    dumps_game,
    dumps_strategy,
    loads_game,
    loads_strategy,
    write_game,
)
from gmhg.game_model import make_game

from conftest import path_polymatrix, star_polymatrix, triangle_polymatrix


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def mp_file(tmp_path, mp):
    path = tmp_path / "mp.json"
    write_game(mp, path)
    return path


def strategy_file(tmp_path, mixed, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps({"format": "strategy-v1", "mixed": mixed}))
    return path


# file formats


def test_game_round_trip(rng):
    g = generators.random_gmhg(4, 3, rng)
    back = loads_game(dumps_game(g))
    assert back.players == g.players
    assert all(a.clique == b.clique and np.array_equal(a.payoffs, b.payoffs) for a, b in zip(g.hyperedges, back.hyperedges))


@pytest.mark.parametrize(
    "text, message",
    [
        ("{", "malformed"),
        ('{"format": "gmhg-v2", "players": [], "hyperedges": []}', "unsupported format"),
        ('{"format": "gmhg-v1", "players": [{"id": 0, "actions": ["a"]}, {"id": 0, "actions": ["b"]}], "hyperedges": []}', "duplicate"),
        ('{"format": "gmhg-v1", "players": [{"id": 0, "actions": ["a"]}], "hyperedges": [{"owner": 0, "clique": [0], "payoffs": [NaN]}]}', "non-finite"),
        ('{"format": "gmhg-v1", "players": [{"id": 0, "actions": ["a"]}], "hyperedges": [{"owner": 0, "clique": [0], "payoffs": [Infinity]}]}', "non-finite"),
        ('{"format": "gmhg-v1", "players": [{"id": 0, "actions": ["a"]}], "hyperedges": [{"owner": 0, "clique": [0], "payoffs": ["1"]}]}', "expected a number"),
    ],
)
def test_game_parse_errors(text, message):
    with pytest.raises(ParseError, match=message):
        loads_game(text)


def test_strategy_round_trip_is_exact_on_grid():
    text = dumps_strategy([LatticeStrategy((3, 37), 40), np.array([0.25, 0.75])])
    assert json.loads(text)["mixed"] == [["3/40", "37/40"], [0.25, 0.75]]
    back = loads_strategy(text)
    assert back[0][0] == 3 / 40 and back[1][1] == 0.75
    with pytest.raises(ParseError):
        loads_strategy('{"format": "strategy-v9", "mixed": []}')
    with pytest.raises(ParseError):
        loads_strategy('{"format": "strategy-v1", "mixed": [["x/2"]]}')


# cli


def test_validate(capsys, tmp_path, mp_file):
    assert run(capsys, "validate", mp_file)[0] == 0
    bad = tmp_path / "bad.json"
    write_game(make_game([2, 2], [(0, (1,), [0, 1])]), bad)
    code, out, err = run(capsys, "validate", bad)
    assert code == 1 and "owner not in clique" in err and json.loads(out)["valid"] is False
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert run(capsys, "validate", broken)[0] == 2


def test_info(capsys, tmp_path, mp_file):
    code, out, _ = run(capsys, "info", mp_file, "--eps", 0.1)
    info = json.loads(out)
    assert code == 0 and info["plan"]["grid"] == [40, 40] and info["graphical_plan"]["grid"] == [40, 40]
    assert info["game"]["representation_size"] == 8
    star = tmp_path / "star.json"
    write_game(star_polymatrix(3), star)
    info = json.loads(run(capsys, "info", star, "--eps", 0.5)[1])
    assert info["plan"]["grid"][1:] == [24, 24, 24] and info["graphical_plan"] is None
    assert info["primal_graph"]["width_bound"] == 1
    single = tmp_path / "single.json"
    write_game(make_game([2, 2], [(0, (0,), [0, 1]), (1, (1,), [1, 0])]), single)
    info = json.loads(run(capsys, "info", single, "--eps", 0.1)[1])
    assert info["plan"]["grid"] == [1, 1] and info["plan"]["degenerate"] is True


def test_check(capsys, tmp_path, mp_file):
    uniform = strategy_file(tmp_path, [[0.5, 0.5], [0.5, 0.5]])
    code, out, _ = run(capsys, "check", mp_file, uniform, "--eps", 0)
    assert code == 0 and json.loads(out)["pass"] is True
    pure = strategy_file(tmp_path, [[1, 0], [1, 0]], "pure.json")
    code, out, _ = run(capsys, "check", mp_file, pure, "--eps", 0.5)
    report = json.loads(out)
    assert code == 1 and report["regrets"][0] == 1.0 and report["pass"] is False
    with pytest.raises(SystemExit) as info:
        main(["check", str(mp_file), str(uniform), "--eps", "-0.1"])
    assert info.value.code == 2


def test_round(capsys, tmp_path, mp_file):
    src = strategy_file(tmp_path, [[0.37, 0.63], [0.5, 0.5]])
    code, out, err = run(capsys, "round", mp_file, src, "--eps", 0.1, "--grid", 10)
    assert code == 0 and json.loads(out)["mixed"] == [["2/5", "3/5"], ["1/2", "1/2"]]
    assert "0.03" in err
    dest = tmp_path / "grid.json"
    code, out, _ = run(capsys, "round", mp_file, src, "--eps", 0.1, "--out", dest)
    assert json.loads(out)["linf_distance"] <= 1 / 40
    assert json.loads(dest.read_text())["mixed"][1] == ["1/2", "1/2"]


def test_solve_matching_pennies(capsys, tmp_path, mp_file):
    code, out, _ = run(capsys, "solve", mp_file, "--eps", 0.1, "--all")
    report = json.loads(out)
    assert code == 0 and report["format"] == "solve-report-v1"
    assert {"grid", "tau", "eps_effective", "eps_max", "clamped"} <= set(report["plan"])
    assert ["1/2", "1/2"] in [s["mixed"][0] for s in report["solutions"]]
    assert report["num_solutions"] == len(report["solutions"]) >= 1
    # listed solutions pass the checker after a file round trip
    for k, sol in enumerate(report["solutions"][:5]):
        path = tmp_path / f"sol{k}.json"
        path.write_text(json.dumps(sol))
        assert run(capsys, "check", mp_file, path, "--eps", 0.1)[0] == 0


def test_solve_methods_agree(capsys, tmp_path, rng):
    path = tmp_path / "path.json"
    write_game(path_polymatrix(rng), path)
    counts = {}
    for method in ("brute", "tree", "nashprop-brute"):
        code, out, _ = run(capsys, "solve", path, "--eps", 0.25, "--grid", 4, "--method", method, "--all")
        report = json.loads(out)
        counts[method] = report["num_solutions"]
        assert code == 0
    assert len(set(counts.values())) == 1
    first = json.loads(run(capsys, "solve", path, "--eps", 0.25, "--grid", 4, "--method", "tree")[1])
    assert first["num_solutions"] == 1


def test_solve_refusals(capsys, tmp_path, rng, mp_file):
    tri = tmp_path / "tri.json"
    write_game(triangle_polymatrix(rng), tri)
    code, _, err = run(capsys, "solve", tri, "--eps", 0.1, "--grid", 2, "--method", "tree")
    assert code == 3 and "cycle" in err
    assert run(capsys, "solve", mp_file, "--eps", 0.1, "--all", "--budget", 10)[0] == 3


def test_solve_without_solution(capsys, tmp_path):
    g = make_game([2, 2], [(0, (0, 1), [0, 1, 1, 0]), (1, (0, 1), [1, 0, 0, 0.5])])
    path = tmp_path / "asym.json"
    write_game(g, path)
    code, out, _ = run(capsys, "solve", path, "--eps", 0, "--grid", 2, "--method", "nashprop-brute")
    assert code == 1 and json.loads(out)["num_solutions"] == 0


def test_oracle(capsys, mp_file):
    code, out, _ = run(capsys, "oracle", mp_file, "--method", "analytic2x2")
    assert code == 0 and json.loads(out)["mixed"] == [[0.5, 0.5], [0.5, 0.5]]
    assert run(capsys, "oracle", mp_file, "--method", "support-enum", "--r", 2, "--eps", 0.1)[0] == 0
    code, out, _ = run(capsys, "oracle", mp_file, "--method", "support-enum", "--r", 1, "--eps", 0.4)
    assert code == 1 and json.loads(out)["found"] is False
    assert run(capsys, "oracle", mp_file, "--method", "support-enum")[0] == 2
    code, out, _ = run(capsys, "oracle", mp_file, "--method", "finegrid")
    assert code == 0 and json.loads(out)["certified_regret"] <= 1e-9


def test_gen(capsys, tmp_path, mp):
    code, out, _ = run(capsys, "gen", "--kind", "mp")
    assert code == 0 and out == dumps_game(mp)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "gen", "--kind", "random-tree-poly", "--n", 6, "--seed", 7, "--out", a)
    run(capsys, "gen", "--kind", "random-tree-poly", "--n", 6, "--seed", 7, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    rps = loads_game(run(capsys, "gen", "--kind", "rps")[1])
    a0, a1 = (rps.tensor(h) for h in rps.hyperedges)
    assert np.allclose(a0 + a1, 1.0) and np.allclose(a0, a1.T)
    assert a0.min() == 0.0 and a0.max() == 1.0


def test_gen_flag_errors(capsys):
    assert run(capsys, "gen", "--kind", "random-nf")[0] == 2
    assert run(capsys, "gen", "--kind", "mp", "--n", 3)[0] == 2
    assert run(capsys, "gen", "--kind", "random-nf", "--k", 3, "--seed", 1)[0] == 2
    assert run(capsys, "gen", "--kind", "random-gg", "--n", 0, "--seed", 1)[0] == 2


def test_gen_random_kinds_are_valid(capsys):
    for kind in ("random-nf", "random-tree-poly", "random-gg"):
        code, out, _ = run(capsys, "gen", "--kind", kind, "--n", 4, "--seed", 3)
        game = loads_game(out)
        assert code == 0 and all(0 <= v <= 1 for h in game.hyperedges for v in h.payoffs)


def test_experiment(capsys):
    code, out, _ = run(capsys, "experiment-theorem1", "--trials", 20, "--eps", 0.05, "--seed", 1)
    table = json.loads(out)
    assert code == 0 and table["passes"] == 20
    code, out, _ = run(capsys, "experiment-theorem1", "--trials", 5, "--eps", 3.0, "--seed", 1)
    table = json.loads(out)
    assert code == 0 and all(t["clamped"] for t in table["trials"])
    code, out, _ = run(capsys, "experiment-theorem1", "--trials", 0)
    assert code == 0 and json.loads(out)["trials"] == []


def test_seeded_commands_are_deterministic(capsys):
    first = run(capsys, "experiment-theorem1", "--trials", 5, "--seed", 9)[1]
    second = run(capsys, "experiment-theorem1", "--trials", 5, "--seed", 9)[1]
    assert first == second


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", "--sizes", 2, 4, "--repeats", 1)
    rows = json.loads(out)["rows"]
    assert code == 0 and [r["profiles"] for r in rows] == [9, 25]


def test_module_entry_point(tmp_path, mp_file):
    proc = subprocess.run(
        [sys.executable, "-m", "gmhg.cli", "validate", str(mp_file)], capture_output=True, text=True
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["valid"] is True
