import json
import shlex

import pytest

from homlab.cli import main
from homlab.graphs import cycle, disjoint_union, to_graph6


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_graphs_listing(capsys):
    code, out, _ = run(capsys, "graphs", "--n-max", "3", "--connected", "--g6")
    assert code == 0 and out.split() == ["@", "A_", "BW", "Bw"]
    assert len(run_json(capsys, "graphs", "--n-max", "4", "--exact")["graphs"]) == 11


def test_hom_counts(capsys):
    assert run_json(capsys, "hom", "--pattern-name", "K2", "--name", "C5")["hom"] == 10
    obj = run_json(capsys, "hom", "--pattern-name", "C4", "--cfi", "C4")
    assert (obj["even"], obj["odd"]) == (64, 48)
    obj = run_json(capsys, "hom", "--pattern-name", "C4", "--name", "K3", "--via", "path")
    assert obj["hom"] == 18


def test_sub_counts(capsys):
    obj = run_json(capsys, "sub", "--pattern-name", "P3", "--name", "K4")
    assert obj["direct"] == 12 and obj["agree"]


def test_solvers(capsys):
    obj = run_json(capsys, "solve", "ns", "--name", "C4", "--k1", "2", "--k2", "1")
    assert obj["verdict"] == "searchers-win" and obj["strategy"]["positions"]
    assert run_json(capsys, "solve", "ns", "--name", "C4", "--k1", "2")["verdict"] == "fugitive-wins"
    assert run_json(capsys, "solve", "cr", "--name", "K3", "--k1", "2", "--q", "3")["verdict"] == "robber-wins"


def test_games(capsys):
    obj = run_json(capsys, "game", "exists", "--a-name", "K3", "--b-name", "K2", "--k1", "3")
    assert obj["winner"] == "spoiler" and obj["rounds"] == 3
    two = to_graph6(disjoint_union(cycle(3), cycle(3)))
    obj = run_json(capsys, "game", "abp", "--a-name", "C6", "--b-g6", two, "--k1", "3", "--n-max", "3")
    assert obj["winner"] == "spoiler"


def test_cfi_compare(capsys):
    obj = run_json(capsys, "cfi", "--name", "C3", "--twist", "1", "--compare", "-")
    assert obj["order"] == 6 and not obj["isomorphic"] and obj["consistent"]


def test_logic_verbs(capsys):
    assert run_json(capsys, "logic", "eval", "--formula", "(count>= 3 x1 true)", "--name", "K3")["value"]
    obj = run_json(capsys, "logic", "analyze", "--formula", "(exists x1 (exists x1 (E x1 x1)))", "--k1", "1")
    assert obj["requantified"] == ["x1"]
    obj = run_json(capsys, "logic", "compile", "--pattern-name", "K2", "--m", "10", "--eval-g6", to_graph6(cycle(5)))
    assert obj["value"] is True


def test_logic_syntax_error_exit_code(capsys):
    code, _, err = run(capsys, "logic", "eval", "--formula", "(E x1", "--name", "K2")
    assert code == 2 and "syntax" in err


def test_comonad_verbs(capsys):
    assert run_json(capsys, "comonad", "laws", "--kind", "P", "--k1", "1", "--k2", "1", "--bound", "2")["ok"]
    obj = run_json(capsys, "comonad", "search", "--a-name", "K3", "--b-name", "K2", "--k1", "3", "--q", "3")
    assert obj["exists"] is False


def test_suites(capsys):
    assert "power" in run_json(capsys, "suite", "--list")["suites"]
    code, _, err = run(capsys, "suite", "nope")
    assert code == 2 and "characterization-path" in err
    code, out, _ = run(capsys, "--budget", "3", "suite", "cfi-parity")
    assert code == 0 and json.loads(out)["passed"]


def test_malformed_inputs(capsys, tmp_path):
    code, _, err = run(capsys, "hom", "--pattern-g6", "A~", "--name", "K2")
    assert code == 2 and "graph6" in err
    bad = tmp_path / "g.json"
    bad.write_text('{"n": 2,\n "edges": [[0, 1]')
    code, _, err = run(capsys, "hom", "--pattern-name", "K2", "--json", str(bad))
    assert code == 2 and "g.json:2" in err


def test_graph_conversion(capsys):
    obj = run_json(capsys, "convert", "graph", "--name", "P3", "--to", "json")
    assert obj["n"] == 3 and len(obj["edges"]) == 2
    code, out, _ = run(capsys, "convert", "graph", "--name", "P3", "--to", "dot")
    assert code == 0 and out.lstrip().startswith("graph")


def test_decomposition_conversion(capsys, tmp_path):
    dec = run_json(capsys, "solve", "ns", "--name", "C4", "--k1", "3")["decomposition"]
    src = tmp_path / "d.json"
    src.write_text(json.dumps(dec))
    cover = run_json(capsys, "convert", "decomposition", "--input", str(src), "--name", "C4", "--k1", "3",
                     "--to", "cover")
    assert len(cover["parent"]) == 4


@pytest.mark.parametrize("rep", [
    "homlab hom --pattern-g6 'Bw' --g6 'Cl' --via tree",
    "homlab --seed 3 comonad laws --kind PR --k1 1 --k2 1 --bound 3",
    "homlab logic compile --tree --n 4 --pattern-g6 'Bw' --m 6 --eval-g6 'C~'",
])
def test_reproduce_commands_replay(capsys, rep):
    argv = shlex.split(rep)[1:]
    assert main(argv) == 0
    capsys.readouterr()
