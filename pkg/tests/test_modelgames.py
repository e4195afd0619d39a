from itertools import product

import networkx as nx
import pytest

from conftest import brute_hom, brute_iso
from homlab.cfi import cfi_even, cfi_odd
from homlab.graphs import Graph, RelStructure, complete, cycle, disjoint_union, enumerate_graphs, path
from homlab.logic import analyze, evaluate, parse
from homlab.modelgames import is_partial_hom, solve_all_in_one, solve_bijective_pebble, solve_exists_pebble

C6, TWO_C3 = cycle(6), disjoint_union(cycle(3), cycle(3))


def test_partial_homomorphisms():
    k3, k2 = complete(3), complete(2)
    assert is_partial_hom(k3, k2, [])
    assert is_partial_hom(k3, k2, [(0, 0), (1, 1)])
    assert not any(is_partial_hom(k3, k2, list(zip(range(3), img))) for img in product(range(2), repeat=3))
    assert not is_partial_hom(k3, k3, [(0, 1), (1, 1)], iso=True)


def test_existential_game_goldens():
    k2, k3 = complete(2), complete(3)
    for k1, k2_ in [(1, 0), (2, 0), (3, 0), (1, 2), (0, 3)]:
        assert solve_exists_pebble(k2, k3, k1, k2_).winner == "duplicator"
    assert solve_exists_pebble(k3, k2, 2, 0).winner == "duplicator"
    v = solve_exists_pebble(k3, k2, 3, 0)
    assert v.winner == "spoiler" and v.rounds == 3
    assert solve_exists_pebble(k3, k2, 0, 3).winner == "spoiler"
    assert solve_exists_pebble(cycle(5), cycle(5), 2, 1, 4).winner == "duplicator"


def test_existential_game_with_all_pebbles_decides_homomorphism():
    small = enumerate_graphs(3)
    for a in small:
        for b in small:
            v = solve_exists_pebble(a, b, a.n, 0, a.n)
            assert (v.winner == "duplicator") == (brute_hom(a, b) > 0)


def test_bijective_game_goldens():
    v = solve_bijective_pebble(path(3), path(4), 2, 0, 3)
    assert v.winner == "spoiler" and v.rounds == 0
    assert solve_bijective_pebble(C6, TWO_C3, 3, 0, 3).winner == "spoiler"
    for q in range(1, 5):
        assert solve_bijective_pebble(C6, TWO_C3, 2, 0, q).winner == "duplicator"
    g = Graph(5, [(0, 1), (1, 2), (2, 3), (1, 4)])
    h = Graph(5, [(4, 3), (3, 2), (2, 1), (3, 0)])
    assert solve_bijective_pebble(g, h, 2, 1, 3).winner == "duplicator"


def _nx(g):
    out = nx.Graph()
    out.add_nodes_from(range(g.n))
    out.add_edges_from(g.edges)
    return out


def test_two_pebble_bijective_game_matches_colour_refinement():
    gs = enumerate_graphs(5, n_min=5)
    hashes = {g: nx.weisfeiler_lehman_graph_hash(_nx(g), iterations=6) for g in gs}
    for i, a in enumerate(gs):
        for b in gs[i:i + 6]:
            v = solve_bijective_pebble(a, b, 2, 0, 2 * a.n)
            assert (v.winner == "duplicator") == (hashes[a] == hashes[b])


def test_full_pebble_bijective_game_decides_isomorphism():
    gs = enumerate_graphs(4, n_min=4)
    for a in gs:
        for b in gs:
            v = solve_bijective_pebble(a, b, 4, 0, 4)
            assert (v.winner == "duplicator") == brute_iso(a, b)


def test_all_in_one_goldens():
    assert solve_all_in_one(C6, C6, 2, 1, 4, bijective=True).winner == "duplicator"
    v = solve_all_in_one(complete(3), complete(2), 0, 3, 3)
    assert v.winner == "spoiler" and v.certificate["length"] == 3
    assert [z for z, _ in v.certificate["sequence"]] == ["y1", "y2", "y3"]


def test_all_in_one_cfi_pair_up_to_six():
    v = solve_all_in_one(cfi_even(cycle(4)).graph, cfi_odd(cycle(4)).graph, 2, 0, 6, bijective=True)
    assert v.winner == "duplicator" and v.to_json()["up_to"] == 6


@pytest.mark.parametrize("k1,k2", [(3, 0), (0, 3)])
def test_all_in_one_spoiler_sentence_distinguishes(k1, k2):
    v = solve_all_in_one(C6, TWO_C3, k1, k2, 3, bijective=True)
    assert v.winner == "spoiler"
    s = parse(v.certificate["sentence"])
    assert evaluate(s, C6) != evaluate(s, TWO_C3)
    rep = analyze(s, (k1, k2))
    assert rep.fragments["andC"]
    counts = v.certificate["counts"]
    assert counts["a"] != counts["b"]


def test_homomorphism_rules_out_spoiler_witnesses():
    small = enumerate_graphs(3)
    for a in small:
        for b in small:
            if brute_hom(a, b):
                assert solve_all_in_one(a, b, 2, 1, 3).winner == "duplicator"


def test_more_pebbles_never_help_duplicator():
    pairs = [(complete(3), complete(2)), (C6, TWO_C3), (cycle(5), complete(2)), (path(4), Graph(4, [(0, 1)]))]
    for a, b in pairs:
        for k1, k2 in [(1, 0), (2, 0), (1, 1), (0, 2)]:
            if solve_exists_pebble(a, b, k1, k2, 4).winner == "spoiler":
                assert solve_exists_pebble(a, b, k1 + 1, k2, 4).winner == "spoiler"
                assert solve_exists_pebble(a, b, k1, k2 + 1, 4).winner == "spoiler"


def test_structures_with_several_relations():
    a = RelStructure(2, {"E": (2, [(0, 1)]), "U": (1, [(0,)])})
    # U forces 0 -> 1, and b has no E-edge leaving 1
    b = RelStructure(2, {"E": (2, [(0, 1)]), "U": (1, [(1,)])})
    assert solve_exists_pebble(a, b, 2, 0).winner == "spoiler"
    assert solve_exists_pebble(a, a, 2, 0).winner == "duplicator"


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        solve_exists_pebble(path(2), path(2), 0, 0)
    with pytest.raises(ValueError):
        solve_all_in_one(path(2), path(2), 1, 0, 0)
