import json
import random

import pytest
from hypothesis import given, settings

from conftest import connected_graphs, graphs, vertex_separation
from homlab.decomp import (ConstructionTree, DecompositionError, ForestCover, RootedDecomposition, convert,
                           cover_from_json, cover_to_decomposition, cover_to_json, decomposition_from_json,
                           decomposition_to_construction, decomposition_to_cover, decomposition_to_dot,
                           decomposition_to_json, eval_hom_via_construction, exceptions_persist, is_nice, make_nice,
                           measured_width, node_type, verify_construction_tree, verify_decomposition,
                           verify_forest_cover)
from homlab.exhaustive import find_forest_cover, find_linear_cover, find_path_decomposition, find_tree_decomposition
from homlab.graphs import Graph, LabeledGraph, complete, cycle, enumerate_graphs, path, star
from homlab.homcount import hom_count
from homlab.pursuit import solve_cr, solve_ns


def chain(bags):
    return RootedDecomposition([i - 1 for i in range(len(bags))], bags, "path")


# ---------------------------------------------------------------- verifiers

def test_decomposition_verifier_examples():
    chk = verify_decomposition(RootedDecomposition([-1], [{0, 1, 2}]), complete(3), 3, 0)
    assert chk.ok and chk.depth == 3
    assert verify_decomposition(chain([{0, 1}, {1, 2}]), path(3), 2, 0).ok
    bad = verify_decomposition(chain([{0, 1}, {1, 2}]), cycle(3), 2, 0)
    assert not bad.ok and "edge (0, 2)" in bad.reason


def test_decomposition_verifier_diagnostics():
    assert "no bag" in verify_decomposition(chain([{0}]), Graph(2), 1, 0).reason
    assert "not connected" in verify_decomposition(chain([{0, 1}, {1, 2}, {0}]), path(3), 2, 0).reason
    d = RootedDecomposition([-1, 0], [{0, 1}, {1, 2}], "tree", {1: {1}})
    assert verify_decomposition(d, path(3), 1, 1).ok
    assert "exceptions" in verify_decomposition(d, path(3), 1, 0).reason
    assert "depth" in verify_decomposition(d, path(3), 2, 1, q=2).reason
    assert "children" in verify_decomposition(RootedDecomposition([-1, 0, 0], [{0}, {1}, {2}], "path"),
                                              Graph(3), 1, 0).reason


def test_forest_cover_verifier_examples():
    p3 = path(3)
    assert verify_forest_cover(ForestCover([-1, 0, 1], ["x1", "x2", "x1"], 2, 0, "linear"), p3).ok
    adjacent_repeat = verify_forest_cover(ForestCover([-1, 0, 1], ["x1", "x1", "x2"], 2, 0, "linear"), p3)
    assert not adjacent_repeat.ok and "repeats" in adjacent_repeat.reason
    y_twice = verify_forest_cover(ForestCover([-1, 0, 1], ["y1", "x1", "y1"], 1, 1, "linear"), Graph(3))
    assert not y_twice.ok and "non-reusable" in y_twice.reason


def k2_construction():
    full = LabeledGraph(complete(2), {"x1": 0, "x2": 1})
    mid = LabeledGraph(complete(2), {"x1": 0})
    top = LabeledGraph(complete(2))
    return ConstructionTree([-1, 0, 1], ["elim", "elim", "leaf"], [top, mid, full], {0: "x1", 1: "x2"}, True)


def test_construction_verifier_examples():
    leaf = LabeledGraph(complete(2), {"x1": 0, "x2": 1})
    chk = verify_construction_tree(ConstructionTree([-1], ["leaf"], [leaf]), leaf, 2, 0)
    assert chk.ok and chk.depth == 0
    ct = k2_construction()
    chk = verify_construction_tree(ct, LabeledGraph(complete(2)), 2, 0)
    assert chk.ok and chk.depth == 2
    a = LabeledGraph(Graph(1), {"x1": 0})
    wrong = ConstructionTree([-1, 0, 0], ["product", "leaf", "leaf"], [LabeledGraph(complete(2), {"x1": 0}), a, a])
    bad = verify_construction_tree(wrong, wrong.target(), 1, 0)
    assert not bad.ok and "product" in bad.reason


def test_eval_via_construction_examples():
    assert eval_hom_via_construction(k2_construction(), cycle(4)) == 8 == hom_count(complete(2), cycle(4))
    leaf = LabeledGraph(Graph(1), {"x1": 0})
    ct = ConstructionTree([-1, 0], ["elim", "leaf"], [LabeledGraph(Graph(1)), leaf], {0: "x1"})
    for g in enumerate_graphs(4):
        assert eval_hom_via_construction(ct, g) == g.n


# ---------------------------------------------------------------- nice form

def test_make_nice_keeps_a_nice_input():
    d = chain([set(), {0}, {0, 1}, {1}, {1, 2}])
    nice = make_nice(d, path(3), 2, 0)
    assert is_nice(nice)
    assert measured_width(nice) == measured_width(d)
    assert nice.depth() == d.depth()


def test_make_nice_expands_a_bag_change():
    g = Graph(4, [(0, 1), (1, 2), (0, 2), (2, 3)])
    d = chain([{0, 1, 2}, {2, 3}])
    nice = make_nice(d, g, 3, 0)
    assert is_nice(nice) and verify_decomposition(nice, g, 3, 0).ok
    order = nice.preorder()
    bag_seq = [nice.bags[t] for t in order]
    # 0 and 1 are forgotten one at a time before 3 is introduced
    i = bag_seq.index(frozenset({0, 1, 2}))
    assert bag_seq[i:i + 4] == [{0, 1, 2}, {1, 2}, {2}, {2, 3}]
    # types are read bottom-up, so the node above the {2} bag introduces a vertex
    assert node_type(nice, order[i + 1]) == "introduce" and node_type(nice, order[i + 3]) != "join"


def elimination_decomposition(g, order):
    """Tree decomposition from an elimination ordering, rooted at the last bag."""
    adj = {v: set(g.neighbors(v)) for v in range(g.n)}
    bags, owner = [], {}
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        later = {u for u in adj[v] if pos[u] > pos[v]}
        for a in later:
            adj[a] |= later - {a}
        owner[v] = len(bags)
        bags.append({v} | later)
    parent = []
    for i, v in enumerate(order):
        later = bags[i] - {v}
        parent.append(owner[min(later, key=pos.get)] if later else -1)
    roots = [i for i, p in enumerate(parent) if p == -1]
    for r in roots[1:]:
        parent[r] = roots[0]
    return RootedDecomposition(parent, bags, "tree", {})


def test_make_nice_preserves_width_and_depth_on_random_decompositions():
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(1, 6)
        g = Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.45])
        order = list(range(n))
        rng.shuffle(order)
        d = elimination_decomposition(g, order)
        k1, k2 = measured_width(d)
        assert verify_decomposition(d, g, k1, k2).ok
        nice = make_nice(d, g, k1, k2)
        chk = verify_decomposition(nice, g, k1, k2, d.depth())
        assert chk.ok, chk.reason
        assert is_nice(nice) and exceptions_persist(nice)


def test_make_nice_rejects_an_invalid_input():
    with pytest.raises(DecompositionError):
        make_nice(chain([{0, 1}, {1, 2}]), cycle(3), 2, 0)


# ---------------------------------------------------------------- conversions

def test_p3_path_decomposition_to_cover_and_back():
    d = chain([set(), {0}, {0, 1}, {1}, {1, 2}])
    fc = decomposition_to_cover(d, path(3), 2, 0)
    assert fc.variant == "linear" and list(fc.pebbles) == ["x1", "x2", "x1"]
    back = cover_to_decomposition(fc, path(3))
    assert verify_decomposition(back, path(3), 2, 0).ok


def test_k3_single_bag_to_construction():
    d = RootedDecomposition([-1], [{0, 1, 2}], "tree", {0: set()})
    ct = decomposition_to_construction(d, complete(3), 3, 0)
    chk = verify_construction_tree(ct, LabeledGraph(complete(3)), 3, 0)
    assert chk.ok and chk.depth == 3
    leaves = [t for t in range(len(ct)) if not ct.children(t)]
    assert [ct.payloads[t].is_fully_labeled() and ct.payloads[t].n for t in leaves].count(3) == 1


def test_single_vertex_cover_gives_one_bag():
    d = cover_to_decomposition(ForestCover([-1], ["x1"], 1, 0, "linear"), Graph(1))
    assert verify_decomposition(d, Graph(1), 1, 0).ok
    assert [b for b in d.bags if b] == [frozenset({0})]


def solved_decompositions(max_n):
    for g in enumerate_graphs(max_n):
        for k1, k2 in [(1, 0), (2, 0), (1, 1), (3, 0), (2, 1), (0, 2)]:
            out = solve_ns(g, k1, k2)
            if out.pursuers_win:
                yield g, out.decomposition, k1, k2, None
        for k1, k2, q in [(1, 1, 2), (2, 0, 3), (2, 1, 3), (1, 2, 4)]:
            out = solve_cr(g, k1, k2, q)
            if out.pursuers_win:
                yield g, out.decomposition, k1, k2, q


def test_cover_round_trip_on_solver_output():
    count = 0
    for g, d, k1, k2, q in solved_decompositions(6):
        fc = convert(d, "cover", g, k1, k2)
        assert verify_forest_cover(fc, g, q).ok
        back = convert(fc, "decomposition", g)
        chk = verify_decomposition(back, g, k1, k2, q)
        assert chk.ok, (g, d, chk.reason)
        count += 1
    assert count > 500


def caterpillar_ok(ct):
    leaves = [t for t in range(len(ct)) if not ct.children(t)]
    deepest = max(leaves, key=lambda t: len(_path_to_root(ct, t)))
    spine = set(_path_to_root(ct, deepest))
    return all(t in spine or ct.parent[t] in spine for t in leaves)


def _path_to_root(ct, t):
    out = []
    while t != -1:
        out.append(t)
        t = ct.parent[t]
    return out


def test_constructions_verify_and_evaluate():
    targets = enumerate_graphs(4)
    for f in enumerate_graphs(5):
        for k1 in range(1, 6):
            d = find_path_decomposition(f, k1, 0)
            if d is not None:
                break
        ct = decomposition_to_construction(d, f, k1, 0)
        assert ct.caterpillar and caterpillar_ok(ct)
        assert verify_construction_tree(ct, LabeledGraph(f), k1, 0).ok
        for g in targets:
            assert eval_hom_via_construction(ct, g) == hom_count(f, g)


@given(connected_graphs(max_n=5))
@settings(max_examples=40, deadline=None)
def test_construction_back_to_decomposition(g):
    d = find_tree_decomposition(g, 2, 1, g.n)
    if d is None:
        return
    ct = convert(d, "construction", g, 2, 1)
    back = convert(ct, "decomposition", g, 2, 1)
    assert verify_decomposition(back, g, 2, 1).ok


# ---------------------------------------------------------------- exhaustive oracles

def test_path_decompositions_match_vertex_separation():
    for g in enumerate_graphs(6):
        pw = vertex_separation(g)
        for k in range(1, 5):
            assert (find_path_decomposition(g, k, 0) is not None) == (pw <= k - 1)


@given(graphs(max_n=6))
@settings(max_examples=40, deadline=None)
def test_found_objects_verify(g):
    for k1, k2 in [(1, 1), (2, 0), (2, 1)]:
        d = find_path_decomposition(g, k1, k2)
        if d is not None:
            assert verify_decomposition(d, g, k1, k2).ok
        fc = find_linear_cover(g, k1, k2)
        if fc is not None:
            assert verify_forest_cover(fc, g).ok
        td = find_tree_decomposition(g, k1, k2, 3)
        if td is not None:
            assert verify_decomposition(td, g, k1, k2, 3).ok
        tc = find_forest_cover(g, k1, k2, 3)
        if tc is not None:
            assert verify_forest_cover(tc, g, 3).ok


def test_star_has_small_depth():
    s = star(4)
    assert find_tree_decomposition(s, 2, 0, 2) is not None
    assert find_tree_decomposition(s, 1, 0, 5) is None


# ---------------------------------------------------------------- io

def test_json_round_trips():
    d = RootedDecomposition([-1, 0], [{0, 1}, {1, 2}], "tree", {1: {1}})
    text = json.dumps(decomposition_to_json(d), sort_keys=True)
    back = decomposition_from_json(json.loads(text))
    assert json.dumps(decomposition_to_json(back), sort_keys=True) == text
    fc = ForestCover([-1, 0, 1], ["x1", "x2", "x1"], 2, 0, "linear")
    assert cover_to_json(cover_from_json(cover_to_json(fc))) == cover_to_json(fc)


def test_decomposition_dot():
    dot = decomposition_to_dot(RootedDecomposition([-1, 0], [{0, 1}, {1, 2}], "tree", {1: {1}}))
    assert dot.startswith("graph T {") and "t0 -- t1;" in dot and "S=1" in dot
