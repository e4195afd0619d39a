import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_iso, graphs, labeled_graphs
from homlab.graphs import (Graph, LabeledGraph, RelStructure, are_isomorphic, complete, cycle, disjoint_union, empty,
                           enumerate_graphs, find_isomorphism, from_json, gaifman, labeled_isomorphic, minor_step,
                           parse_graph6, path, product, relabel, relabel_seq, to_dot, to_graph6, to_json)


def lg(n, edges, labels):
    return LabeledGraph(Graph(n, edges), labels)


# ---------------------------------------------------------------- products and labels

def test_product_of_two_labeled_vertices():
    out = product(lg(1, [], {"x1": 0}), lg(1, [], {"x1": 0}))
    assert out.n == 1 and out.graph.m == 0 and out.labels == {"x1": 0}


def test_product_glues_edges_into_a_path():
    out = product(lg(2, [(0, 1)], {"x1": 0, "x2": 1}), lg(2, [(0, 1)], {"x2": 0, "x3": 1}))
    want = lg(3, [(0, 1), (1, 2)], {"x1": 0, "x2": 1, "x3": 2})
    assert labeled_isomorphic(out, want)


def test_empty_graph_is_a_unit():
    g = lg(3, [(0, 1)], {"x1": 2, "y1": 0})
    assert product(g, LabeledGraph(Graph(0))) == g
    assert product(LabeledGraph(Graph(0)), g) == g


@given(labeled_graphs(), labeled_graphs(), labeled_graphs())
@settings(max_examples=60, deadline=None)
def test_product_commutative_and_associative(a, b, c):
    assert labeled_isomorphic(product(a, b), product(b, a))
    assert labeled_isomorphic(product(product(a, b), c), product(a, product(b, c)))


def test_relabel_rules():
    g = lg(6, [], {"x1": 1})
    once = relabel(g, "x1", None)
    assert relabel(once, "x1", None) == once
    assert relabel(relabel(g, "x1", 3), "x1", 5).labels["x1"] == 5
    seq = relabel_seq(g, ["x1", "x2", "x1"], [2, 4, 0])
    assert seq == relabel(relabel(relabel(g, "x1", 2), "x2", 4), "x1", 0)
    with pytest.raises(ValueError):
        relabel(g, "x1", 9)


# ---------------------------------------------------------------- isomorphism

def test_isomorphism_examples():
    assert are_isomorphic(complete(3), complete(3))[0]
    assert not are_isomorphic(cycle(6), disjoint_union(cycle(3), cycle(3)))[0]
    assert not are_isomorphic(path(3), disjoint_union(complete(2), Graph(1)))[0]


def test_isomorphism_witness_is_edge_preserving():
    g, h = cycle(5), Graph(5, [(0, 2), (2, 4), (4, 1), (1, 3), (3, 0)])
    phi = find_isomorphism(g, h)
    assert sorted(phi) == list(range(5))
    assert all(h.has_edge(phi[u], phi[v]) for u, v in g.edges)


@given(graphs(max_n=6), graphs(max_n=6))
@settings(max_examples=150, deadline=None)
def test_isomorphism_matches_permutation_search(g, h):
    assert are_isomorphic(g, h)[0] == brute_iso(g, h)


@given(graphs(max_n=6), st.randoms(use_true_random=False))
@settings(max_examples=80, deadline=None)
def test_isomorphism_is_an_equivalence(g, rnd):
    perm = list(range(g.n))
    rnd.shuffle(perm)
    h = Graph(g.n, [(perm[u], perm[v]) for u, v in g.edges])
    perm2 = list(range(g.n))
    rnd.shuffle(perm2)
    k = Graph(g.n, [(perm2[u], perm2[v]) for u, v in h.edges])
    assert are_isomorphic(g, g)[0]
    assert are_isomorphic(g, h)[0] and are_isomorphic(h, g)[0]
    assert are_isomorphic(h, k)[0] and are_isomorphic(g, k)[0]


# ---------------------------------------------------------------- structures and minors

def test_gaifman_examples():
    assert gaifman(RelStructure(2, {"R": (2, [(0, 1)])})).edges == {(0, 1)}
    assert gaifman(RelStructure(3, {"T": (3, [(0, 1, 2)])})) == complete(3)
    assert gaifman(RelStructure(4, {})).m == 0


@given(graphs(max_n=6))
def test_gaifman_of_a_graph_structure_is_the_graph(g):
    assert gaifman(RelStructure.from_graph(g)) == g


def test_minor_steps():
    assert minor_step(complete(3), "contract-edge", (0, 1)) == complete(2)
    assert are_isomorphic(minor_step(cycle(4), "delete-vertex", 2), path(3))[0]
    assert are_isomorphic(minor_step(cycle(4), "contract-edge", (0, 1)), cycle(3))[0]
    assert minor_step(cycle(4), "delete-edge", (0, 1)).m == 3
    with pytest.raises(ValueError):
        minor_step(path(3), "contract-edge", (0, 2))


# ---------------------------------------------------------------- enumeration

def test_connected_census_up_to_three():
    got = enumerate_graphs(3, connected=True)
    assert len(got) == 4
    for want in (Graph(1), complete(2), path(3), complete(3)):
        assert sum(are_isomorphic(g, want)[0] for g in got) == 1


def atlas_counts(n_max, connected):
    counts = {}
    for g in nx.graph_atlas_g()[1:]:
        if g.number_of_nodes() > n_max:
            break
        if connected and not nx.is_connected(g):
            continue
        counts[g.number_of_nodes()] = counts.get(g.number_of_nodes(), 0) + 1
    return counts


@pytest.mark.parametrize("connected", [False, True])
def test_enumeration_counts_match_the_graph_atlas(connected):
    for n in range(1, 7):
        got = enumerate_graphs(n, connected=connected, n_min=n)
        assert len(got) == atlas_counts(6, connected)[n]
    assert len(enumerate_graphs(4, n_min=4)) == 11


def test_enumeration_is_pairwise_non_isomorphic_and_deterministic():
    gs = enumerate_graphs(5)
    for i, g in enumerate(gs):
        for h in gs[i + 1:]:
            if (g.n, g.m) == (h.n, h.m):
                assert not are_isomorphic(g, h)[0]
    assert [to_graph6(g) for g in gs] == [to_graph6(g) for g in enumerate_graphs(5)]


# ---------------------------------------------------------------- io

def test_graph6_known_string():
    g = parse_graph6("D?{")
    # D = 5 vertices; '?' and '{' give bits 000000 111100
    assert g.n == 5 and g.m == 4
    assert g.edges == {(0, 4), (1, 4), (2, 4), (3, 4)}
    assert to_graph6(g) == "D?{"


@given(graphs(min_n=0, max_n=9))
def test_graph6_round_trip(g):
    assert parse_graph6(to_graph6(g)) == g
    assert to_graph6(g) == nx.to_graph6_bytes(_nx(g), header=False).decode().strip()


def _nx(g):
    out = nx.Graph()
    out.add_nodes_from(range(g.n))
    out.add_edges_from(g.edges)
    return out


@pytest.mark.parametrize("bad", ["", "D?", "D?{{", "A~"])
def test_graph6_rejects_malformed_input(bad):
    with pytest.raises((ValueError, IndexError)):
        parse_graph6(bad)


@given(labeled_graphs())
def test_json_round_trip_is_byte_stable(g):
    import json
    text = json.dumps(to_json(g), sort_keys=True)
    assert from_json(json.loads(text)) == g
    assert json.dumps(to_json(from_json(json.loads(text))), sort_keys=True) == text


def test_dot_export_is_well_formed():
    dot = to_dot(lg(3, [(0, 1), (1, 2)], {"x1": 0}))
    assert dot.startswith("graph G {") and dot.rstrip().endswith("}")
    assert dot.count("--") == 2 and '0 [label="0:x1"]' in dot
    assert to_dot(empty(2)).count(";") == 2
