import random
from fractions import Fraction
from itertools import product as cart

import pytest
from hypothesis import given, settings

from conftest import brute_hom, brute_sub, graphs, labeled_graphs
from homlab.graphs import (Graph, LabeledGraph, are_isomorphic, complete, cycle, disjoint_union, enumerate_graphs,
                           path, product, relabel)
from homlab.harness import graphs_by_edges
from homlab.homcount import (LinComb, aut_count, hom_count, hom_lincomb, hom_profile, inj_count, interpolate,
                             interpolation_coefficients, lincomb_from_json, lincomb_to_json, power, spasm,
                             sub_coefficients, sub_count, sub_via_hom)


def test_basic_counts():
    for g in enumerate_graphs(4):
        assert hom_count(Graph(1), g) == g.n
        assert hom_count(complete(2), g) == 2 * g.m
    assert hom_count(cycle(4), complete(3)) == 18


def test_c4_into_k3_by_adjacency_trace():
    # closed walks of length 4 in K3: trace of A^4 with A = J - I
    a = [[int(i != j) for j in range(3)] for i in range(3)]
    m = a
    for _ in range(3):
        m = [[sum(m[i][k] * a[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
    assert sum(m[i][i] for i in range(3)) == 18 == brute_hom(cycle(4), complete(3))


def test_agrees_with_brute_force_on_all_small_pairs():
    small = enumerate_graphs(4)
    for f in small:
        for g in small:
            assert hom_count(f, g) == brute_hom(f, g)
            assert inj_count(f, g) == brute_hom(f, g, injective=True)


@given(labeled_graphs(max_n=4), labeled_graphs(max_n=4))
@settings(max_examples=150, deadline=None)
def test_labeled_counts_match_brute_force(f, g):
    if not f.label_set <= g.label_set:
        with pytest.raises(ValueError):
            hom_count(f, g)
        return
    assert hom_count(f, g) == brute_hom(f, g)


@given(labeled_graphs(max_n=3), labeled_graphs(max_n=3), labeled_graphs(labels=("x1", "x2", "y1", "y2"), min_n=2))
@settings(max_examples=120, deadline=None)
def test_multiplicativity(f1, f2, g):
    if not (f1.label_set | f2.label_set) <= g.label_set:
        return
    assert hom_count(product(f1, f2), g) == hom_count(f1, g) * hom_count(f2, g)


@given(labeled_graphs(max_n=4), labeled_graphs(max_n=4))
@settings(max_examples=120, deadline=None)
def test_label_sum_rule(f, g):
    for z in f.labels:
        rest = relabel(g, z, None)
        if not (f.label_set - {z}) <= rest.label_set:
            continue
        total = sum(hom_count(f, relabel(rest, z, v)) for v in range(g.n))
        assert hom_count(relabel(f, z, None), rest) == total


def fully_labeled_rule(f, g):
    # hom is 1 iff labels sharing a vertex agree in g and labeled edges map to edges
    names = list(f.labels)
    for a in names:
        for b in names:
            if f.labels[a] == f.labels[b] and g.labels[a] != g.labels[b]:
                return 0
            if f.graph.has_edge(f.labels[a], f.labels[b]) and not g.graph.has_edge(g.labels[a], g.labels[b]):
                return 0
    return 1


def test_fully_labeled_rule_exhaustive():
    labels = ["x1", "x2", "x3"]
    for f_graph in enumerate_graphs(3):
        for f_img in cart(range(f_graph.n), repeat=3):
            if len(set(f_img)) != f_graph.n:
                continue
            f = LabeledGraph(f_graph, dict(zip(labels, f_img)))
            for g_graph in enumerate_graphs(4):
                for g_img in cart(range(g_graph.n), repeat=3):
                    g = LabeledGraph(g_graph, dict(zip(labels, g_img)))
                    assert hom_count(f, g) == fully_labeled_rule(f, g)


def test_hom_profile():
    assert hom_profile([Graph(1)], cycle(7)) == [7]
    assert hom_profile([Graph(1), complete(2), complete(3)], cycle(5)) == [5, 10, 0]


@given(graphs(max_n=5))
def test_profiles_are_isomorphism_invariant(g):
    perm = list(range(g.n))[::-1]
    h = Graph(g.n, [(perm[u], perm[v]) for u, v in g.edges])
    fam = [Graph(1), complete(2), path(3), complete(3), cycle(4)]
    assert hom_profile(fam, g) == hom_profile(fam, h)


# ---------------------------------------------------------------- combinations

def test_linear_combination_basics():
    g = cycle(5)
    assert hom_lincomb(LinComb(), g) == 0
    assert hom_lincomb(LinComb([(1, Graph(1)), (1, Graph(1))]), g) == 10
    unit = LabeledGraph(Graph(0))
    assert hom_lincomb(LinComb([(-1, Graph(1)), (1, unit)]), Graph(1)) == 0


def test_lincomb_json_round_trip():
    lc = LinComb([(Fraction(1, 2), path(3)), (Fraction(-1, 2), complete(2))])
    back = lincomb_from_json(lincomb_to_json(lc))
    assert sorted((c, g.graph.m) for c, g in back.terms) == sorted((c, g.graph.m) for c, g in lc.terms)


def test_interpolation_goldens():
    f = LabeledGraph(complete(2), {"x1": 0})
    assert [(c, g) for c, g in interpolate(f, {0}, {1}).terms] == [(1, f)]
    lc = interpolate(f, {1}, {0})
    assert sorted(c for c, _ in lc.terms) == [-1, 1]
    assert any(c == 1 and g.n == 1 for c, g in lc.terms)
    # degree of the x1 vertex is the hom value of f
    p = interpolate(f, {0, 2}, {1})
    tests = [LabeledGraph(path(2), {"x1": 0}), LabeledGraph(Graph(2), {"x1": 0}), LabeledGraph(path(3), {"x1": 1})]
    assert [hom_count(f, g) for g in tests] == [1, 0, 2]
    assert [hom_lincomb(p, g) for g in tests] == [1, 0, 0]


@given(labeled_graphs(labels=("x1",), max_n=4))
@settings(max_examples=60, deadline=None)
def test_interpolation_is_an_indicator(g):
    if "x1" not in g.labels:
        return
    f = LabeledGraph(complete(2), {"x1": 0})
    values = list(range(4))
    for plus in ({0}, {1, 3}, {2}):
        lc = interpolate(f, set(values) - plus, plus)
        h = hom_count(f, g)
        assert hom_lincomb(lc, g) == (1 if h in plus else 0)


def test_interpolation_rejects_overlap():
    with pytest.raises(ValueError):
        interpolation_coefficients({1}, {1, 2})


def test_power_zero_is_the_labeled_vertices():
    f = LabeledGraph(path(3), {"x1": 0, "x2": 2})
    p0 = power(f, 0)
    assert p0.n == 2 and p0.graph.m == 0
    g = LabeledGraph(cycle(5), {"x1": 0, "x2": 2})
    assert hom_count(power(f, 3), g) == hom_count(f, g) ** 3


# ---------------------------------------------------------------- spasm and sub

def same_classes(got, want):
    return len(got) == len(want) and all(any(are_isomorphic(g, w)[0] for g in got) for w in want)


def test_spasm_goldens():
    assert same_classes(spasm(complete(3)), [complete(3)])
    assert same_classes(spasm(path(3)), [path(3), complete(2)])
    two_k2 = disjoint_union(complete(2), complete(2))
    assert same_classes(spasm(two_k2), [two_k2, path(3), complete(2)])


def coef_map(lc):
    return sorted((c, g.n, g.graph.m) for c, g in lc.terms)


def test_sub_coefficient_goldens():
    assert coef_map(sub_coefficients(complete(2))) == [(Fraction(1, 2), 2, 1)]
    assert coef_map(sub_coefficients(path(3))) == [(Fraction(-1, 2), 2, 1), (Fraction(1, 2), 3, 2)]
    assert coef_map(sub_coefficients(complete(3))) == [(Fraction(1, 6), 3, 3)]


def test_p3_coefficients_against_degree_identity():
    rng = random.Random(7)
    for _ in range(20):
        n = rng.randint(1, 7)
        g = Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5])
        want = sum(d * (d - 1) // 2 for d in g.degrees())
        assert sub_via_hom(path(3), g) == want == sub_count(path(3), g)


def test_aut_count():
    assert aut_count(complete(3)) == 6
    assert aut_count(cycle(4)) == 8
    assert aut_count(path(3)) == 2


def test_sub_via_hom_on_all_small_patterns():
    gs = enumerate_graphs(5)
    for f in graphs_by_edges(3):
        co = sub_coefficients(f)
        for g in gs:
            assert sub_via_hom(f, g, co) == brute_sub(f, g)


def test_graphs_by_edges_counts():
    # graphs without isolated vertices with exactly m edges: 1, 2, 5, 11
    counts = {}
    for g in graphs_by_edges(4):
        counts[g.m] = counts.get(g.m, 0) + 1
        assert all(g.degree(v) for v in range(g.n))
    assert counts == {1: 1, 2: 2, 3: 5, 4: 11}
