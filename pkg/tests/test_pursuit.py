import pytest
from hypothesis import given, settings

from conftest import connected_graphs, graphs, vertex_separation
from homlab.decomp import verify_decomposition
from homlab.graphs import Graph, complete, cycle, disjoint_union, enumerate_graphs, path
from homlab.pursuit import (CrStrategy, IllegalStrategy, NsStrategy, is_monotone, membership, ns_strategy_from_json,
                            ns_strategy_wins, solve_cr, solve_cr_full, solve_ns, solve_ns_direct)


def test_node_searching_goldens():
    assert solve_ns(path(5), 2, 0).label == "searchers-win"
    assert solve_ns(cycle(4), 2, 0).label == "fugitive-wins"
    assert solve_ns(cycle(4), 3, 0).pursuers_win
    assert solve_ns(cycle(4), 2, 1).pursuers_win
    out = solve_ns(Graph(1), 1, 0)
    assert out.pursuers_win and len(out.strategy.positions) == 1


def test_direct_search_goldens():
    assert solve_ns_direct(complete(2), 0, 2).pursuers_win
    assert solve_ns_direct(complete(3), 0, 2).label == "fugitive-wins"
    assert solve_ns(complete(3), 0, 2).label == "fugitive-wins"


def test_direct_search_agrees_on_small_connected_graphs():
    for g in enumerate_graphs(5, connected=True):
        for k1, k2 in [(1, 0), (2, 0), (1, 1), (0, 2), (2, 1)]:
            direct = solve_ns_direct(g, k1, k2)
            assert not direct.inconclusive
            assert direct.pursuers_win == solve_ns(g, k1, k2).pursuers_win


def test_direct_search_reports_an_exhausted_budget():
    assert solve_ns_direct(cycle(5), 3, 0, max_moves=1).inconclusive


def test_cops_and_robber_goldens():
    assert solve_cr(path(3), 2, 0, 2).label == "cops-win"
    out = solve_cr(path(3), 1, 1, 2)
    assert out.pursuers_win
    assert verify_decomposition(out.decomposition, path(3), 1, 1, 2).ok
    for q in range(1, 6):
        assert solve_cr(complete(3), 2, 0, q).label == "robber-wins"
        assert not solve_cr(complete(2), 1, 0, q).pursuers_win


def test_cr_restrictions_lose_nothing():
    # placement inside the robber region and monotone extraction against the unrestricted game
    for g in enumerate_graphs(4):
        for k1, k2 in [(1, 0), (2, 0), (1, 1), (0, 2), (2, 1)]:
            for q in range(1, 5):
                assert solve_cr(g, k1, k2, q).pursuers_win == solve_cr_full(g, k1, k2, q)


def test_monotonicity_checker():
    assert is_monotone(NsStrategy(1, 0, [{"x1": 0}]), Graph(1))
    # lifting the cop that separates the two ends of P3 recontaminates the middle
    bad = NsStrategy(1, 0, [{"x1": 1}, {"x1": 0}])
    assert not is_monotone(bad, path(3))
    with pytest.raises(IllegalStrategy):
        is_monotone(NsStrategy(1, 1, [{"y1": 0}, {"y1": 1}]), path(3))


@given(graphs(max_n=6))
@settings(max_examples=60, deadline=None)
def test_emitted_strategies_are_monotone_and_win(g):
    for k1, k2 in [(1, 0), (2, 0), (1, 1), (2, 1), (0, 2)]:
        out = solve_ns(g, k1, k2)
        if out.pursuers_win:
            assert is_monotone(out.strategy, g)
            assert ns_strategy_wins(out.strategy, g)
            assert verify_decomposition(out.decomposition, g, k1, k2).ok
            again = ns_strategy_from_json(out.strategy.to_json())
            assert again.positions == out.strategy.positions


@given(connected_graphs(max_n=5))
@settings(max_examples=40, deadline=None)
def test_cr_strategies(g):
    for k1, k2, q in [(1, 1, 3), (2, 0, 3), (2, 1, 4)]:
        out = solve_cr(g, k1, k2, q)
        if out.pursuers_win:
            assert isinstance(out.strategy, CrStrategy)
            assert is_monotone(out.strategy, g)
            assert verify_decomposition(out.decomposition, g, k1, k2, q).ok


def test_membership_goldens():
    c4 = cycle(4)
    assert membership(c4, "P", 3, 0) and not membership(c4, "P", 2, 0)
    two = disjoint_union(c4, c4)
    assert not membership(two, "P", 2, 1)
    assert membership(two, "UP", 2, 1)
    assert membership(Graph(1), "T", 1, 0, 1)
    with pytest.raises(ValueError):
        membership(c4, "Q", 1, 0)


def test_no_reuse_matches_pathwidth():
    for g in enumerate_graphs(6):
        pw = vertex_separation(g)
        for k in range(1, 5):
            assert membership(g, "P", k, 0) == (pw <= k - 1)


def test_tree_class_is_monotone_in_resources():
    for g in enumerate_graphs(5):
        for k in range(1, 4):
            wins = [solve_cr(g, k, 0, q).pursuers_win for q in range(1, 6)]
            # more rounds never hurt
            assert wins == sorted(wins)
            for q in range(1, 6):
                if wins[q - 1]:
                    assert solve_cr(g, k + 1, 0, q).pursuers_win


def test_rejects_empty_pursuer_sets():
    with pytest.raises(ValueError):
        solve_ns(path(3), 0, 0)
    with pytest.raises(ValueError):
        solve_cr(path(3), 1, 0, 0)
