import json

import pytest

from conftest import brute_iso, vertex_separation
from homlab.graphs import Graph, are_isomorphic, complete, cycle, enumerate_graphs
from homlab.harness import (SUITES, FamilySpec, SuiteReport, UnknownSuite, enumerate_family, enumerate_forests,
                            run_suite, suite_instances)


def members(spec):
    return [g for g, _ in enumerate_family(spec)]


def contains(gs, g):
    return any(are_isomorphic(h, g)[0] for h in gs)


def test_family_spec_validation():
    for bad in [dict(cls="Q"), dict(cls="T", k1=1), dict(cls="P", k1=0, k2=0), dict(n_max=0), dict(n_max=9)]:
        with pytest.raises(ValueError):
            FamilySpec(**bad)
    assert FamilySpec().cls == "all"


def test_all_graphs_family():
    # 1 + 2 + 4 + 11 graphs of orders 1..4
    assert len(members(FamilySpec(n_max=4))) == 18
    assert [g.n for g in members(FamilySpec(n_max=3, connected=True))] == [1, 2, 3, 3]


def test_no_reuse_two_pebbles_is_pathwidth_one():
    got = members(FamilySpec("P", 2, 0, n_max=4))
    want = [g for g in enumerate_graphs(4) if vertex_separation(g) <= 1]
    assert len(got) == len(want)
    assert all(contains(got, g) for g in want)


def test_one_reusable_pebble_never_holds_an_edge():
    for q in range(1, 5):
        got = members(FamilySpec("T", 1, 0, q, n_max=4))
        assert all(g.m == 0 for g in got)
        assert contains(got, Graph(1)) and not contains(got, complete(2))


def test_square_membership():
    c4 = cycle(4)
    assert contains(members(FamilySpec("P", 3, 0, n_max=4)), c4)
    assert contains(members(FamilySpec("P", 2, 1, n_max=4)), c4)
    assert not contains(members(FamilySpec("P", 2, 0, n_max=4)), c4)


def test_certificates_are_kept():
    for g, dec in enumerate_family(FamilySpec("T", 2, 0, 3, n_max=4)):
        assert dec is not None


def test_forests_census():
    # forests by order: 1, 2, 3, 6, 10
    counts = {}
    forests = enumerate_forests(5)
    for g in forests:
        counts[g.n] = counts.get(g.n, 0) + 1
        assert g.m < g.n
    assert counts == {1: 1, 2: 2, 3: 3, 4: 6, 5: 10}
    for i, a in enumerate(forests):
        for b in forests[i + 1:]:
            assert a.n != b.n or a.m != b.m or not brute_iso(a, b)


def test_unknown_suite_lists_the_others():
    with pytest.raises(UnknownSuite) as e:
        suite_instances("nope")
    assert "characterization-path" in str(e.value)


def test_instances_are_deterministic():
    for name in SUITES:
        a = suite_instances(name, budget=3, seed=4)[1]
        b = suite_instances(name, budget=3, seed=4)[1]
        assert a == b


def test_report_bookkeeping():
    r = SuiteReport("x", 0, 2)
    r.record("c", True)
    r.record("c", False, {"G": "A_"}, "homlab hom --g6 'A_'")
    assert not r.passed
    obj = json.loads(json.dumps(r.to_json()))
    assert obj["checks"] == {"c": {"pass": 1, "fail": 1}}
    assert obj["counterexamples"][0]["reproduce"].startswith("homlab")
    assert r.summary().startswith("FAIL x: 2 instances, 1/2 checks")
    assert not SuiteReport("empty", 0, 0).passed


@pytest.mark.parametrize("name", list(SUITES))
def test_suites_pass_on_a_small_budget(name):
    r = run_suite(name, seed=1, budget=3)
    assert r.passed, r.counterexamples[:3]
    assert r.instances > 0


def test_pool_and_serial_runs_agree():
    a = run_suite("cfi-parity", seed=2, budget=4)
    b = run_suite("cfi-parity", seed=2, jobs=2, budget=4)
    assert a.checks == b.checks
