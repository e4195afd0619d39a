"""Graph families and cross-checking suites.

Each suite expands into independent instances (plain tuples, graphs as
graph6) so they can run in a worker pool and be replayed from the CLI.
"""
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, product

from .cfi import build_cfi, cfi_even, cfi_odd
from .comonad import (build_universe, check_comonad_laws, coalgebra_cover_bridge, cokleisli_search)
from .decomp import decomposition_to_construction, eval_hom_via_construction, verify_construction_tree
from .exhaustive import (find_forest_cover, find_linear_cover, find_path_decomposition, find_tree_decomposition)
from .graphs import (Graph, IsoBucket, LabeledGraph, RelStructure, are_isomorphic, cycle, disjoint_union,
                     enumerate_graphs, parse_graph6, to_graph6)
from .homcount import hom_count, hom_lincomb, sub_coefficients, sub_count, sub_via_hom
from .logic import (analyze, count_solutions, evaluate, formula_from_construction, lincomb_from_formula, parse,
                    to_primitive_normal_form)
from .modelgames import solve_bijective_pebble, solve_exists_pebble
from .pursuit import is_monotone, membership, solve_cr, solve_ns, solve_ns_direct

MAX_VERTICES = 8


class UnknownSuite(KeyError):
    def __init__(self, name):
        super().__init__(f"unknown suite {name!r}; available: {', '.join(SUITES)}")
        self.name = name

    def __str__(self):
        return self.args[0]


# ---------------------------------------------------------------- families

@dataclass(frozen=True)
class FamilySpec:
    cls: str = "all"  # 'P', 'UP', 'T' or 'all'
    k1: int = 1
    k2: int = 0
    q: int = None
    n_max: int = 4
    connected: bool = False

    def __post_init__(self):
        if self.cls not in ("P", "UP", "T", "all"):
            raise ValueError(f"unknown class {self.cls!r}")
        if self.cls == "T" and self.q is None:
            raise ValueError("class T needs q")
        if self.cls != "all" and self.k1 + self.k2 < 1:
            raise ValueError("need k1 + k2 >= 1")
        if not 1 <= self.n_max <= MAX_VERTICES:
            raise ValueError(f"n_max must be in 1..{MAX_VERTICES}")


def enumerate_family(spec):
    """Members of the class in enumeration order, as (graph, certificate) pairs."""
    for g in enumerate_graphs(spec.n_max, connected=spec.connected):
        if spec.cls == "all":
            yield g, None
            continue
        if spec.cls == "T":
            out = solve_cr(g, spec.k1, spec.k2, spec.q)
            if out.pursuers_win:
                yield g, out.decomposition
        elif spec.cls == "P":
            out = solve_ns(g, spec.k1, spec.k2)
            if out.pursuers_win:
                yield g, out.decomposition
        elif membership(g, "UP", spec.k1, spec.k2):
            yield g, None


def enumerate_forests(n_max):
    """All forests with 1..n_max vertices, one per isomorphism class."""
    trees = {1: [Graph(1)]}
    for n in range(2, n_max + 1):
        bucket = IsoBucket()
        for t in trees[n - 1]:
            for v in range(t.n):
                bucket.add(Graph(n, list(t.edges) + [(v, n - 1)]))
        trees[n] = _bucket_items(bucket)
    forests = {0: [Graph(0)]}
    out = []
    for n in range(1, n_max + 1):
        bucket = IsoBucket()
        # a forest is a tree of size s plus a forest on the rest
        for s in range(1, n + 1):
            for t in trees[s]:
                for rest in forests[n - s]:
                    bucket.add(disjoint_union(t, rest) if rest.n else t)
        forests[n] = _bucket_items(bucket)
        out += forests[n]
    return out


def _bucket_items(bucket):
    return sorted(bucket.items, key=lambda g: (g.n, g.m, to_graph6(g)))


def graphs_by_edges(m_max):
    """Graphs without isolated vertices and 1..m_max edges, one per isomorphism class."""
    out = []
    frontier = [Graph(2, [(0, 1)])]
    out += frontier
    for _ in range(2, m_max + 1):
        bucket = IsoBucket()
        for g in frontier:
            n = g.n
            options = [(u, v) for u, v in combinations(range(n), 2) if not g.has_edge(u, v)]
            options += [(u, n) for u in range(n)] + [(n, n + 1)]
            for u, v in options:
                bucket.add(Graph(max(n, v + 1), list(g.edges) + [(u, v)]))
        frontier = _bucket_items(bucket)
        out += frontier
    return out


# ---------------------------------------------------------------- reports

@dataclass
class SuiteReport:
    name: str
    seed: int
    instances: int = 0
    checks: dict = field(default_factory=dict)
    counterexamples: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self):
        return not self.counterexamples and self.instances > 0

    def record(self, check, ok, detail=None, reproduce=None):
        tally = self.checks.setdefault(check, {"pass": 0, "fail": 0})
        tally["pass" if ok else "fail"] += 1
        if not ok:
            self.counterexamples.append({"check": check, "detail": detail, "reproduce": reproduce})

    def to_json(self):
        return {"suite": self.name, "seed": self.seed, "passed": self.passed, "instances": self.instances,
                "checks": self.checks, "counterexamples": self.counterexamples[:50],
                "seconds": round(self.seconds, 2)}

    def summary(self):
        total = sum(c["pass"] + c["fail"] for c in self.checks.values())
        fails = sum(c["fail"] for c in self.checks.values())
        state = "PASS" if self.passed else "FAIL"
        return f"{state} {self.name}: {self.instances} instances, {total - fails}/{total} checks ({self.seconds:.1f}s)"


def _g6(g):
    return to_graph6(g)


# ---------------------------------------------------------------- suite bodies
# Each instance function returns a list of (check, ok, detail, reproduce).

def _path_grid():
    return [(k1, k2) for k1 in range(4) for k2 in range(3) if k1 + k2 >= 1]


def _inst_char_path(args):
    g6, k1, k2 = args
    g = parse_graph6(g6)
    out = solve_ns(g, k1, k2)
    pd = find_path_decomposition(g, k1, k2) is not None
    lc = find_linear_cover(g, k1, k2) is not None
    rep = f"homlab solve ns --g6 '{g6}' --k1 {k1} --k2 {k2}"
    res = [("game == decomposition == cover", out.pursuers_win == pd == lc,
            {"graph": g6, "k": [k1, k2], "game": out.pursuers_win, "decomposition": pd, "cover": lc}, rep)]
    if out.pursuers_win:
        res.append(("strategy monotone", is_monotone(out.strategy, g), {"graph": g6, "k": [k1, k2]}, rep))
    return res


def _inst_char_tree(args):
    g6, k1, k2, q = args
    g = parse_graph6(g6)
    out = solve_cr(g, k1, k2, q)
    td = find_tree_decomposition(g, k1, k2, q) is not None
    fc = find_forest_cover(g, k1, k2, q) is not None
    rep = f"homlab solve cr --g6 '{g6}' --k1 {k1} --k2 {k2} --q {q}"
    res = [("game == decomposition == cover", out.pursuers_win == td == fc,
            {"graph": g6, "k": [k1, k2], "q": q, "game": out.pursuers_win, "decomposition": td, "cover": fc}, rep)]
    if out.pursuers_win:
        res.append(("strategy monotone", is_monotone(out.strategy, g), {"graph": g6, "k": [k1, k2], "q": q}, rep))
    return res


def _inst_nonreusable(args):
    g6, k1, k2 = args
    g = parse_graph6(g6)
    a = solve_ns(g, k1, k2).pursuers_win
    direct = solve_ns_direct(g, k1, k2)
    ok = not direct.inconclusive and a == direct.pursuers_win
    return [("normal form == direct search", ok, {"graph": g6, "k": [k1, k2], "normal_form": a,
                                                  "direct": direct.label},
             f"homlab solve ns --g6 '{g6}' --k1 {k1} --k2 {k2} --direct")]


def _inst_cfi(args):
    g6, s, t = args
    g = parse_graph6(g6)
    iso, _ = are_isomorphic(build_cfi(g, s).graph, build_cfi(g, t).graph)
    want = len(s) % 2 == len(t) % 2
    return [("isomorphic iff equal parity", iso == want, {"graph": g6, "S": list(s), "T": list(t), "iso": iso},
             f"homlab cfi --g6 '{g6}' --twist {','.join(map(str, s)) or '-'} --compare {','.join(map(str, t)) or '-'}")]


def _inst_hdc(args):
    if args[0] == "separation":
        x, xt = cfi_even(cycle(4)).graph, cfi_odd(cycle(4)).graph
        a, b = hom_count(cycle(4), x), hom_count(cycle(4), xt)
        return [("C4 in the (3,0) class", solve_ns(cycle(4), 3, 0).pursuers_win, None, None),
                ("C4 separates the CFI pair", (a, b) == (64, 48), {"even": a, "odd": b},
                 "homlab hom --pattern-g6 'Cr' --cfi C4")]
    if args[0] == "forests":
        # the forest generator covers the class: every member up to this size is acyclic
        bad = [_g6(g) for g in enumerate_graphs(args[1]) if g.m >= g.n - len(g.components()) + 1
               and solve_ns(g, 2, 0).pursuers_win]
        return [("class members are forests", not bad, {"cyclic_members": bad}, None)]
    (g6,) = args
    f = parse_graph6(g6)
    if not solve_ns(f, 2, 0).pursuers_win:
        return [("member filter", True, None, None)]
    x, xt = cfi_even(cycle(4)).graph, cfi_odd(cycle(4)).graph
    a, b = hom_count(f, x), hom_count(f, xt)
    return [("equal counts on the class", a == b, {"F": g6, "even": a, "odd": b},
             f"homlab hom --pattern-g6 '{g6}' --cfi C4")]


def _inst_spasm(args):
    f6, gs = args
    f = parse_graph6(f6)
    co = sub_coefficients(f)
    res = []
    for g6 in gs:
        g = parse_graph6(g6)
        a, b = sub_via_hom(f, g, co), sub_count(f, g)
        res.append(("sub via hom == enumeration", a == b, {"F": f6, "G": g6, "via_hom": str(a), "direct": b},
                    f"homlab sub --pattern-g6 '{f6}' --g6 '{g6}'"))
    return res


def least_width_constructions(f):
    """A caterpillar and a tree construction for f with the least x-width found."""
    out = []
    for kind in ("path", "tree"):
        for k1 in range(1, f.n + 2):
            d = find_path_decomposition(f, k1, 0) if kind == "path" else find_tree_decomposition(f, k1, 0, f.n)
            if d is not None:
                out.append((kind, k1, decomposition_to_construction(d, f, k1, 0)))
                break
    return out


def _inst_dp(args):
    f6, gs = args
    f = parse_graph6(f6)
    res = []
    for kind, k1, ct in least_width_constructions(f):
        for g6 in gs:
            g = parse_graph6(g6)
            a, b = eval_hom_via_construction(ct, g), hom_count(f, g)
            res.append(("construction DP == hom_count", a == b, {"F": f6, "G": g6, "tree": kind, "dp": a, "hom": b},
                        f"homlab hom --pattern-g6 '{f6}' --g6 '{g6}' --via {kind}"))
    return res


def _inst_logic_path(args):
    f6, gs = args
    f = parse_graph6(f6)
    (_, k1, ct), = [c for c in least_width_constructions(f) if c[0] == "path"]
    res = []
    probe = formula_from_construction(ct, 0)
    rep = analyze(probe, (k1, 0))
    res.append(("formula in restricted-conjunction fragment", rep.fragments["andC"],
                {"F": f6, "requantified": sorted(rep.requantified)}, None))
    for g6 in gs:
        g = parse_graph6(g6)
        h = hom_count(f, g)
        ok = evaluate(formula_from_construction(ct, h), g) and not evaluate(formula_from_construction(ct, h + 1), g)
        res.append(("hom count definable (caterpillar)", ok, {"F": f6, "G": g6, "hom": h},
                    f"homlab logic compile --pattern-g6 '{f6}' --m {h} --eval-g6 '{g6}'"))
    return res


def _inst_logic_tree(args):
    f6, gs, n = args
    f = parse_graph6(f6)
    (_, k1, ct), = [c for c in least_width_constructions(f) if c[0] == "tree"]
    depth = verify_construction_tree(ct, ct.target(), k1, 0).depth
    res = []
    for g6 in gs:
        g = parse_graph6(g6)
        h = hom_count(f, g)
        phi = formula_from_construction(ct, h, True, n)
        rep = analyze(phi, (k1, 0))
        ok = evaluate(phi, g) and not evaluate(formula_from_construction(ct, h + 1, True, n), g)
        res.append(("hom count definable (tree)", ok, {"F": f6, "G": g6, "hom": h},
                    f"homlab logic compile --tree --n {n} --pattern-g6 '{f6}' --m {h} --eval-g6 '{g6}'"))
        res.append(("rank within elimination depth", rep.quantifier_rank <= depth,
                    {"F": f6, "qr": rep.quantifier_rank, "depth": depth}, None))
    return res


PATH_FORMULAS = [
    "(exists x2 (and (= x2 w1) (E x1 x2)))",
    "(= x1 x2)",
    "(E x1 x1)",
    "(not (E x1 x2))",
    "(and (E x1 x2) (not (= x1 x2)))",
    "(exists x2 (and (= x2 w1) (and (not (E x1 x2)) (exists y1 (and (= y1 w2) (E x2 y1))))))",
    "(exists y1 (and (= y1 w1) (exists x1 (and (= x1 w2) (and (E x1 y1) (exists x1 (and (= x1 w3) (E x1 y1))))))))",
    "(and (not (= x1 x2)) (exists y1 (and (= y1 w1) (and (E x1 y1) (E x2 y1)))))",
]

TREE_SENTENCES = [
    "(exists x1 (exists x2 (E x1 x2)))",
    "(not (exists x1 (count>= 2 x2 (E x1 x2))))",
    "(forall x1 (exists x2 (E x1 x2)))",
    "(or (count>= 3 x1 true) (exists x1 (E x1 x1)))",
    "(exists x1 (and (exists x2 (E x1 x2)) (not (count>= 3 x2 (E x1 x2)))))",
]

PNF_SENTENCES = [
    "(count-tuples 2 (w1 w2) (exists x1 (and (= x1 w1) (exists x2 (and (= x2 w2) (E x1 x2))))))",
    "(count-tuples 6 (w1 w2) (exists x1 (and (= x1 w1) (exists y1 (and (= y1 w2) (E x1 y1))))))",
    "(exists x1 (or (E x1 x1) (exists x2 (E x1 x2))))",
    "(count-tuples 4 (w1 w2) (exists x1 (and (= x1 w1) (and (not (= x1 x1)) (exists x2 (and (= x2 w2) (E x1 x2)))))))",
    "(or (count-tuples 0 (w1) (exists y1 (and (= y1 w1) (not (= y1 y1))))) "
    "(count-tuples 3 (w1 w2 w3) (exists x1 (and (= x1 w1) (exists y1 (and (= y1 w2) "
    "(exists x1 (and (= x1 w3) (E x1 y1)))))))))",
]


def _labelings(g, labels):
    for img in product(range(g.n), repeat=len(labels)):
        yield LabeledGraph(g, dict(zip(labels, img)))


def _inst_logic_lincomb(args):
    src, mode, n = args
    f = parse(src)
    res = []
    if mode == "path":
        lc = lincomb_from_formula(f, "path")
        ws = sorted((v for v in f.free if v.startswith("w")), key=lambda v: int(v[1:]))
        labels = sorted(v for v in f.free if not v.startswith("w"))
        for g in enumerate_graphs(n):
            for lg in _labelings(g, labels):
                want = count_solutions(f, lg, ws) if ws else int(evaluate(f, lg))
                got = hom_lincomb(lc, lg)
                if got != want:
                    res.append(("combination counts solutions", False, {"formula": src, "G": _g6(g),
                                                                         "labels": lg.labels, "got": str(got),
                                                                         "want": want}, None))
                    return res
        res.append(("combination counts solutions", True, None, None))
    else:
        lc = lincomb_from_formula(f, "tree", n=n, q=analyze(f, (2, 0)).quantifier_rank)
        for g in enumerate_graphs(n, n_min=n):
            got, want = hom_lincomb(lc, g), int(evaluate(f, g))
            if got != want:
                res.append(("combination models sentence", False, {"formula": src, "G": _g6(g), "got": str(got),
                                                                    "want": want}, None))
                return res
        res.append(("combination models sentence", True, None, None))
    return res


def _inst_pnf(args):
    (src,) = args
    f = parse(src)
    p = to_primitive_normal_form(f)
    for g in enumerate_graphs(4):
        if evaluate(f, g) != evaluate(p, g):
            return [("normal form equivalent", False, {"formula": src, "G": _g6(g)}, None)]
    return [("normal form equivalent", True, None, None)]


def random_structure(rng):
    size = rng.randint(1, 3)
    rels = {"E": (2, [(a, b) for a in range(size) for b in range(size) if rng.random() < 0.4])}
    if rng.random() < 0.5:
        rels["U"] = (1, [(a,) for a in range(size) if rng.random() < 0.5])
    return RelStructure(size, rels)


def _inst_laws(args):
    seed, kind, k1, k2, bound = args
    rng = random.Random(seed)
    a = random_structure(rng)
    if len(build_universe(a, kind, k1, k2, bound)) > 10 ** 4:
        return [("universe within budget", False, {"seed": seed}, None)]
    ok, witness = check_comonad_laws(a, kind, k1, k2, bound, panel=10, seed=seed)
    rep = f"homlab --seed {seed} comonad laws --kind {kind} --k1 {k1} --k2 {k2} --bound {bound}"
    return [("comonad laws", ok, witness, rep)]


def _inst_bridge(args):
    (g6,) = args
    g = parse_graph6(g6)
    res = []
    for k1, k2, q in [(1, 1, 3), (2, 0, 3), (2, 1, 4), (1, 2, 5)]:
        for fc in (find_forest_cover(g, k1, k2, q), find_linear_cover(g, k1, k2, component=True)):
            if fc is None:
                continue
            c = coalgebra_cover_bridge(fc, g)
            back = coalgebra_cover_bridge(c, g)
            ok = (back.parent, back.pebbles) == (fc.parent, fc.pebbles)
            res.append(("cover -> coalgebra -> cover is the identity", ok, {"graph": g6, "variant": fc.variant},
                        f"homlab comonad bridge --g6 '{g6}' --k1 {k1} --k2 {k2} --q {q}"))
    return res or [("cover -> coalgebra -> cover is the identity", True, None, None)]


def _inst_morphism(args):
    a6, b6, k1, k2, q = args
    a, b = parse_graph6(a6), parse_graph6(b6)
    x = cokleisli_search(a, b, "P", k1, k2, q).exists
    y = solve_exists_pebble(a, b, k1, k2, q).winner == "duplicator"
    return [("coKleisli morphism == existential game", x == y, {"A": a6, "B": b6, "k": [k1, k2], "q": q,
                                                                "cokleisli": x, "game": y},
             f"homlab comonad search --a-g6 '{a6}' --b-g6 '{b6}' --k1 {k1} --k2 {k2} --q {q}")]


def _inst_iso(args):
    a6, b6, k1, k2, q = args
    a, b = parse_graph6(a6), parse_graph6(b6)
    x = cokleisli_search(a, b, "P", k1, k2, q, iso=True).exists
    y = solve_bijective_pebble(a, b, k1, k2, q).winner == "duplicator"
    return [("coKleisli isomorphism == bijective game", x == y, {"A": a6, "B": b6, "k": [k1, k2], "q": q,
                                                                 "cokleisli": x, "game": y},
             f"homlab comonad search --iso --a-g6 '{a6}' --b-g6 '{b6}' --k1 {k1} --k2 {k2} --q {q}")]


# ---------------------------------------------------------------- suite definitions

def _cap(n, budget):
    return n if budget is None else max(1, min(n, budget))


def _suite_char_path(budget, rng):
    gs = enumerate_graphs(_cap(6, budget), connected=True)
    return _inst_char_path, [(_g6(g), k1, k2) for g in gs for k1, k2 in _path_grid()]


def _suite_char_tree(budget, rng):
    gs = enumerate_graphs(_cap(5, budget), connected=True)
    return _inst_char_tree, [(_g6(g), k1, k2, q) for g in gs for k1, k2 in _path_grid() for q in range(1, 5)]


def _suite_nonreusable(budget, rng):
    gs = enumerate_graphs(_cap(5, budget), connected=True)
    return _inst_nonreusable, [(_g6(g), k1, k2) for g in gs for k1, k2 in _path_grid()]


def _suite_monotone(budget, rng):
    _, a = _suite_char_path(budget, rng)
    _, b = _suite_char_tree(budget, rng)
    return _inst_monotone, [("ns",) + x for x in a] + [("cr",) + x for x in b]


def _inst_monotone(args):
    game, *rest = args
    res = _inst_char_path(tuple(rest)) if game == "ns" else _inst_char_tree(tuple(rest))
    return [r for r in res if r[0] == "strategy monotone"] or [("strategy monotone", True, None, None)]


def _suite_cfi(budget, rng):
    out = []
    for g in enumerate_graphs(_cap(5, budget), connected=True):
        for _ in range(10):
            s = tuple(v for v in range(g.n) if rng.random() < 0.5)
            t = tuple(v for v in range(g.n) if rng.random() < 0.5)
            out.append((_g6(g), s, t))
    return _inst_cfi, out


def _suite_hdc(budget, rng):
    inst = [(_g6(f),) for f in enumerate_forests(_cap(8, budget))]
    return _inst_hdc, inst + [("separation",), ("forests", _cap(6, budget))]


def _suite_spasm(budget, rng):
    gs = [_g6(g) for g in enumerate_graphs(_cap(7, budget))]
    return _inst_spasm, [(_g6(f), gs) for f in graphs_by_edges(4)]


def _suite_dp(budget, rng):
    gs = [_g6(g) for g in enumerate_graphs(_cap(5, budget))]
    return _inst_dp, [(f, gs) for f in gs]


def _suite_logic(budget, rng):
    g5 = [_g6(g) for g in enumerate_graphs(_cap(5, budget))]
    g4 = [_g6(g) for g in enumerate_graphs(_cap(4, budget))]
    n = _cap(4, budget)
    inst = [("path", (f, g5)) for f in g5] + [("tree", (f, g4, n)) for f in g4]
    inst += [("lincomb", (src, "path", _cap(4, budget))) for src in PATH_FORMULAS]
    inst += [("lincomb", (src, "tree", m)) for src in TREE_SENTENCES for m in (3, _cap(4, budget))]
    inst += [("pnf", (src,)) for src in PNF_SENTENCES]
    return _inst_logic, inst


def _inst_logic(args):
    part, inner = args
    return {"path": _inst_logic_path, "tree": _inst_logic_tree, "lincomb": _inst_logic_lincomb,
            "pnf": _inst_pnf}[part](inner)


def _suite_comonad(budget, rng):
    seeds = [rng.randrange(10 ** 9) for _ in range(20)]
    params = [("P", 2, 0, 2), ("P", 1, 1, 2), ("PR", 1, 1, 3), ("P", 1, 2, 3), ("PR", 2, 0, 2)]
    inst = [("laws", (s,) + params[i % len(params)]) for i, s in enumerate(seeds)]
    inst += [("bridge", (_g6(g),)) for g in enumerate_graphs(_cap(5, budget))]
    return _inst_comonad, inst


def _inst_comonad(args):
    part, inner = args
    return _inst_laws(inner) if part == "laws" else _inst_bridge(inner)


def _suite_power(budget, rng):
    small = [_g6(g) for g in enumerate_graphs(_cap(3, budget))]
    small += [_g6(g) for g in enumerate_graphs(_cap(4, budget), n_min=4) if g.m % 2 == 0]
    inst = [("m", (a, b, k1, k2, q)) for a in small for b in small
            for k1, k2 in [(1, 0), (2, 0), (1, 1), (0, 2)] for q in range(1, 4)]
    g5 = [_g6(g) for g in enumerate_graphs(_cap(5, budget), n_min=_cap(5, budget))]
    rng.shuffle(g5)
    pairs = [(a, b) for a, b in zip(g5, g5[1:])] + [(a, a) for a in g5[:5]]
    inst += [("i", (a, b, k1, k2, q)) for a, b in pairs for k1, k2 in [(1, 0), (2, 0), (1, 1)] for q in (1, 2, 3)]
    c6, two_c3 = _g6(cycle(6)), _g6(disjoint_union(cycle(3), cycle(3)))
    inst += [("golden", (c6, two_c3, k1, k2, q, want))
             for k1, k2, q, want in [(3, 0, 3, False), (0, 3, 3, False), (2, 0, 1, True), (2, 0, 2, True),
                                     (2, 0, 3, True), (2, 0, 4, True)]]
    return _inst_power, inst


def _inst_power(args):
    part, inner = args
    if part == "m":
        return _inst_morphism(inner)
    if part == "i":
        return _inst_iso(inner)
    a6, b6, k1, k2, q, want = inner
    res = _inst_iso((a6, b6, k1, k2, q))
    _, ok, detail, rep = res[0]
    return [("golden C6 vs 2C3", ok and detail["cokleisli"] == want, detail, rep)]


SUITES = {
    "characterization-path": _suite_char_path,
    "characterization-tree": _suite_char_tree,
    "nonreusable-first": _suite_nonreusable,
    "monotone-strategies": _suite_monotone,
    "cfi-parity": _suite_cfi,
    "hdc-desk": _suite_hdc,
    "spasm-sub": _suite_spasm,
    "construction-dp": _suite_dp,
    "logic-roundtrip": _suite_logic,
    "comonad": _suite_comonad,
    "power": _suite_power,
}


def suite_instances(name, budget=None, seed=0):
    if name not in SUITES:
        raise UnknownSuite(name)
    return SUITES[name](budget, random.Random(seed))


class _Guarded:
    """Turns an exception inside one instance into a failed check."""

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, args):
        try:
            return self.fn(args)
        except Exception as e:
            return [("instance raised", False, {"args": repr(args)[:300], "error": f"{type(e).__name__}: {e}"}, None)]


def run_suite(name, seed=0, jobs=1, budget=None):
    fn, instances = suite_instances(name, budget, seed)
    fn = _Guarded(fn)
    report = SuiteReport(name, seed, len(instances))
    start = time.perf_counter()
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(fn, instances, chunksize=max(1, len(instances) // (4 * jobs))))
    else:
        results = [fn(x) for x in instances]
    for res in results:
        for check, ok, detail, rep in res:
            report.record(check, ok, detail, rep)
    report.seconds = time.perf_counter() - start
    return report
