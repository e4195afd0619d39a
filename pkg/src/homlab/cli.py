"""Command line entry point.  Every verb prints JSON unless --g6 or --dot is given."""
import argparse
import json
import random
import sys
from fractions import Fraction

from . import harness
from .cfi import build_cfi, cfi_even, cfi_odd
from .comonad import (ComonadError, build_universe, check_comonad_laws, coalgebra_cover_bridge, cokleisli_search)
from .decomp import (ConstructionTree, DecompositionError, ForestCover, RootedDecomposition, convert,
                     cover_from_json, cover_to_json, decomposition_from_json, decomposition_to_dot,
                     decomposition_to_json, eval_hom_via_construction)
from .exhaustive import find_forest_cover, find_linear_cover
from .graphs import (Graph, LabeledGraph, RelStructure, are_isomorphic, complete, cycle, empty, enumerate_graphs,
                     from_json, parse_graph6, path, star, to_dot, to_graph6, to_json)
from .homcount import hom_count, lincomb_to_json, sub_coefficients, sub_count, sub_via_hom
from .logic import (FormulaSyntaxError, FragmentError, analyze, count_solutions, evaluate, formula_from_construction,
                    is_tally, lincomb_from_formula, parse, to_primitive_normal_form, to_sexpr)
from .modelgames import solve_all_in_one, solve_bijective_pebble, solve_exists_pebble
from .pursuit import solve_cr, solve_cr_full, solve_ns, solve_ns_direct


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- input

NAMED = {"K": complete, "C": cycle, "P": path, "E": empty, "S": star}


def named_graph(text):
    """K4, C6, P3, E2 (edgeless), S3 (star with 3 leaves)."""
    if len(text) < 2 or text[0] not in NAMED or not text[1:].isdigit():
        raise UsageError(f"unknown graph name {text!r}; expected one of K<n>, C<n>, P<n>, E<n>, S<n>")
    return NAMED[text[0]](int(text[1:]))


def read_graph6(text, what="graph"):
    try:
        return parse_graph6(text)
    except (ValueError, IndexError) as e:
        raise UsageError(f"malformed graph6 for {what} {text!r}: {e}") from None


def read_json_file(name):
    src = sys.stdin.read() if name == "-" else open(name).read()
    try:
        return json.loads(src)
    except json.JSONDecodeError as e:
        raise UsageError(f"{name}:{e.lineno}:{e.colno}: {e.msg}") from None


def read_graph_json(name):
    obj = read_json_file(name)
    try:
        return from_json(obj)
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"{name}: not a graph object ({e})") from None


def graph_arg(args, prefix=""):
    """Graph from --<prefix>g6, --<prefix>json or --<prefix>name."""
    key = prefix.replace("-", "_")
    g6 = getattr(args, key + "g6", None)
    js = getattr(args, key + "json", None)
    name = getattr(args, key + "name", None)
    given = [x for x in (g6, js, name) if x is not None]
    if len(given) != 1:
        raise UsageError(f"give exactly one of --{prefix}g6, --{prefix}json, --{prefix}name")
    if g6 is not None:
        return read_graph6(g6)
    if name is not None:
        return named_graph(name)
    return read_graph_json(js).graph


def add_graph_args(p, prefix=""):
    p.add_argument(f"--{prefix}g6", metavar="STR", help="graph6 string")
    p.add_argument(f"--{prefix}json", metavar="FILE", help="graph JSON file ('-' for stdin)")
    p.add_argument(f"--{prefix}name", metavar="NAME", help="K<n>, C<n>, P<n>, E<n> or S<n>")


def parse_set(text):
    if text in (None, "", "-"):
        return ()
    try:
        return tuple(sorted({int(x) for x in text.split(",")}))
    except ValueError:
        raise UsageError(f"expected comma separated vertices, got {text!r}") from None


def parse_assignment(text):
    out = {}
    for item in (text or "").split(","):
        if not item:
            continue
        z, _, v = item.partition("=")
        if not v.isdigit():
            raise UsageError(f"bad assignment {item!r}; expected name=vertex")
        out[z.strip()] = int(v)
    return out


def read_formula(args):
    text = args.formula
    if text is None and args.formula_file:
        text = open(args.formula_file).read()
    if text is None:
        raise UsageError("give --formula or --formula-file")
    return parse(text)


# ---------------------------------------------------------------- output

def _plain(x):
    if isinstance(x, (set, frozenset)):
        return sorted(x, key=repr)
    if isinstance(x, tuple):
        return list(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Graph):
        return to_graph6(x)
    if hasattr(x, "to_json"):
        return x.to_json()
    return repr(x)


def emit(obj):
    print(json.dumps(obj, indent=2, default=_plain))


def emit_graph(g, args, extra=None):
    if getattr(args, "dot", False):
        print(to_dot(g))
    elif getattr(args, "as_g6", False):
        print(to_graph6(g.graph if isinstance(g, LabeledGraph) else g))
    else:
        obj = to_json(g)
        obj.update(extra or {})
        emit(obj)


def construction_to_json(ct):
    return {"caterpillar": ct.caterpillar, "parent": list(ct.parent), "tags": list(ct.tags),
            "eliminated": {str(t): z for t, z in sorted(ct.eliminated.items())},
            "payloads": [to_json(p) for p in ct.payloads]}


def construction_from_json(obj):
    return ConstructionTree(obj["parent"], obj["tags"], [from_json(p) for p in obj["payloads"]],
                            {int(t): z for t, z in obj.get("eliminated", {}).items()}, obj.get("caterpillar", False))


def _structured(x):
    if isinstance(x, RootedDecomposition):
        return {"type": "decomposition", **decomposition_to_json(x)}
    if isinstance(x, ForestCover):
        return {"type": "cover", **cover_to_json(x)}
    if isinstance(x, ConstructionTree):
        return {"type": "construction", **construction_to_json(x)}
    raise TypeError(type(x).__name__)


# ---------------------------------------------------------------- verbs

def cmd_graphs(args):
    n_min = args.n_max if args.exact else 1
    gs = enumerate_graphs(args.n_max, connected=args.connected, n_min=n_min)
    if args.as_g6:
        for g in gs:
            print(to_graph6(g))
        return 0
    emit({"n_max": args.n_max, "connected": args.connected, "exact": args.exact, "count": len(gs),
          "graphs": [{"g6": to_graph6(g), "n": g.n, "m": g.m} for g in gs]})
    return 0


def cmd_family(args):
    try:
        spec = harness.FamilySpec(args.cls, args.k1, args.k2, args.q, args.n_max, args.connected)
    except ValueError as e:
        raise UsageError(str(e)) from None
    members = list(harness.enumerate_family(spec))
    if args.as_g6:
        for g, _ in members:
            print(to_graph6(g))
        return 0
    emit({"class": spec.cls, "k1": spec.k1, "k2": spec.k2, "q": spec.q, "n_max": spec.n_max,
          "connected": spec.connected, "count": len(members),
          "members": [{"g6": to_graph6(g), "n": g.n, "m": g.m,
                       "certificate": decomposition_to_json(c) if c is not None else None} for g, c in members]})
    return 0


def _constructions(f, kind):
    for k, k1, ct in harness.least_width_constructions(f):
        if k == kind:
            return k1, ct
    raise UsageError(f"no {kind} construction found for the pattern")


def cmd_hom(args):
    f = graph_arg(args, "pattern-")
    if args.cfi:
        base = named_graph(args.cfi) if args.cfi[1:].isdigit() else read_graph6(args.cfi, "--cfi")
        x, xt = cfi_even(base).graph, cfi_odd(base).graph
        emit({"pattern": to_graph6(f), "base": to_graph6(base), "even": hom_count(f, x, args.injective),
              "odd": hom_count(f, xt, args.injective)})
        return 0
    g = graph_arg(args)
    out = {"pattern": to_graph6(f), "target": to_graph6(g), "hom": hom_count(f, g, args.injective)}
    if args.via:
        if args.injective:
            raise UsageError("--via evaluates plain homomorphism counts only")
        k1, ct = _constructions(f, args.via)
        out.update({"via": args.via, "width": [k1, 0], "dynamic_programming": eval_hom_via_construction(ct, g)})
        out["agree"] = out["dynamic_programming"] == out["hom"]
    emit(out)
    return 0 if out.get("agree", True) else 1


def cmd_sub(args):
    f = graph_arg(args, "pattern-")
    co = sub_coefficients(f)
    out = {"pattern": to_graph6(f)}
    if args.coefficients:
        out["coefficients"] = lincomb_to_json(co)
    if any(getattr(args, k) is not None for k in ("g6", "json", "name")):
        g = graph_arg(args)
        a, b = sub_via_hom(f, g, co), sub_count(f, g)
        out.update({"target": to_graph6(g), "via_hom": a, "direct": b, "agree": a == b})
    emit(out)
    return 0 if out.get("agree", True) else 1


def cmd_cfi(args):
    g = graph_arg(args)
    s = parse_set(args.twist)
    try:
        x = build_cfi(g, s)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.compare is None:
        if args.dot or args.as_g6:
            emit_graph(x.graph, args)
        else:
            emit(x.to_json())
        return 0
    t = parse_set(args.compare)
    y = build_cfi(g, t)
    iso, _ = are_isomorphic(x.graph, y.graph)
    want = len(s) % 2 == len(t) % 2
    emit({"base": to_graph6(g), "S": list(s), "T": list(t), "order": x.graph.n, "isomorphic": iso,
          "same_parity": want, "consistent": iso == want})
    return 0 if iso == want else 1


def cmd_solve(args):
    g = graph_arg(args)
    if args.game == "ns":
        if args.direct:
            out = solve_ns_direct(g, args.k1, args.k2)
            normal = solve_ns(g, args.k1, args.k2)
            emit({"game": "ns", "graph": to_graph6(g), "k": [args.k1, args.k2], "direct": out.label,
                  "normal_form": normal.label,
                  "agree": not out.inconclusive and out.pursuers_win == normal.pursuers_win})
            return 0
        out = solve_ns(g, args.k1, args.k2)
    else:
        if args.q is None:
            raise UsageError("solve cr needs --q")
        out = solve_cr(g, args.k1, args.k2, args.q)
    res = {"game": args.game, "graph": to_graph6(g), "k": [args.k1, args.k2], "verdict": out.label}
    if args.game == "cr":
        res["q"] = args.q
        if args.full:
            res["unrestricted_game"] = solve_cr_full(g, args.k1, args.k2, args.q)
    if out.pursuers_win:
        res["strategy"] = out.strategy.to_json()
        res["decomposition"] = decomposition_to_json(out.decomposition)
    if args.dot:
        if not out.pursuers_win:
            raise UsageError("no decomposition to draw: the evader wins")
        print(decomposition_to_dot(out.decomposition))
        return 0
    emit(res)
    return 0


def cmd_game(args):
    a, b = graph_arg(args, "a-"), graph_arg(args, "b-")
    if args.variant == "exists":
        v = solve_exists_pebble(a, b, args.k1, args.k2, args.q)
    elif args.variant == "bp":
        if args.q is None:
            raise UsageError("the bijective game needs --q")
        v = solve_bijective_pebble(a, b, args.k1, args.k2, args.q)
    else:
        if args.n_max is None:
            raise UsageError("the all-in-one games need --n-max")
        v = solve_all_in_one(a, b, args.k1, args.k2, args.n_max, bijective=args.variant == "abp")
    emit({"game": args.variant, "A": to_graph6(a), "B": to_graph6(b), "k": [args.k1, args.k2], "q": args.q,
          **v.to_json()})
    return 0


def cmd_logic(args):
    if args.action == "compile":
        return _logic_compile(args)
    f = read_formula(args)
    if args.action == "eval":
        g = graph_arg(args)
        lg = LabeledGraph(g, parse_assignment(args.assign))
        ws = [v for v in sorted(f.free) if is_tally(v)]
        out = {"formula": to_sexpr(f), "graph": to_graph6(g), "labels": dict(lg.labels)}
        if ws:
            out["tally"] = ws
            out["count"] = count_solutions(f, lg, ws)
        else:
            out["value"] = evaluate(f, lg)
        emit(out)
    elif args.action == "analyze":
        rep = analyze(f, (args.k1, args.k2), args.q)
        emit({"formula": to_sexpr(f), "free": sorted(rep.free), "requantified": sorted(rep.requantified),
              "restricted_conjunction": rep.restricted_conjunction, "quantifier_rank": rep.quantifier_rank,
              "fragments": rep.fragments})
    elif args.action == "pnf":
        emit({"formula": to_sexpr(f), "normal_form": to_sexpr(to_primitive_normal_form(f))})
    else:
        lc = lincomb_from_formula(f, args.mode, n=args.n, k1=args.k1, k2=args.k2, q=args.q)
        emit({"formula": to_sexpr(f), "mode": args.mode, "terms": lincomb_to_json(lc)})
    return 0


def _logic_compile(args):
    f = graph_arg(args, "pattern-")
    kind = "tree" if args.tree else "path"
    if args.tree and args.n is None:
        raise UsageError("--tree needs the order bound --n")
    k1, ct = _constructions(f, kind)
    phi = formula_from_construction(ct, args.m, args.tree, args.n)
    out = {"pattern": to_graph6(f), "m": args.m, "construction": kind, "width": [k1, 0],
           "formula": to_sexpr(phi, limit=args.limit)}
    if args.eval_g6:
        g = read_graph6(args.eval_g6, "--eval-g6")
        h = hom_count(f, g)
        val = evaluate(phi, g)
        out.update({"target": args.eval_g6, "hom": h, "value": val, "consistent": val == (h == args.m)})
        emit(out)
        return 0 if out["consistent"] else 1
    emit(out)
    return 0


def _structure_arg(args):
    if any(getattr(args, k) is not None for k in ("g6", "json", "name")):
        return RelStructure.from_graph(graph_arg(args))
    return harness.random_structure(random.Random(args.seed))


def cmd_comonad(args):
    if args.action == "build":
        a = _structure_arg(args)
        u = build_universe(a, args.kind, args.k1, args.k2, args.bound)
        emit(u.to_json())
    elif args.action == "laws":
        a = _structure_arg(args)
        ok, witness = check_comonad_laws(a, args.kind, args.k1, args.k2, args.bound, panel=args.panel,
                                         seed=args.seed)
        emit({"kind": args.kind, "k": [args.k1, args.k2], "bound": args.bound, "seed": args.seed,
              "structure_size": a.size, "ok": ok, "witness": witness})
        return 0 if ok else 1
    elif args.action == "bridge":
        return _bridge(args)
    else:
        a, b = graph_arg(args, "a-"), graph_arg(args, "b-")
        res = cokleisli_search(a, b, args.kind, args.k1, args.k2, args.q, iso=args.iso)
        emit({"A": to_graph6(a), "B": to_graph6(b), "k": [args.k1, args.k2], "q": args.q, **res.to_json()})
    return 0


def _bridge(args):
    g = graph_arg(args)
    if args.input:
        obj = read_json_file(args.input)
        fc = cover_from_json(obj)
        covers = [fc]
    else:
        covers = [c for c in (find_forest_cover(g, args.k1, args.k2, args.q),
                              find_linear_cover(g, args.k1, args.k2, component=True)) if c is not None]
    out = []
    ok = True
    for fc in covers:
        c = coalgebra_cover_bridge(fc, g)
        back = coalgebra_cover_bridge(c, g)
        same = (back.parent, back.pebbles) == (fc.parent, fc.pebbles)
        ok &= same
        out.append({"cover": cover_to_json(fc), "coalgebra": c.to_json(), "round_trip_identity": same})
    emit({"graph": to_graph6(g), "k": [args.k1, args.k2], "q": args.q, "covers": out})
    return 0 if ok else 1


def cmd_suite(args):
    if args.list or args.name is None:
        emit({"suites": list(harness.SUITES)})
        return 0
    try:
        report = harness.run_suite(args.name, seed=args.seed, jobs=args.jobs, budget=args.budget)
    except harness.UnknownSuite as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(report.summary(), file=sys.stderr)
    emit(report.to_json())
    return 0 if report.passed else 1


def cmd_convert(args):
    if args.what == "graph":
        g = graph_arg(args)
        emit_graph(g, args)
        return 0
    g = graph_arg(args)
    obj = read_json_file(args.input)
    kind = obj.get("type") or ("cover" if "pebbles" in obj else "construction" if "payloads" in obj
                               else "decomposition")
    try:
        src = {"decomposition": decomposition_from_json, "cover": cover_from_json,
               "construction": construction_from_json}[kind](obj)
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"{args.input}: malformed {kind} ({e})") from None
    if args.to == "dot":
        if not isinstance(src, RootedDecomposition):
            src = convert(src, "decomposition", g, args.k1, args.k2)
        print(decomposition_to_dot(src))
        return 0
    emit(_structured(convert(src, args.to, g, args.k1, args.k2)))
    return 0


# ---------------------------------------------------------------- parser

def _k_args(p, q=False, q_required=False):
    p.add_argument("--k1", type=int, required=True, help="reusable pebbles")
    p.add_argument("--k2", type=int, default=0, help="non-reusable pebbles")
    if q:
        p.add_argument("--q", type=int, required=q_required, help="rounds / depth bound")


def build_parser():
    top = argparse.ArgumentParser(prog="homlab", description=__doc__)
    top.add_argument("--seed", type=int, default=0, help="seed for randomized checks (default 0)")
    top.add_argument("--jobs", type=int, default=1, help="worker processes for suites")
    top.add_argument("--budget", type=int, default=None, help="cap on graph order for suites")
    sub = top.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("graphs", help="one graph per isomorphism class")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--connected", action="store_true")
    p.add_argument("--exact", action="store_true", help="only graphs with exactly n-max vertices")
    p.add_argument("--g6", dest="as_g6", action="store_true", help="one graph6 line per graph")
    p.set_defaults(fn=cmd_graphs)

    p = sub.add_parser("family", help="members of a width class with certificates")
    p.add_argument("--class", dest="cls", choices=["P", "UP", "T", "all"], required=True)
    p.add_argument("--k1", type=int, default=1)
    p.add_argument("--k2", type=int, default=0)
    p.add_argument("--q", type=int)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--connected", action="store_true")
    p.add_argument("--g6", dest="as_g6", action="store_true")
    p.set_defaults(fn=cmd_family)

    p = sub.add_parser("hom", help="homomorphism counts")
    add_graph_args(p, "pattern-")
    add_graph_args(p)
    p.add_argument("--cfi", metavar="BASE", help="count into both CFI graphs over this base (name or graph6)")
    p.add_argument("--injective", action="store_true")
    p.add_argument("--via", choices=["path", "tree"], help="also evaluate through a construction tree")
    p.set_defaults(fn=cmd_hom)

    p = sub.add_parser("sub", help="subgraph counts through the spasm")
    add_graph_args(p, "pattern-")
    add_graph_args(p)
    p.add_argument("--coefficients", action="store_true", help="print the hom combination")
    p.set_defaults(fn=cmd_sub)

    p = sub.add_parser("cfi", help="CFI graphs and twist parity")
    add_graph_args(p)
    p.add_argument("--twist", default="-", help="twisted base vertices, comma separated ('-' for none)")
    p.add_argument("--compare", help="second twist set; reports isomorphism")
    p.add_argument("--dot", action="store_true")
    p.add_argument("--as-g6", action="store_true")
    p.set_defaults(fn=cmd_cfi)

    p = sub.add_parser("solve", help="node searching (ns) or cops-and-robber (cr)")
    p.add_argument("game", choices=["ns", "cr"])
    add_graph_args(p)
    _k_args(p, q=True)
    p.add_argument("--direct", action="store_true", help="ns: compare with the direct game search")
    p.add_argument("--full", action="store_true", help="cr: also solve the unrestricted game")
    p.add_argument("--dot", action="store_true", help="draw the decomposition")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("game", help="model comparison pebble games")
    p.add_argument("variant", choices=["exists", "bp", "ap", "abp"])
    add_graph_args(p, "a-")
    add_graph_args(p, "b-")
    _k_args(p, q=True)
    p.add_argument("--n-max", type=int, help="sequence length for the all-in-one games")
    p.set_defaults(fn=cmd_game)

    p = sub.add_parser("logic", help="formulas: evaluate, analyze, normal form, compile")
    p.add_argument("action", choices=["eval", "analyze", "pnf", "lincomb", "compile"])
    p.add_argument("--formula", help="S-expression")
    p.add_argument("--formula-file")
    add_graph_args(p)
    add_graph_args(p, "pattern-")
    p.add_argument("--assign", help="labels, e.g. x1=0,y1=2")
    p.add_argument("--k1", type=int, default=2)
    p.add_argument("--k2", type=int, default=0)
    p.add_argument("--q", type=int)
    p.add_argument("--mode", choices=["path", "tree"], default="path")
    p.add_argument("--n", type=int, help="order bound (tree mode)")
    p.add_argument("--m", type=int, default=1, help="threshold for compile")
    p.add_argument("--tree", action="store_true", help="compile from a tree construction")
    p.add_argument("--eval-g6", help="evaluate the compiled formula on this graph")
    p.add_argument("--limit", type=int, default=4000, help="truncate printed formulas")
    p.set_defaults(fn=cmd_logic)

    p = sub.add_parser("comonad", help="pebbling comonads")
    p.add_argument("action", choices=["build", "laws", "bridge", "search"])
    add_graph_args(p)
    add_graph_args(p, "a-")
    add_graph_args(p, "b-")
    p.add_argument("--kind", choices=["P", "PR"], default="P")
    p.add_argument("--k1", type=int, default=1)
    p.add_argument("--k2", type=int, default=0)
    p.add_argument("--q", type=int, help="sequence length bound (search, bridge)")
    p.add_argument("--bound", type=int, help="sequence length bound (build, laws)")
    p.add_argument("--panel", type=int, default=10)
    p.add_argument("--iso", action="store_true")
    p.add_argument("--input", help="cover JSON for bridge")
    p.set_defaults(fn=cmd_comonad)

    p = sub.add_parser("suite", help="run a cross-check suite")
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    p.set_defaults(fn=cmd_suite)

    p = sub.add_parser("convert", help="convert graphs or decompositions")
    p.add_argument("what", choices=["graph", "decomposition"])
    add_graph_args(p)
    p.add_argument("--input", help="decomposition / cover / construction JSON")
    p.add_argument("--to", choices=["json", "decomposition", "cover", "construction", "nice", "dot"],
                   default="json")
    p.add_argument("--k1", type=int)
    p.add_argument("--k2", type=int, default=0)
    p.add_argument("--as-g6", action="store_true")
    p.set_defaults(fn=cmd_convert)
    return top


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.verb == "convert" and args.what == "graph":
        args.dot = args.to == "dot"
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FormulaSyntaxError as e:
        print(f"error: formula syntax: {e}", file=sys.stderr)
        return 2
    except (FragmentError, DecompositionError, ComonadError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
