"""Bounded universes of the pebble-relation (PR) and pebbling (P) comonads.

A P element is a non-empty tuple of (pebble, element) pairs.  A PR element
is a pair (sequence, i) with a 1-based position i.  A y pebble occurs at
most once in any sequence.
"""
import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product as cartesian

from .decomp import ForestCover, verify_forest_cover
from .graphs import Graph, RelStructure, gaifman, pebble_names
from .modelgames import _perfect_matching


class ComonadError(ValueError):
    pass


def _structure(x):
    return RelStructure.from_graph(x) if isinstance(x, Graph) else x


def _legal(seq):
    ys = [z for z, _ in seq if z.startswith("y")]
    return len(ys) == len(set(ys))


def _sequences(names, size, length):
    """Legal sequences of exactly this length, in lexicographic pebble order."""
    out = []

    def rec(prefix, used):
        if len(prefix) == length:
            out.append(tuple(prefix))
            return
        for z in names:
            if z in used:
                continue
            for a in range(size):
                prefix.append((z, a))
                rec(prefix, used | {z} if z.startswith("y") else used)
                prefix.pop()

    rec([], frozenset())
    return out


class SeqStructure:
    def __init__(self, kind, base, k1, k2, bound):
        self.kind = kind
        self.base = base
        self.k1 = k1
        self.k2 = k2
        self.bound = bound
        names = pebble_names(k1, k2)
        seqs = []
        for n in range(1, bound + 1):
            seqs += _sequences(names, base.size, n)
        if kind == "P":
            self.elements = seqs
        else:
            self.elements = [(s, i) for s in seqs for i in range(1, len(s) + 1)]
        for e in self.elements:
            if not _legal(e if kind == "P" else e[0]):
                raise ComonadError(f"illegal universe element {e}")
        self.index = {e: i for i, e in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def __contains__(self, e):
        return e in self.index

    def counit(self, e):
        return counit(self.kind, e)

    def holds(self, name, elems, with_identity=False):
        if name == "I" and with_identity:
            return _holds(self.kind, self.base, None, elems)
        return _holds(self.kind, self.base, name, elems)

    def relation_tuples(self, name, with_identity=False):
        """All tuples of the named relation (I is the identity relation when requested)."""
        if name == "I":
            if not with_identity:
                raise KeyError(name)
            arity, rel = 2, None
        else:
            arity, rel = self.base.relations[name][0], name
        if self.kind == "P":
            for top in self.elements:
                chain = [top[:i] for i in range(1, len(top) + 1)]
                for t in cartesian(chain, repeat=arity):
                    if top in t and _holds("P", self.base, rel, t):
                        yield t
        else:
            seen = set()
            for s, _ in self.elements:
                if s in seen:
                    continue
                seen.add(s)
                for idx in cartesian(range(1, len(s) + 1), repeat=arity):
                    t = tuple((s, i) for i in idx)
                    if _holds("PR", self.base, rel, t):
                        yield t

    def to_structure(self, with_identity=False):
        rels = {}
        names = list(self.base.relations) + (["I"] if with_identity else [])
        for name in names:
            arity = 2 if name == "I" else self.base.relations[name][0]
            rels[name] = (arity, [tuple(self.index[e] for e in t)
                                  for t in self.relation_tuples(name, with_identity)])
        return RelStructure(len(self.elements), rels)

    def to_json(self):
        st = self.to_structure()
        return {
            "kind": self.kind, "k1": self.k1, "k2": self.k2, "bound": self.bound,
            "elements": [_element_json(self.kind, e) for e in self.elements],
            "counit": [self.counit(e) for e in self.elements],
            "relations": {n: {"arity": a, "tuples": sorted(map(list, ts))} for n, (a, ts) in st.relations.items()},
        }


def _element_json(kind, e):
    if kind == "P":
        return [[z, a] for z, a in e]
    return {"sequence": [[z, a] for z, a in e[0]], "position": e[1]}


def counit(kind, e):
    return e[-1][1] if kind == "P" else e[0][e[1] - 1][1]


def _holds(kind, base, name, elems):
    """name None means the identity relation."""
    if kind == "P":
        for s in elems:
            for t in elems:
                short, long_ = (s, t) if len(s) <= len(t) else (t, s)
                if long_[:len(short)] != short:
                    return False
                z = short[-1][0]
                if any(w == z for w, _ in long_[len(short):]):
                    return False
        vals = tuple(e[-1][1] for e in elems)
    else:
        s = elems[0][0]
        if any(e[0] != s for e in elems):
            return False
        top = max(i for _, i in elems)
        for _, i in elems:
            z = s[i - 1][0]
            if any(w == z for w, _ in s[i:top]):
                return False
        vals = tuple(s[i - 1][1] for _, i in elems)
    if name is None:
        return len(set(vals)) == 1
    return base.holds(name, vals)


def build_universe(a, kind, k1, k2, bound=None):
    a = _structure(a)
    if kind not in ("P", "PR"):
        raise ComonadError(f"unknown comonad kind {kind!r}")
    if k1 + k2 < 1:
        raise ComonadError("need at least one pebble")
    if bound is None:
        if kind == "P":
            raise ComonadError("the pebbling comonad needs a depth bound q")
        bound = a.size
    if bound < 1:
        raise ComonadError("bound must be at least 1")
    return SeqStructure(kind, a, k1, k2, bound)


# ---------------------------------------------------------------- coextension and laws

def coextend(f, a_univ, b=None):
    """f maps universe elements to values; returns the coextension on every element.

    For P, entry i of the image is f of the i-th prefix; for PR, entry i is
    f at position i of the same sequence.  Pebble indices are kept.
    """
    out = {}
    size = None if b is None else _structure(b).size
    for e in a_univ.elements if isinstance(a_univ, SeqStructure) else a_univ:
        out[e] = _coextend_one(_as_fn(f), e)
        if size is not None:
            seq = out[e] if _kind_of(e) == "P" else out[e][0]
            if any(not 0 <= v < size for _, v in seq):
                raise ComonadError("f leaves the target universe")
    return out


def _kind_of(e):
    return "P" if isinstance(e[0][0], str) else "PR"


def _coextend_one(f, e):
    kind = _kind_of(e)
    try:
        if kind == "P":
            return tuple((e[i][0], f(e[:i + 1])) for i in range(len(e)))
        s, i = e
        return tuple((s[j][0], f((s, j + 1))) for j in range(len(s))), i
    except KeyError as err:
        raise ComonadError(f"f is not defined on {err.args[0]}") from None


def _as_fn(f):
    return f.__getitem__ if isinstance(f, dict) else f


def check_comonad_laws(a, kind, k1, k2, bound=None, panel=10, seed=0, b_size=2, c_size=2, coextend_fn=None):
    """Checks e* = id, e . f* = f and (g . f*)* = g* . f* on random arrows.

    Returns (True, None) or (False, witness dict).
    """
    ext = coextend_fn or _coextend_one
    ua = build_universe(a, kind, k1, k2, bound)
    rng = random.Random(seed)
    for e in ua.elements:
        got = ext(lambda x: counit(kind, x), e)
        if got != e:
            return False, {"law": "counit coextension is the identity", "element": e, "got": got}
    ub_elems = build_universe(RelStructure(b_size), kind, k1, k2, ua.bound).elements
    for trial in range(panel):
        f = {e: rng.randrange(b_size) for e in ua.elements}
        g = {e: rng.randrange(c_size) for e in ub_elems}
        for e in ua.elements:
            fe = ext(f.__getitem__, e)
            if counit(kind, fe) != f[e]:
                return False, {"law": "counit after coextension", "trial": trial, "element": e}
            lhs = ext(lambda x: g[ext(f.__getitem__, x)], e)
            rhs = ext(g.__getitem__, fe)
            if lhs != rhs:
                return False, {"law": "coextension composes", "trial": trial, "element": e, "lhs": lhs, "rhs": rhs}
    return True, None


# ---------------------------------------------------------------- coalgebras and covers

@dataclass
class Coalgebra:
    base: RelStructure
    kind: str
    k1: int
    k2: int
    alpha: dict
    bound: int = None

    def to_json(self):
        return {"kind": self.kind, "k1": self.k1, "k2": self.k2,
                "alpha": {str(v): _element_json(self.kind, e) for v, e in sorted(self.alpha.items())}}


def check_coalgebra(c):
    """(ok, reason): alpha is a homomorphism and satisfies the counit and comultiplication laws."""
    a, kind = c.base, c.kind
    names = set(pebble_names(c.k1, c.k2))
    if set(c.alpha) != set(range(a.size)):
        return False, "alpha is not total"
    for v, e in c.alpha.items():
        seq = e if kind == "P" else e[0]
        if any(z not in names for z, _ in seq) or not _legal(seq):
            return False, f"alpha({v}) is not a universe element"
        if c.bound is not None and len(seq) > c.bound:
            return False, f"alpha({v}) is longer than {c.bound}"
        if counit(kind, e) != v:
            return False, f"counit law fails at {v}"
    for name, (_, tuples) in a.relations.items():
        for t in tuples:
            if not _holds(kind, a, name, tuple(c.alpha[v] for v in t)):
                return False, f"alpha does not preserve {name}{t}"
    lift = lambda x: c.alpha[counit(kind, x)]
    for v, e in c.alpha.items():
        if _coextend_one(lambda x: x, e) != _coextend_one(lift, e):
            return False, f"comultiplication law fails at {v}"
    return True, "ok"


def cover_to_coalgebra(fc, a):
    a = _structure(a)
    if fc.variant == "tree":
        alpha = {v: tuple((fc.pebbles[u], u) for u in fc.chain(v)) for v in range(a.size)}
        return Coalgebra(a, "P", fc.k1, fc.k2, alpha, fc.height())
    kids = {}
    for v, p in enumerate(fc.parent):
        if p != -1:
            kids.setdefault(p, []).append(v)
    alpha = {}
    for r in fc.roots:
        path = [r]
        while path[-1] in kids:
            (nxt,) = kids[path[-1]]
            path.append(nxt)
        seq = tuple((fc.pebbles[u], u) for u in path)
        for i, u in enumerate(path):
            alpha[u] = (seq, i + 1)
    return Coalgebra(a, "PR", fc.k1, fc.k2, alpha)


def coalgebra_to_cover(c):
    n = c.base.size
    parent, peb = [-1] * n, [None] * n
    for v, e in c.alpha.items():
        if c.kind == "P":
            peb[v] = e[-1][0]
            parent[v] = e[-2][1] if len(e) > 1 else -1
        else:
            s, i = e
            peb[v] = s[i - 1][0]
            parent[v] = s[i - 2][1] if i > 1 else -1
    return ForestCover(parent, peb, c.k1, c.k2, "tree" if c.kind == "P" else "linear-component")


def coalgebra_cover_bridge(x, g, direction=None):
    """Cover -> coalgebra or coalgebra -> cover; the result is verified before it is returned."""
    g = g if isinstance(g, Graph) else gaifman(_structure(g))
    if direction is None:
        direction = "to-coalgebra" if isinstance(x, ForestCover) else "to-cover"
    if direction == "to-coalgebra":
        if not isinstance(x, ForestCover):
            raise ComonadError("expected a forest cover")
        chk = verify_forest_cover(x, g)
        if not chk.ok:
            raise ComonadError(f"invalid cover: {chk.reason}")
        if x.variant == "linear":
            x = ForestCover(x.parent, x.pebbles, x.k1, x.k2, "linear-component")
        out = cover_to_coalgebra(x, RelStructure.from_graph(g))
        ok, reason = check_coalgebra(out)
    elif direction == "to-cover":
        if not isinstance(x, Coalgebra):
            raise ComonadError("expected a coalgebra")
        ok, reason = check_coalgebra(x)
        if not ok:
            raise ComonadError(f"invalid coalgebra: {reason}")
        out = coalgebra_to_cover(x)
        chk = verify_forest_cover(out, g)
        ok, reason = chk.ok, chk.reason
    else:
        raise ComonadError(f"unknown direction {direction!r}")
    if not ok:
        raise ComonadError(f"bridge produced an invalid object: {reason}")
    return out


# ---------------------------------------------------------------- coKleisli search

@dataclass
class SearchResult:
    exists: bool
    kind: str
    iso: bool
    universe_size: int
    witness: dict = field(default=None, repr=False)
    bounded: int = None

    def to_json(self):
        out = {"exists": self.exists, "kind": self.kind, "iso": self.iso, "universe_size": self.universe_size}
        if self.bounded is not None:
            out["bounded_length"] = self.bounded
        if self.witness is not None:
            out["witness_size"] = len(self.witness)
        return out


def cokleisli_search(a, b, kind, k1, k2, bound=None, iso=False, witness_limit=50000):
    """Existence of a coKleisli morphism (or isomorphism) from the universe over a to b.

    Relations only join comparable sequences (P) or positions of one sequence
    (PR), so the search runs per branch: the state is the currently active
    pebble placements on both sides and the remaining length.  A witness map
    is rebuilt for universes up to `witness_limit` and checked against the
    materialised structure.
    """
    A, B = _structure(a), _structure(b)
    ua = build_universe(A, kind, k1, k2, bound)
    if iso and A.size != B.size:
        return SearchResult(False, kind, True, len(ua))
    names = pebble_names(k1, k2)
    rels = sorted(A.relations.items())
    for name, _ in rels:
        if name not in B.relations:
            raise ComonadError(f"relation {name} missing in the target")

    def consistent(active, z):
        if iso:
            a_new, b_new = active[z]
            for _, pair in active.items():
                if pair is not None and (pair[0] == a_new) != (pair[1] == b_new):
                    return False
        placed = [w for w in active if active[w] is not None]
        for name, (arity, _) in rels:
            for t in cartesian(placed, repeat=arity):
                if z not in t:
                    continue
                ha = A.holds(name, tuple(active[w][0] for w in t))
                hb = B.holds(name, tuple(active[w][1] for w in t))
                if ha and not hb or iso and hb and not ha:
                    return False
        return True

    def key(active, left):
        return tuple(active[w] for w in names), left

    if kind == "P":
        exists, mapping = _search_p(A, B, names, ua.bound, consistent, key, iso, len(ua) <= witness_limit)
    else:
        exists, mapping = _search_pr(A, B, names, ua.bound, consistent, iso, len(ua) <= witness_limit)
    if exists and mapping is not None:
        _verify_witness(ua, B, mapping, iso)
    return SearchResult(exists, kind, iso, len(ua), mapping, ua.bound if kind == "PR" else None)


def _legal_next(names, active):
    for z in names:
        if z.startswith("y") and active[z] is not None:
            continue
        yield z


def _search_p(A, B, names, q, consistent, key, iso, want_witness):

    @lru_cache(maxsize=None)
    def win(state):
        pairs, left = state
        if left == 0:
            return True
        active = dict(zip(names, pairs))
        for z in _legal_next(names, active):
            if iso:
                allowed = [{b for b in range(B.size) if ok(active, z, a, b, left)} for a in range(A.size)]
                if not _perfect_matching(allowed, A.size):
                    return False
            else:
                for a in range(A.size):
                    if not any(ok(active, z, a, b, left) for b in range(B.size)):
                        return False
        return True

    def ok(active, z, a, b, left):
        nxt = dict(active)
        nxt[z] = (a, b)
        return consistent(nxt, z) and win(key(nxt, left - 1))

    start = {z: None for z in names}
    if not win(key(start, q)):
        return False, None
    if not want_witness:
        return True, None
    mapping = {}

    def build(prefix, active, left):
        if left == 0:
            return
        for z in _legal_next(names, active):
            if iso:
                allowed = [[b for b in range(B.size) if ok(active, z, a, b, left)] for a in range(A.size)]
                choice = _matching(allowed, A.size)
            else:
                choice = [next(b for b in range(B.size) if ok(active, z, a, b, left)) for a in range(A.size)]
            for a in range(A.size):
                e = prefix + ((z, a),)
                mapping[e] = choice[a]
                nxt = dict(active)
                nxt[z] = (a, choice[a])
                build(e, nxt, left - 1)

    build((), start, q)
    return True, mapping


def _matching(allowed, n):
    match = [-1] * n

    def augment(v, seen):
        for w in allowed[v]:
            if w in seen:
                continue
            seen.add(w)
            if match[w] < 0 or augment(match[w], seen):
                match[w] = v
                return True
        return False

    for v in range(n):
        augment(v, set())
    out = [None] * n
    for w, v in enumerate(match):
        out[v] = w
    return out


def _pr_signature(S, seq, with_identity):
    """Relation tuples (over positions) holding inside one sequence."""
    n = len(seq)
    out = []
    names = sorted(S.relations) + (["I"] if with_identity else [])
    for name in names:
        arity = 2 if name == "I" else S.relations[name][0]
        for idx in cartesian(range(1, n + 1), repeat=arity):
            t = tuple((seq, i) for i in idx)
            if _holds("PR", S, None if name == "I" else name, t):
                out.append((name, idx))
    return frozenset(out)


def _search_pr(A, B, names, length, consistent, iso, want_witness):
    mapping = {} if want_witness else None
    for n in range(1, length + 1):
        for zs in _pebble_words(names, n):
            if iso:
                # a bijection on the sequences with this pebble word that keeps every relation
                groups = {}
                for S, side in ((A, 0), (B, 1)):
                    for vals in cartesian(range(S.size), repeat=n):
                        seq = tuple(zip(zs, vals))
                        groups.setdefault(_pr_signature(S, seq, True), ([], []))[side].append(vals)
                for left, right in groups.values():
                    if len(left) != len(right):
                        return False, None
                    if mapping is not None:
                        for va, vb in zip(left, right):
                            seq = tuple(zip(zs, va))
                            for i in range(n):
                                mapping[(seq, i + 1)] = vb[i]
                continue
            for vals in cartesian(range(A.size), repeat=n):
                img = _pr_image(names, zs, vals, B, consistent)
                if img is None:
                    return False, None
                if mapping is not None:
                    seq = tuple(zip(zs, vals))
                    for i in range(n):
                        mapping[(seq, i + 1)] = img[i]
    return True, mapping


def _pebble_words(names, n):
    def rec(prefix, used):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for z in names:
            if z not in used:
                yield from rec(prefix + [z], used | {z} if z.startswith("y") else used)

    yield from rec([], frozenset())


def _pr_image(names, zs, vals, B, consistent):
    """Images b_1..b_n for one sequence such that every step keeps the active placements consistent."""
    n = len(zs)

    def rec(i, active, acc):
        if i == n:
            return list(acc)
        for b in range(B.size):
            nxt = dict(active)
            nxt[zs[i]] = (vals[i], b)
            if consistent(nxt, zs[i]):
                acc.append(b)
                out = rec(i + 1, nxt, acc)
                if out is not None:
                    return out
                acc.pop()
        return None

    return rec(0, {z: None for z in names}, [])


def _verify_witness(ua, B, mapping, iso):
    """Re-check a witness against the materialised universe structure."""
    if set(mapping) != set(ua.elements):
        raise ComonadError("witness is not total")
    names = list(ua.base.relations) + (["I"] if iso else [])
    for name in names:
        for t in ua.relation_tuples(name, with_identity=iso):
            vals = tuple(mapping[e] for e in t)
            good = len(set(vals)) == 1 if name == "I" else B.holds(name, vals)
            if not good:
                raise ComonadError(f"witness breaks {name} at {t}")
    if iso:
        # the coextension must be a bijection onto the universe over B whose inverse also preserves relations
        ub = build_universe(B, ua.kind, ua.k1, ua.k2, ua.bound)
        image = {_coextend_one(mapping.__getitem__, e): e for e in ua.elements}
        if len(image) != len(ub) or set(image) != set(ub.elements):
            raise ComonadError("witness coextension is not a bijection")
        for name in names:
            for t in ub.relation_tuples(name, with_identity=True):
                if not ua.holds(name, tuple(image[e] for e in t), with_identity=True):
                    raise ComonadError(f"inverse breaks {name} at {t}")
