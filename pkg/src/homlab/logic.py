"""Counting logic with pebble variables (x1.., y1..) and tally variables (w1..).

Formulas are interned immutable nodes.  Kinds:

    true, false, eq(a, b), rel(name, vars), not(f), and(fs), or(fs),
    count(n, z, f)      at least n values of z satisfy f
    tuples(n, ws, f)    exactly n assignments of the tally variables ws satisfy f
    decomp(z, zero, parts, m, n)
                        the elimination step of the tree-shaped count formula,
                        kept implicit; `expand` spells it out as or/and/count

Surface syntax is S-expressions, e.g. ``(exists x1 (and (= x1 w1) (E x1 x2)))``.
"""
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product as cartesian

from .decomp import ConstructionTree, verify_construction_tree
from .graphs import (Graph, LabeledGraph, PebbleAlphabet, RelStructure, enumerate_graphs, loopless_product,
                     pebble_key, relabel)
from .homcount import LinComb, hom_count, interpolation_coefficients


class FormulaSyntaxError(ValueError):
    def __init__(self, msg, pos):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


class FragmentError(ValueError):
    pass


class EvaluationError(ValueError):
    pass


def is_tally(v):
    return v.startswith("w")


# ---------------------------------------------------------------- nodes

class Formula:
    __slots__ = ("kind", "args", "_hash", "_free", "_quant", "__weakref__")
    _table = {}

    def __new__(cls, kind, *args):
        key = (kind, args)
        node = cls._table.get(key)
        if node is None:
            node = object.__new__(cls)
            node.kind = kind
            node.args = args
            node._hash = hash(key)
            node._free = None
            node._quant = None
            cls._table[key] = node
        return node

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __reduce__(self):
        return (Formula, (self.kind,) + self.args)

    @property
    def free(self):
        if self._free is None:
            self._free = frozenset(_free(self))
        return self._free

    @property
    def has_quantifier(self):
        if self._quant is None:
            k = self.kind
            if k in ("count", "tuples", "decomp"):
                self._quant = True
            elif k == "not":
                self._quant = self.args[0].has_quantifier
            elif k in ("and", "or"):
                self._quant = any(f.has_quantifier for f in self.args)
            else:
                self._quant = False
        return self._quant

    def __repr__(self):
        text = to_sexpr(self, limit=200)
        return f"Formula({text})"


def _free(f):
    k, a = f.kind, f.args
    if k in ("true", "false"):
        return set()
    if k == "eq":
        return set(a)
    if k == "rel":
        return set(a[1])
    if k == "not":
        return set(a[0].free)
    if k in ("and", "or"):
        out = set()
        for g in a:
            out |= g.free
        return out
    if k == "count":
        return set(a[2].free) - {a[1]}
    if k == "tuples":
        return set(a[2].free) - set(a[1])
    if k == "decomp":
        z, zero, parts = a[0], a[1], a[2]
        out = set(zero.free)
        for _, g in parts:
            out |= g.free
        return out - {z}
    raise ValueError(k)


TRUE = Formula("true")
FALSE = Formula("false")


def Eq(a, b):
    return Formula("eq", a, b)


def Rel(name, *vs):
    return Formula("rel", name, tuple(vs))


def E(a, b):
    return Rel("E", a, b)


def Not(f):
    if f is TRUE:
        return FALSE
    if f is FALSE:
        return TRUE
    return Formula("not", f)


def And(*fs):
    out = []
    for f in fs:
        if f is FALSE:
            return FALSE
        if f is TRUE:
            continue
        out.extend(f.args if f.kind == "and" else [f])
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return Formula("and", *out)


def Or(*fs):
    out = []
    for f in fs:
        if f is TRUE:
            return TRUE
        if f is FALSE:
            continue
        out.extend(f.args if f.kind == "or" else [f])
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Formula("or", *out)


def Count(n, z, f):
    if n <= 0:
        return TRUE
    return Formula("count", n, z, f)


def Exists(z, f):
    return Count(1, z, f)


def Forall(z, f):
    return Not(Exists(z, Not(f)))


def CountEq(c, z, f):
    """Exactly c values, written as at-least-c and not at-least-(c+1)."""
    return And(Count(c, z, f), Not(Count(c + 1, z, f)))


def Guarded(z, w, f):
    return Exists(z, And(Eq(z, w), f))


def Tuples(n, ws, f):
    return Formula("tuples", n, tuple(ws), f)


def _guard(f):
    """(z, w, body) if f is a guarded quantifier, else None."""
    if f.kind != "count" or f.args[0] != 1:
        return None
    z, body = f.args[1], f.args[2]
    parts = body.args if body.kind == "and" else (body,)
    if not parts or parts[0].kind != "eq":
        return None
    a, b = parts[0].args
    w = b if a == z else a if b == z else None
    if w is None or w == z or not is_tally(w):
        return None
    return z, w, And(*parts[1:])


# ---------------------------------------------------------------- S-expressions

_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def _tokens(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise FormulaSyntaxError("unexpected character", pos)
        tok = m.group(1) or m.group(2) or m.group(3)
        if tok:
            out.append((tok, m.start(m.lastindex)))
        pos = m.end()
    return out


def _tree(tokens):
    stack = [[]]
    opens = []
    for tok, pos in tokens:
        if tok == "(":
            stack.append([])
            opens.append(pos)
        elif tok == ")":
            if len(stack) == 1:
                raise FormulaSyntaxError("unbalanced ')'", pos)
            done = stack.pop()
            opens.pop()
            stack[-1].append((done, pos))
        else:
            stack[-1].append((tok, pos))
    if len(stack) != 1:
        raise FormulaSyntaxError("unclosed '('", opens[-1])
    if len(stack[0]) != 1:
        where = stack[0][1][1] if len(stack[0]) > 1 else 0
        raise FormulaSyntaxError("expected exactly one formula", where)
    return stack[0][0]


def _int(item):
    tok, pos = item
    if isinstance(tok, list) or not tok.isdigit():
        raise FormulaSyntaxError("expected a natural number", pos)
    return int(tok)


def _var(item):
    tok, pos = item
    if isinstance(tok, list) or not re.fullmatch(r"[a-z][a-z0-9_]*", tok):
        raise FormulaSyntaxError("expected a variable", pos)
    return tok


def _build(item):
    tok, pos = item
    if not isinstance(tok, list):
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        raise FormulaSyntaxError(f"unexpected atom {tok!r}", pos)
    if not tok:
        raise FormulaSyntaxError("empty list", pos)
    head, hpos = tok[0]
    rest = tok[1:]
    if isinstance(head, list):
        raise FormulaSyntaxError("operator expected", hpos)

    def arity(k):
        if len(rest) != k:
            raise FormulaSyntaxError(f"{head} takes {k} arguments", hpos)

    if head == "=":
        arity(2)
        return Eq(_var(rest[0]), _var(rest[1]))
    if head == "not":
        arity(1)
        return Not(_build(rest[0]))
    if head == "and":
        return And(*[_build(r) for r in rest])
    if head == "or":
        return Or(*[_build(r) for r in rest])
    if head == "exists":
        arity(2)
        return Exists(_var(rest[0]), _build(rest[1]))
    if head == "forall":
        arity(2)
        return Forall(_var(rest[0]), _build(rest[1]))
    if head == "count>=":
        arity(3)
        return Count(_int(rest[0]), _var(rest[1]), _build(rest[2]))
    if head == "count=":
        arity(3)
        return CountEq(_int(rest[0]), _var(rest[1]), _build(rest[2]))
    if head == "count-tuples":
        arity(3)
        ws, wpos = rest[1]
        if not isinstance(ws, list):
            raise FormulaSyntaxError("expected a list of tally variables", wpos)
        names = [_var(w) for w in ws]
        for w, (_, p) in zip(names, ws):
            if not is_tally(w):
                raise FormulaSyntaxError(f"{w} is not a tally variable", p)
        return Tuples(_int(rest[0]), names, _build(rest[2]))
    if re.fullmatch(r"[A-Z][A-Za-z0-9_]*", head):
        return Rel(head, *[_var(r) for r in rest])
    raise FormulaSyntaxError(f"unknown operator {head!r}", hpos)


def parse(text):
    return _build(_tree(_tokens(text)))


def to_sexpr(f, limit=None):
    out = []
    budget = [limit]

    def emit(s):
        out.append(s)
        if budget[0] is not None:
            budget[0] -= len(s)
            if budget[0] < 0:
                raise _Truncated

    def rec(f):
        k, a = f.kind, f.args
        if k in ("true", "false"):
            emit(k)
        elif k == "eq":
            emit(f"(= {a[0]} {a[1]})")
        elif k == "rel":
            emit("(" + " ".join((a[0],) + a[1]) + ")")
        elif k in ("not", "and", "or"):
            emit(f"({k}")
            for g in a:
                emit(" ")
                rec(g)
            emit(")")
        elif k == "count":
            emit(f"(exists {a[1]} " if a[0] == 1 else f"(count>= {a[0]} {a[1]} ")
            rec(a[2])
            emit(")")
        elif k == "tuples":
            emit(f"(count-tuples {a[0]} ({' '.join(a[1])}) ")
            rec(a[2])
            emit(")")
        elif k == "decomp":
            rec(expand(f, shallow=True))

    try:
        rec(f)
    except _Truncated:
        return "".join(out)[:limit] + " ..."
    return "".join(out)


class _Truncated(Exception):
    pass


# ---------------------------------------------------------------- evaluation

def _environment(g, assignment):
    if isinstance(g, Graph):
        g = LabeledGraph(g)
    if isinstance(g, LabeledGraph):
        size, holds = g.n, (lambda name, t: name == "E" and len(t) == 2 and g.graph.has_edge(*t))
        env = dict(g.labels)
    elif isinstance(g, RelStructure):
        size, holds = g.size, (lambda name, t: name in g.relations and g.holds(name, t))
        env = {}
    else:
        raise TypeError("evaluate needs a graph, labeled graph or relational structure")
    env.update(assignment or {})
    return size, holds, env


def evaluate(f, g, assignment=None):
    """Truth of f in g under g's labels plus `assignment` (variable -> element)."""
    size, holds, env = _environment(g, assignment)
    missing = f.free - set(env)
    if missing:
        raise EvaluationError(f"free variables {sorted(missing)} are not assigned")
    return _Evaluator(size, holds).truth(f, env)


def count_solutions(f, g, ws, assignment=None):
    """Number of assignments to the tally variables ws (over the universe) satisfying f."""
    size, holds, env = _environment(g, assignment)
    missing = f.free - set(env) - set(ws)
    if missing:
        raise EvaluationError(f"free variables {sorted(missing)} are not assigned")
    return _Evaluator(size, holds).count(f, env, tuple(ws))


class _Evaluator:
    def __init__(self, size, holds):
        self.size = size
        self.holds = holds
        self.memo = {}
        self.cmemo = {}

    def _key(self, f, env, extra=()):
        return (f, tuple(env[v] for v in sorted(f.free - set(extra))), extra)

    def truth(self, f, env):
        k, a = f.kind, f.args
        if k == "true":
            return True
        if k == "false":
            return False
        if k == "eq":
            return env[a[0]] == env[a[1]]
        if k == "rel":
            return self.holds(a[0], tuple(env[v] for v in a[1]))
        if k == "not":
            return not self.truth(a[0], env)
        if k == "and":
            return all(self.truth(g, env) for g in a)
        if k == "or":
            return any(self.truth(g, env) for g in a)
        key = self._key(f, env)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if k == "count":
            g = _guard(f)
            if g is not None and g[1] in env:
                z, w, body = g
                res = a[0] <= 1 and self.truth(body, {**env, z: env[w]})
            else:
                n, z, body = a
                hits = 0
                res = False
                for v in range(self.size):
                    hits += self.truth(body, {**env, z: v})
                    if hits >= n:
                        res = True
                        break
        elif k == "tuples":
            res = self.count(a[2], env, a[1]) == a[0]
        elif k == "decomp":
            res = self._decomp(f, env)
        else:
            raise ValueError(k)
        self.memo[key] = res
        return res

    def count(self, f, env, ws):
        """Assignments of ws satisfying f, by splitting sums over independent conjuncts."""
        live = tuple(w for w in ws if w in f.free)
        factor = self.size ** (len(ws) - len(live))
        if not live:
            return factor * self.truth(f, env)
        key = self._key(f, env, live)
        hit = self.cmemo.get(key)
        if hit is None:
            hit = self._count(f, env, live)
            self.cmemo[key] = hit
        return factor * hit

    def _count(self, f, env, ws):
        if f.kind == "and":
            groups = []
            for g in f.args:
                mine = {w for w in ws if w in g.free}
                if not mine:
                    if not self.truth(g, env):
                        return 0
                    continue
                groups.append((g, mine))
            owners = {}
            for i, (_, mine) in enumerate(groups):
                for w in mine:
                    owners.setdefault(w, set()).add(i)
            if all(len(o) == 1 for o in owners.values()):
                total = 1
                for g, mine in groups:
                    total *= self.count(g, env, tuple(w for w in ws if w in mine))
                    if total == 0:
                        return 0
                return total
        g = _guard(f)
        if g is not None and g[1] in ws and g[1] not in g[2].free:
            z, w, body = g
            rest = tuple(x for x in ws if x != w)
            return sum(self.count(body, {**env, z: v, w: v}, rest) for v in range(self.size))
        w, rest = ws[0], ws[1:]
        return sum(self.count(f, {**env, w: v}, rest) for v in range(self.size))

    def _decomp(self, f, env):
        z, zero, parts, m, n = f.args
        nonzero = sum(not self.truth(zero, {**env, z: v}) for v in range(self.size))
        if nonzero > n:
            return False
        hits = []
        for value, g in parts:
            c = sum(self.truth(g, {**env, z: v}) for v in range(self.size))
            if c:
                hits.append((value, c))
        # some sub-family of the observed multiplicities must realise one decomposition
        def search(i, total, used):
            if total == m and used == nonzero:
                return True
            if i == len(hits) or used >= nonzero or total >= m:
                return False
            value, c = hits[i]
            if used + c <= nonzero and total + c * value <= m and search(i + 1, total + c * value, used + c):
                return True
            return search(i + 1, total, used)

        return m > 0 and search(0, 0, 0)


# ---------------------------------------------------------------- analysis

@dataclass
class FragmentReport:
    free: frozenset
    requantified: frozenset
    restricted_conjunction: bool
    quantifier_rank: int
    fragments: dict = field(default_factory=dict)


def _walk(f):
    """(requantified, bound, free occurrences, restricted, qr) over the DAG, memoized per bound context."""
    memo = {}

    def rec(f, bound):
        key = (f, bound)
        if key in memo:
            return memo[key]
        k, a = f.kind, f.args
        req, bnd, occ, ok, qr = set(), set(), set(), True, 0
        if k in ("true", "false"):
            pass
        elif k in ("eq", "rel"):
            vs = a if k == "eq" else a[1]
            occ = {v for v in vs if v not in bound}
        elif k in ("not", "and", "or"):
            if k == "and":
                heavy = [g for g in a if g.has_quantifier and g.free]
                ok = len(heavy) <= 1
            for g in a:
                r = rec(g, bound)
                req |= r[0]
                bnd |= r[1]
                occ |= r[2]
                ok = ok and r[3]
                qr = max(qr, r[4])
        else:
            if k == "count":
                zs, subs, step = (a[1],), (a[2],), 1
            elif k == "tuples":
                zs, subs, step = a[1], (a[2],), 0
            else:
                zs, subs, step = (a[0],), (a[1],) + tuple(g for _, g in a[2]), 1
            req |= {z for z in zs if z in bound}
            bnd |= set(zs)
            inner = bound | frozenset(zs)
            for g in subs:
                r = rec(g, inner)
                req |= r[0]
                bnd |= r[1]
                occ |= r[2]
                ok = ok and r[3]
                qr = max(qr, r[4] + step)
        out = (frozenset(req), frozenset(bnd), frozenset(occ), ok, qr)
        memo[key] = out
        return out

    return rec(f, frozenset())


def _noncounting(f):
    """Grammar check for the non-counting formulas of the restricted-conjunction logic."""
    k = f.kind
    if k in ("true", "false", "eq", "rel"):
        return True
    if k == "not":
        return f.args[0].kind in ("eq", "rel")
    if k in ("and", "or"):
        return all(_noncounting(g) for g in f.args)
    if k == "count":
        g = _guard(f)
        return g is not None and g[1] not in g[2].free and _noncounting(g[2])
    return False


def _counting_sentence(f):
    if f.kind == "or":
        return all(_counting_sentence(g) for g in f.args)
    return f.kind == "tuples" and _noncounting(f.args[2]) and not f.free


def _positive(f, restricted):
    k = f.kind
    if k in ("true", "false", "eq", "rel"):
        return True
    if k in ("and", "or"):
        if restricted and k == "and" and sum(1 for g in f.args if g.has_quantifier and g.free) > 1:
            return False
        return all(_positive(g, restricted) for g in f.args)
    if k == "count":
        return f.args[0] == 1 and _positive(f.args[2], restricted)
    return False


def analyze(f, alphabet, q=None):
    if isinstance(alphabet, tuple):
        alphabet = PebbleAlphabet(*alphabet)
    req, bound, occ, ok, qr = _walk(f)
    names = set(bound) | set(occ) | set(f.free)
    for v in names:
        if not is_tally(v) and v not in alphabet:
            raise FragmentError(f"variable {v} is not in {alphabet!r}")
    pebble_req = frozenset(v for v in (req | (bound & occ)) if not is_tally(v))
    only_x = all(v.startswith("x") for v in pebble_req)
    tally = any(is_tally(v) for v in names)
    frag = {}
    frag["C"] = only_x and not tally
    frag["andC"] = only_x and ok and _counting_sentence(f)
    frag["andC_noncounting"] = only_x and ok and _noncounting(f)
    frag["EP"] = only_x and not tally and _positive(f, False)
    frag["EP_restricted"] = frag["EP"] and _positive(f, True)
    if q is not None:
        frag["C_q"] = frag["C"] and qr <= q
        frag["EP_q"] = frag["EP"] and qr <= q
        frag["EP_restricted_q"] = frag["EP_restricted"] and qr <= q
    return FragmentReport(f.free, frozenset(sorted(pebble_req, key=pebble_key)), ok, qr, frag)


# ---------------------------------------------------------------- normal form

def _dnf(f):
    """Disjuncts (pointwise equivalent) of a non-counting formula, each without disjunction."""
    k = f.kind
    if k == "false":
        return []
    if k in ("true", "eq", "rel"):
        return [f]
    if k == "not":
        return _dnf_not(f.args[0])
    if k == "or":
        out = []
        for g in f.args:
            out += _dnf(g)
        return out
    if k == "and":
        acc = [TRUE]
        for g in f.args:
            acc = [And(a, b) for a in acc for b in _dnf(g)]
            acc = [a for a in acc if a is not FALSE]
        return acc
    g = _guard(f)
    if g is not None:
        z, w, body = g
        return [Guarded(z, w, d) for d in _dnf(body)]
    if k == "count" and f.args[0] == 1:
        return [Exists(f.args[1], d) for d in _dnf(f.args[2])]
    raise FragmentError(f"not a non-counting formula: {to_sexpr(f, 80)}")


def _dnf_not(f):
    k = f.kind
    if k == "true":
        return []
    if k == "false":
        return [TRUE]
    if k in ("eq", "rel"):
        return [Not(f)]
    if k == "not":
        return _dnf(f.args[0])
    if k == "and":
        return _dnf(Or(*[Not(g) for g in f.args]))
    if k == "or":
        return _dnf(And(*[Not(g) for g in f.args]))
    g = _guard(f)
    if g is not None:
        # a guarded quantifier has exactly one witness, so negation passes through it
        z, w, body = g
        return [Guarded(z, w, d) for d in _dnf_not(body)]
    raise FragmentError(f"not a non-counting formula: {to_sexpr(f, 80)}")


def primitive_disjuncts(f):
    """Split a non-counting formula into disjunction-free, pointwise equivalent disjuncts."""
    return _dnf(f)


def _pull_y(chi):
    """Remove guarded y-quantifiers from chi; returns (guards, rest)."""
    guards = []

    def rec(f):
        k = f.kind
        if k == "and":
            return And(*[rec(g) for g in f.args])
        g = _guard(f)
        if g is not None:
            z, w, body = g
            inner = rec(body)
            if z.startswith("y"):
                guards.append((z, w))
                return inner
            return Guarded(z, w, inner)
        return f

    rest = rec(chi)
    seen = set()
    for z, _ in guards:
        if z in seen:
            raise FragmentError(f"{z} is quantified twice")
        seen.add(z)
    return guards, rest


def to_primitive_normal_form(f):
    """Disjunction of sentences (count-tuples n ws (exists y.. (= y w) .. chi)) with chi quantifying x's only.

    Exact tuple counting does not distribute over a disjunction, so a counted
    block whose body splits into several primitive disjuncts is rejected.
    """
    blocks = f.args if f.kind == "or" else (f,)
    out = []
    for b in blocks:
        if b.kind != "tuples":
            # a plain sentence holds iff the empty tuple is counted once
            b = Tuples(1, (), b)
        n, ws, body = b.args
        if b.free or not (_noncounting(body) or (not ws and _existential(body))):
            raise FragmentError("expected a disjunction of counted sentences over non-counting bodies")
        req, bound, occ, _, _ = _walk(b)
        bad = [v for v in (req | (bound & occ)) if v.startswith("y")]
        if bad:
            raise FragmentError(f"non-reusable variables requantified: {sorted(bad)}")
        if not ws:
            if n > 1:
                out.append(Tuples(1, (), FALSE))
                continue
            parts = _dnf(body) if n == 1 else _dnf_not(body)
            n = 1
        else:
            parts = _dnf(body)
        if not parts:
            out.append(Tuples(n, ws, FALSE))
            continue
        if len(parts) > 1 and ws:
            raise FragmentError("a counted block over a disjunction has no primitive form")
        if len(parts) > 1:
            out.extend(to_primitive_normal_form(Tuples(1, (), p)) for p in parts)
            continue
        # y's are never requantified, so no other conjunct mentions them and the guards commute outwards
        guards, chi = _pull_y(parts[0])
        core = chi
        for z, w in sorted(guards, key=lambda t: pebble_key(t[0]), reverse=True):
            core = Guarded(z, w, core)
        out.append(Tuples(n, ws, core))
    return Or(*out)


def _existential(f):
    """Non-counting formula that may also use plain existential quantifiers."""
    k = f.kind
    if k in ("true", "false", "eq", "rel"):
        return True
    if k == "not":
        return f.args[0].kind in ("eq", "rel")
    if k in ("and", "or"):
        return all(_existential(g) for g in f.args)
    return k == "count" and f.args[0] == 1 and _existential(f.args[2])


def is_primitive(f):
    """Counted sentence whose body has no disjunction and no sentence conjuncts."""
    def prim(g):
        k = g.kind
        if k in ("true", "false", "eq", "rel"):
            return True
        if k == "not":
            return g.args[0].kind in ("eq", "rel")
        if k == "or":
            return False
        if k == "and":
            return all(prim(h) and h.free for h in g.args)
        gd = _guard(g)
        return gd is not None and prim(gd[2])

    return f.kind == "tuples" and _noncounting(f.args[2]) and prim(f.args[2])


# ---------------------------------------------------------------- expansion

def expand(f, shallow=False):
    """Spell out implicit elimination steps as or/and/count (can be very large)."""
    if f.kind == "decomp":
        z, zero, parts, m, n = f.args
        table = dict(parts)
        disj = []
        for decomp in _decompositions(m, sorted(table), n):
            c = sum(ci for ci, _ in decomp)
            conj = [CountEq(c, z, Not(zero))] + [CountEq(ci, z, table[mi]) for ci, mi in decomp]
            disj.append(And(*conj))
        out = Or(*disj)
        return out if shallow else expand(out)
    if shallow or f.kind in ("true", "false", "eq", "rel"):
        return f
    k, a = f.kind, f.args
    if k == "not":
        return Not(expand(a[0]))
    if k == "and":
        return And(*[expand(g) for g in a])
    if k == "or":
        return Or(*[expand(g) for g in a])
    if k == "count":
        return Count(a[0], a[1], expand(a[2]))
    if k == "tuples":
        return Tuples(a[0], a[1], expand(a[2]))
    raise ValueError(k)


def _decompositions(m, values, n):
    """Ways to write m = sum c_i m_i with distinct m_i from values (> 0) and sum c_i <= n."""
    values = [v for v in values if v > 0]
    out = []

    def rec(i, left, room, acc):
        if left == 0:
            out.append(tuple(acc))
            return
        if i == len(values) or room == 0:
            return
        v = values[i]
        for c in range(min(room, left // v), 0, -1):
            acc.append((c, v))
            rec(i + 1, left - c * v, room - c, acc)
            acc.pop()
        rec(i + 1, left, room, acc)

    rec(0, m, n, [])
    return out


def _usable_parts(m, values, n):
    """Values that occur in at least one decomposition of m."""
    values = sorted(v for v in values if 0 < v <= m)
    # reach[k][s]: sums s reachable with multiplicity total k using a prefix/suffix of values
    def reach(vals):
        table = [{(0, 0)}]
        for v in vals:
            cur = set(table[-1])
            for s, k in table[-1]:
                for c in range(1, n - k + 1):
                    if s + c * v > m:
                        break
                    cur.add((s + c * v, k + c))
            table.append(cur)
        return table

    pre = reach(values)
    suf = reach(values[::-1])[::-1]
    used = set()
    for i, v in enumerate(values):
        after = {}
        for s, k in suf[i + 1]:
            after.setdefault(s, []).append(k)
        for s, k in pre[i]:
            for c in range(1, n - k + 1):
                tot = s + c * v
                if tot > m:
                    break
                if any(k + c + k2 <= n for k2 in after.get(m - tot, ())):
                    used.add(v)
                    break
            if v in used:
                break
    return used


# ---------------------------------------------------------------- graphs to formulas

def _leaf_formula(g):
    """Atomic diagram of a fully labeled graph: equal labels and edges between labels."""
    rep = {}
    parts = []
    for z, v in g.labels.items():
        if v in rep:
            parts.append(Eq(rep[v], z))
        else:
            rep[v] = z
    for u, v in g.graph.edges:
        parts.append(E(rep[u], rep[v]))
    return And(*parts)


def _alphabet_of(labels):
    k1 = max([int(z[1:]) for z in labels if z.startswith("x")] or [0])
    k2 = max([int(z[1:]) for z in labels if z.startswith("y")] or [0])
    return k1, k2


def _check_tree(ct):
    labels = set()
    for p in ct.payloads:
        labels |= p.label_set
    k1, k2 = _alphabet_of(labels)
    chk = verify_construction_tree(ct, ct.target(), max(k1, 1) if k1 + k2 == 0 else k1, k2)
    if not chk.ok:
        raise FragmentError(f"invalid construction tree: {chk.reason}")
    return chk


def formula_from_construction(ct, m, bounded_q=False, n=None):
    """Formula true in a labeled graph G exactly when hom(target, G) = m.

    Without `bounded_q` the tree must be a caterpillar and the result is a
    counted sentence over guarded quantifiers.  With `bounded_q` the result
    uses counting quantifiers with rank at most the elimination depth; it is
    exact on graphs with at most n vertices.
    """
    _check_tree(ct)
    if not bounded_q:
        if not ct.caterpillar:
            raise FragmentError("the restricted-conjunction formula needs a caterpillar")
        order = [t for t in _preorder(ct) if ct.tags[t] == "elim"]
        tally = {t: f"w{i + 1}" for i, t in enumerate(order)}

        def phi(t):
            kids = ct.children(t)
            if not kids:
                return _leaf_formula(ct.payloads[t])
            if len(kids) == 1:
                z = ct.eliminated[t]
                return Guarded(z, tally[t], phi(kids[0]))
            # the quantified child goes last so conjunctions read left to right
            kids = sorted(kids, key=lambda s: bool(ct.children(s)))
            return And(*[phi(s) for s in kids])

        return Tuples(m, [tally[t] for t in order], phi(ct.root))
    if n is None:
        raise ValueError("the counting formula needs an order bound n")
    return _TreeFormulas(ct, n).phi(("node", ct.root), m)


def _preorder(ct):
    out = []

    def rec(t):
        out.append(t)
        for s in ct.children(t):
            rec(s)

    rec(ct.root)
    return out


@lru_cache(maxsize=None)
def _test_graphs(n):
    return tuple(enumerate_graphs(n))


@lru_cache(maxsize=4096)
def achievable_values(f, n):
    """All values hom(f, G) over labeled graphs G with at most n vertices."""
    labels = list(f.labels)
    out = set()
    for g in _test_graphs(n):
        for img in cartesian(range(g.n), repeat=len(labels)):
            out.add(hom_count(f, LabeledGraph(g, dict(zip(labels, img)))))
    return frozenset(out)


class _TreeFormulas:
    """phi^t_m over construction-tree items; items are nodes or partial products of siblings."""

    def __init__(self, ct, n):
        self.ct = ct
        self.n = n
        self.memo = {}

    def graph(self, item):
        if item[0] == "node":
            return self.ct.payloads[item[1]]
        out = self.ct.payloads[item[1][0]]
        for s in item[1][1:]:
            out = loopless_product(out, self.ct.payloads[s])
            if out is None:
                return None
        return out

    def values(self, item):
        g = self.graph(item)
        return frozenset([0]) if g is None else achievable_values(g, self.n)

    def phi(self, item, m):
        key = (item, m)
        if key not in self.memo:
            self.memo[key] = self._phi(item, m)
        return self.memo[key]

    def _phi(self, item, m):
        ct = self.ct
        if item[0] == "prod":
            kids = item[1]
            left = ("prod", kids[:-1]) if len(kids) > 2 else ("node", kids[0])
            right = ("node", kids[-1])
            return self._product(left, right, m)
        t = item[1]
        kids = ct.children(t)
        if not kids:
            base = _leaf_formula(ct.payloads[t])
            return base if m == 1 else Not(base) if m == 0 else FALSE
        if len(kids) > 1:
            if len(kids) == 2:
                return self._product(("node", kids[0]), ("node", kids[1]), m)
            return self._phi(("prod", tuple(kids)), m)
        s = ("node", kids[0])
        z = ct.eliminated[t]
        zero = self.phi(s, 0)
        if m == 0:
            return Forall(z, zero)
        vals = self.values(s)
        usable = _usable_parts(m, vals, self.n)
        if not usable:
            return FALSE
        parts = tuple((v, self.phi(s, v)) for v in sorted(usable))
        return Formula("decomp", z, zero, parts, m, self.n)

    def _product(self, left, right, m):
        if m == 0:
            return Or(self.phi(left, 0), self.phi(right, 0))
        lv, rv = self.values(left), self.values(right)
        disj = []
        for a in sorted(lv):
            if a and m % a == 0 and m // a in rv:
                disj.append(And(self.phi(left, a), self.phi(right, m // a)))
        return Or(*disj)


# ---------------------------------------------------------------- formulas to combinations

class _Term:
    """A labeled graph together with a construction tree that certifies it."""

    __slots__ = ("graph", "tree")

    def __init__(self, graph, tree):
        self.graph = graph
        self.tree = tree


def _leaf(g):
    return ConstructionTree([-1], ["leaf"], [g])


def _graft(parent_tag, trees, payload, eliminated=None, caterpillar=False):
    parent, tags, payloads, elim = [-1], [parent_tag], [payload], {}
    if eliminated is not None:
        elim[0] = eliminated
    for tr in trees:
        off = len(parent)
        for i, p in enumerate(tr.parent):
            parent.append(0 if p == -1 else p + off)
        tags.extend(tr.tags)
        payloads.extend(tr.payloads)
        for t, z in tr.eliminated.items():
            elim[t + off] = z
    return ConstructionTree(parent, tags, payloads, elim, caterpillar)


class _Combo:
    """Linear combination of certified terms, merged by exact labeled-graph equality."""

    def __init__(self, items=()):
        self.items = {}
        for c, term in items:
            self.add(c, term)

    def add(self, c, term):
        if c == 0:
            return
        key = term.graph
        if key in self.items:
            c0, t0 = self.items[key]
            if c0 + c == 0:
                del self.items[key]
            else:
                self.items[key] = (c0 + c, t0)
        else:
            self.items[key] = (Fraction(c), term)

    def terms(self):
        return list(self.items.values())

    def scale(self, k):
        return _Combo((k * c, t) for c, t in self.terms())

    def plus(self, other):
        out = _Combo(self.terms())
        for c, t in other.terms():
            out.add(c, t)
        return out

    def times(self, other, caterpillar):
        out = _Combo()
        for c, a in self.terms():
            for d, b in other.terms():
                t = _term_product(a, b, caterpillar)
                if t is not None:
                    out.add(c * d, t)
        return out

    def delete(self, z):
        out = _Combo()
        for c, t in self.terms():
            g = t.graph
            if z not in g.labels:
                # summing over an unused variable multiplies by the order
                pin = _Term(LabeledGraph(Graph(1), {z: 0}), _leaf(LabeledGraph(Graph(1), {z: 0})))
                t = _term_product(t, pin, True)
                g = t.graph
            h = relabel(g, z, None)
            out.add(c, _Term(h, _graft("elim", [t.tree], h, z, t.tree.caterpillar)))
        return out

    def to_lincomb(self):
        return LinComb([(c, t.graph) for c, t in self.terms()])


def _fully_labeled_leaf(t):
    return len(t.tree) == 1 and t.graph.is_fully_labeled()


def _term_product(a, b, caterpillar):
    g = loopless_product(a.graph, b.graph)
    if g is None:
        return None
    if _fully_labeled_leaf(a) and _fully_labeled_leaf(b):
        return _Term(g, _leaf(g))
    if caterpillar:
        if _fully_labeled_leaf(a):
            a, b = b, a
        if not _fully_labeled_leaf(b):
            raise FragmentError("product of two quantified parts leaves the caterpillar class")
    return _Term(g, _graft("product", [a.tree, b.tree], g, None, caterpillar))


def _identity(labels, caterpillar=False):
    """Vertex-only graph with one vertex per label; hom into anything is 1."""
    labels = sorted(labels, key=pebble_key)
    g = LabeledGraph(Graph(len(labels)), {z: i for i, z in enumerate(labels)})
    tree = _leaf(g)
    tree.caterpillar = caterpillar
    return _Term(g, tree)


def _atom(f, caterpillar):
    if f.kind == "eq":
        a, b = f.args
        g = LabeledGraph(Graph(1), {a: 0, b: 0})
    elif f.kind == "rel":
        name, vs = f.args
        if name != "E" or len(vs) != 2:
            raise FragmentError(f"only the binary edge relation has a graph form, got {name}/{len(vs)}")
        if vs[0] == vs[1]:
            return _Combo()
        g = LabeledGraph(Graph(2, [(0, 1)]), {vs[0]: 0, vs[1]: 1})
    elif f.kind == "true":
        return _Combo([(1, _identity((), caterpillar))])
    elif f.kind == "false":
        return _Combo()
    else:
        raise ValueError(f.kind)
    tree = _leaf(g)
    tree.caterpillar = caterpillar
    return _Combo([(1, _Term(g, tree))])


def _path_combo(f):
    k = f.kind
    if k in ("eq", "rel", "true", "false"):
        return _atom(f, True)
    if k == "not":
        inner = f.args[0]
        if inner.kind not in ("eq", "rel"):
            raise FragmentError("negation of a non-atomic formula")
        return _path_combo(inner).scale(-1).plus(_Combo([(1, _identity(inner.free, True))]))
    if k == "and":
        acc = _Combo([(1, _identity((), True))])
        quantified = [g for g in f.args if g.has_quantifier]
        if len(quantified) > 1:
            raise FragmentError("conjunction with several quantified parts")
        # quantifier-free conjuncts first; they stay fully labeled leaves
        for g in sorted(f.args, key=lambda g: g.has_quantifier):
            acc = acc.times(_path_combo(g), True) if g.has_quantifier else _path_combo(g).times(acc, True)
        return acc
    g = _guard(f)
    if g is not None:
        z, _, body = g
        return _path_combo(body).delete(z)
    raise FragmentError(f"not a primitive non-counting formula: {to_sexpr(f, 80)}")


def _interpolate(combo, labels, s_minus, s_plus, caterpillar=False):
    coeffs = interpolation_coefficients(s_minus, s_plus)
    one = _Combo([(1, _identity(labels))])
    out, power = _Combo(), one
    for j, c in enumerate(coeffs):
        if j:
            power = _reduce(power.times(combo, caterpillar))
        if c:
            out = out.plus(power.scale(c))
    return _reduce(out)


def _reduce(combo):
    """Merge terms with labeled-isomorphic graphs."""
    from .graphs import labeled_isomorphic
    buckets = {}
    for c, t in combo.terms():
        g = t.graph
        sig = (g.n, g.graph.m, tuple(sorted(g.graph.degrees())),
               tuple((z, g.graph.degree(v)) for z, v in g.labels.items()))
        for entry in buckets.setdefault(sig, []):
            if labeled_isomorphic(entry[1].graph, g):
                entry[0] += c
                break
        else:
            buckets[sig].append([c, t])
    return _Combo((c, t) for entries in buckets.values() for c, t in entries if c != 0)


def _tree_combo(f, n):
    k = f.kind
    if k in ("eq", "rel", "true", "false"):
        return _atom(f, False)
    labels = f.free
    if k == "not":
        return _interpolate(_tree_combo(f.args[0], n), labels, [1], [0])
    if k == "or":
        acc = _Combo()
        for g in f.args:
            acc = acc.plus(_tree_combo(g, n))
        return _interpolate(acc, labels, [0], range(1, len(f.args) + 1))
    if k == "and":
        acc = _Combo([(1, _identity(()))])
        for g in f.args:
            acc = _reduce(acc.times(_tree_combo(g, n), False))
        return acc
    if k == "count":
        t, z, body = f.args
        inner = _tree_combo(body, n).delete(z)
        return _interpolate(inner, labels, range(0, t), range(t, n + 1))
    raise FragmentError(f"{k} has no tree-shaped combination")


def lincomb_from_formula(f, mode, n=None, k1=None, k2=None, q=None, verify=True):
    """Linear combination of labeled graphs whose hom counts reproduce f.

    path: f is a primitive non-counting formula and hom counts the satisfying
    tally assignments (or gives the 0/1 truth value when there are none).
    tree: f is a counting formula without tally variables; the combination
    gives the truth value on graphs of order exactly n.
    Each term carries a construction tree that is checked against (k1, k2)
    (and depth q in tree mode) when `verify` is set.
    """
    if mode == "path":
        parts = _dnf(f) if _noncounting(f) else None
        if parts is None:
            raise FragmentError("path mode needs a non-counting formula")
        if len(parts) > 1:
            raise FragmentError("path mode needs a formula without effective disjunction")
        combo = _path_combo(parts[0]) if parts else _Combo()
    elif mode == "tree":
        if n is None:
            raise ValueError("tree mode needs the order n")
        if any(is_tally(v) for v in f.free) or _uses_tuples(f):
            raise FragmentError("tree mode does not use tally variables")
        combo = _tree_combo(f, n)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if verify:
        labels = set(f.free)
        for _, t in combo.terms():
            labels |= set(t.graph.labels)
            for p in t.tree.payloads:
                labels |= set(p.labels)
        a1, a2 = _alphabet_of(labels)
        k1 = a1 if k1 is None else k1
        k2 = a2 if k2 is None else k2
        for _, t in combo.terms():
            chk = verify_construction_tree(t.tree, t.graph, k1, k2)
            if not chk.ok:
                raise FragmentError(f"term outside the class: {chk.reason}")
            if q is not None and chk.depth > q:
                raise FragmentError(f"term needs depth {chk.depth} > {q}")
    out = combo.to_lincomb()
    out.trees = {t.graph: t.tree for _, t in combo.terms()}
    return out


def _uses_tuples(f):
    if f.kind == "tuples":
        return True
    if f.kind in ("not", "and", "or"):
        return any(_uses_tuples(g) for g in f.args)
    if f.kind == "count":
        return _uses_tuples(f.args[2])
    return False
