"""Model-comparison pebble games where y-pebbles may be placed only once.

A pairing is a tuple over the pebbles (x's first, then y's) whose entries
are (a, b) pairs or None.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product as cartesian

from .graphs import Graph, RelStructure, pebble_names
from .logic import And, Eq, Guarded, Not, Rel, Tuples, to_sexpr


@dataclass
class GameVerdict:
    winner: str
    rounds: int = None
    certificate: dict = field(default_factory=dict)
    bounded: int = None

    def to_json(self):
        out = {"winner": self.winner, "rounds": self.rounds, "certificate": self.certificate}
        if self.bounded is not None and self.winner == "duplicator":
            out["up_to"] = self.bounded
        return out


def _structure(x):
    return RelStructure.from_graph(x) if isinstance(x, Graph) else x


def is_partial_hom(a, b, m, iso=False):
    """m: iterable of (a-element, b-element) pairs, or a pairing tuple with None entries."""
    pairs = [p for p in m if p is not None]
    fwd = {}
    for x, y in pairs:
        if fwd.setdefault(x, y) != y:
            return False
    if iso:
        back = {}
        for x, y in pairs:
            if back.setdefault(y, x) != x:
                return False
    a, b = _structure(a), _structure(b)
    for name, (arity, tuples) in a.relations.items():
        for t in tuples:
            if all(x in fwd for x in t) and not b.holds(name, tuple(fwd[x] for x in t)):
                return False
    if iso:
        inv = {y: x for x, y in fwd.items()}
        for name, (arity, tuples) in b.relations.items():
            for t in tuples:
                if all(y in inv for y in t) and not a.holds(name, tuple(inv[y] for y in t)):
                    return False
    return True


def _legal_pebbles(k1, k2, pairing):
    for i in range(k1):
        yield i
    for j in range(k2):
        if pairing[k1 + j] is None:
            yield k1 + j


def _place(pairing, z, pair):
    out = list(pairing)
    out[z] = pair
    return tuple(out)


def _canon(k1, pairing):
    # reusable pebbles are interchangeable
    xs = sorted(pairing[:k1], key=lambda p: (p is None, p))
    return tuple(xs) + pairing[k1:]


# ---------------------------------------------------------------- existential game

def solve_exists_pebble(a, b, k1, k2, q=None):
    """Existential (k1, k2)-pebble game; q rounds, or unbounded play if q is None."""
    if k1 + k2 < 1:
        raise ValueError("need at least one pebble")
    a, b = _structure(a), _structure(b)
    start = (None,) * (k1 + k2)
    # forward closure of Duplicator-safe positions
    states, todo = {start}, [start]
    moves = {}
    while todo:
        s = todo.pop()
        opts = []
        for z in _legal_pebbles(k1, k2, s):
            for x in range(a.size):
                resp = []
                for y in range(b.size):
                    t = _canon(k1, _place(s, z, (x, y)))
                    if is_partial_hom(a, b, t):
                        resp.append(t)
                        if t not in states:
                            states.add(t)
                            todo.append(t)
                opts.append(((z, x), resp))
        moves[s] = opts
    alive = set(states)
    rounds = 0
    limit = q if q is not None else float("inf")
    while rounds < limit:
        dead = {s for s in alive if any(not any(t in alive for t in resp) for _, resp in moves[s])}
        if not dead:
            break
        rounds += 1
        if start in dead:
            witness = next(m for m, resp in moves[start] if not any(t in alive for t in resp))
            return GameVerdict("spoiler", rounds, {"states": len(states), "first_move": _move_json(k1, k2, witness)})
        alive -= dead
    return GameVerdict("duplicator", q, {"states": len(states), "fixpoint_size": len(alive)})


def _move_json(k1, k2, move):
    z, x = move
    return {"pebble": pebble_names(k1, k2)[z], "element": x}


# ---------------------------------------------------------------- bijective game

def _perfect_matching(allowed, n):
    """allowed[v] is a set of w; True iff some bijection picks allowed pairs only."""
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

    return all(augment(v, set()) for v in range(n))


def solve_bijective_pebble(a, b, k1, k2, q):
    """q-round bijective (k1, k2)-pebble game on graphs.

    Each round Spoiler lifts a legal pebble, Duplicator answers with a
    bijection V(a) -> V(b) and Spoiler puts the pebble on some (v, f(v)).
    """
    if a.n != b.n:
        return GameVerdict("spoiler", 0, {"reason": "different orders"})
    A, B = RelStructure.from_graph(a), RelStructure.from_graph(b)
    n = a.n

    @lru_cache(maxsize=None)
    def dup(pairing, left):
        if left == 0:
            return True
        return all(answer(_place(pairing, z, None), z, left) for z in _legal_pebbles(k1, k2, pairing))

    @lru_cache(maxsize=None)
    def answer(rest, z, left):
        allowed = []
        for v in range(n):
            ok = set()
            for w in range(n):
                t = _place(rest, z, (v, w))
                if is_partial_hom(A, B, t, iso=True) and dup(_canon(k1, t), left - 1):
                    ok.add(w)
            allowed.append(ok)
        return _perfect_matching(allowed, n)

    start = (None,) * (k1 + k2)
    for r in range(1, q + 1):
        if not dup(start, r):
            return GameVerdict("spoiler", r, {})
    return GameVerdict("duplicator", q, {})


# ---------------------------------------------------------------- all-in-one games

def _pebble_sequences(k1, k2, length):
    names = list(range(k1 + k2))

    def rec(prefix, used):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        for z in names:
            if z >= k1 and z in used:
                continue
            yield from rec(prefix + [z], used | {z})

    yield from rec([], frozenset())


def _maximal_sequences(k1, k2, n_max):
    # every shorter legal sequence is a prefix of one of these
    return _pebble_sequences(k1, k2, n_max if k1 else min(k2, n_max))


def solve_all_in_one(a, b, k1, k2, n_max, bijective=False):
    """Single-round game on Spoiler sequences of length <= n_max.

    A Spoiler win comes with a witness sequence; a Duplicator win only
    holds up to n_max.
    """
    if n_max < 1:
        raise ValueError("n_max must be positive")
    if bijective:
        return _abp(a, b, k1, k2, n_max)
    A, B = _structure(a), _structure(b)
    for seq in _maximal_sequences(k1, k2, n_max):
        for elems in cartesian(range(A.size), repeat=len(seq)):
            if not _hom_response(A, B, k1 + k2, seq, elems):
                return GameVerdict("spoiler", 1, {"sequence": _seq_json(k1, k2, seq, elems), "length": len(seq)})
    return GameVerdict("duplicator", None, {"sequences_checked": "all"}, bounded=n_max)


def _seq_json(k1, k2, seq, elems=None):
    names = pebble_names(k1, k2)
    if elems is None:
        return [names[z] for z in seq]
    return [[names[z], x] for z, x in zip(seq, elems)]


def _hom_response(A, B, k, seq, elems):
    """Some answer sequence keeps every intermediate pairing a partial homomorphism."""

    def rec(i, pairing):
        if i == len(seq):
            return True
        for y in range(B.size):
            t = _place(pairing, seq[i], (elems[i], y))
            if is_partial_hom(A, B, t) and rec(i + 1, t):
                return True
        return False

    return rec(0, (None,) * k)


def _step_type(S, pairing, z):
    """Literals linking the freshly placed pebble z to every placed pebble (itself included)."""
    placed = [i for i, p in enumerate(pairing) if p is not None]
    v = pairing[z]
    eqs = tuple(pairing[i] == v for i in placed)
    rels = []
    for name, (arity, _) in sorted(S.relations.items()):
        for t in cartesian(placed, repeat=arity):
            if z in t:
                rels.append(S.holds(name, tuple(pairing[i] for i in t)))
    return tuple(placed), eqs, tuple(rels)


def _type_histograms(A, B, k1, k2, seq):
    """Histograms of step-type sequences of all element tuples, for A and B."""
    ids = {}
    out = []
    for S in (A, B):
        states = {((None,) * (k1 + k2), 0): 1}
        for z in seq:
            nxt = {}
            for (pairing, tid), c in states.items():
                for v in range(S.size):
                    p = _place(pairing, z, v)
                    key = (tid, _step_type(S, p, z))
                    t2 = ids.setdefault(key, len(ids) + 1)
                    nxt[(p, t2)] = nxt.get((p, t2), 0) + c
            states = nxt
        hist = {}
        for (_, tid), c in states.items():
            hist[tid] = hist.get(tid, 0) + c
        out.append(hist)
    back = {t: key for key, t in ids.items()}
    return out[0], out[1], back


def _type_sentence(S, k1, k2, seq, steps, count):
    """Counted sentence: exactly `count` tuples realise the step types `steps` along `seq`."""
    names = pebble_names(k1, k2)
    body = None
    for i in range(len(seq) - 1, -1, -1):
        z = seq[i]
        placed, eqs, rels = steps[i]
        lits = []
        for j, e in zip(placed, eqs):
            if j != z:
                lits.append(Eq(names[z], names[j]) if e else Not(Eq(names[z], names[j])))
        it = iter(rels)
        for name, (arity, _) in sorted(S.relations.items()):
            for t in cartesian(placed, repeat=arity):
                if z in t:
                    atom = Rel(name, *[names[j] for j in t])
                    lits.append(atom if next(it) else Not(atom))
        inner = And(*lits) if body is None else And(*lits, body)
        body = Guarded(names[z], f"w{i + 1}", inner)
    return Tuples(count, [f"w{i + 1}" for i in range(len(seq))], body)


def _abp(a, b, k1, k2, n_max):
    """Duplicator survives a pebble sequence iff some bijection on whole element tuples
    maps each tuple to one with the same sequence of atomic types, i.e. iff both
    structures have the same histogram of type sequences."""
    A, B = _structure(a), _structure(b)
    if A.size != B.size:
        return GameVerdict("spoiler", 0, {"reason": "different orders"})
    for seq in _maximal_sequences(k1, k2, n_max):
        ha, hb, back = _type_histograms(A, B, k1, k2, seq)
        if ha == hb:
            continue
        tid = min(t for t in set(ha) | set(hb) if ha.get(t, 0) != hb.get(t, 0))
        ca, cb = ha.get(tid, 0), hb.get(tid, 0)
        steps = []
        while tid:
            tid, step = back[tid]
            steps.append(step)
        steps.reverse()
        sentence = _type_sentence(A, k1, k2, seq, steps, ca)
        return GameVerdict("spoiler", 1, {
            "sequence": _seq_json(k1, k2, seq), "length": len(seq),
            "counts": {"a": ca, "b": cb}, "sentence": to_sexpr(sentence),
        })
    return GameVerdict("duplicator", None, {"sequences_checked": "all"}, bounded=n_max)
