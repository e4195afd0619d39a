"""Node searching and cops-and-robber games with reusable (x) and
non-reusable (y) pursuers.

Positions map pebble names to vertices; a y-pebble may be placed once and
then stays.  Each round one pebble is lifted and put down again (or left
off the board), the evader moves inside the region that was open while the
pebble was in the air, and is caught if it ends on an occupied vertex.
"""
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

from .decomp import RootedDecomposition, verify_decomposition
from .exhaustive import _bags_from_order
from .graphs import bits, pebble_names, popcount


class MonotonicityViolation(AssertionError):
    """A won game had no monotone winning strategy; this should never happen."""


class IllegalStrategy(ValueError):
    pass


def _region(adj, free, seeds):
    """Union of the components of the graph on `free` that meet `seeds`."""
    out = seeds & free
    frontier = out
    while frontier:
        nxt = 0
        for v in bits(frontier):
            nxt |= adj[v]
        nxt &= free & ~out
        out |= nxt
        frontier = nxt
    return out


def _split(adj, mask):
    comps, rest = [], mask
    while rest:
        c = _region(adj, mask, rest & -rest)
        comps.append(c)
        rest &= ~c
    return comps


def _occupied(pos):
    m = 0
    for v in pos.values():
        if v is not None:
            m |= 1 << v
    return m


@dataclass
class NsStrategy:
    """Searcher positions after each round (pebble -> vertex)."""

    k1: int
    k2: int
    positions: list = field(default_factory=list)
    exceptions: tuple = ()

    def moves(self):
        prev = {}
        out = []
        for cur in self.positions:
            changed = [z for z in set(prev) | set(cur) if prev.get(z) != cur.get(z)]
            if len(changed) != 1:
                raise IllegalStrategy(f"round changes {len(changed)} pebbles")
            out.append((changed[0], cur.get(changed[0])))
            prev = cur
        return out

    def to_json(self):
        return {"game": "ns", "k1": self.k1, "k2": self.k2, "exceptions": list(self.exceptions),
                "positions": [dict(sorted(p.items())) for p in self.positions]}


@dataclass
class CrStrategy:
    """Position table: (cops, robber component, rounds left) -> (pebble, destination)."""

    k1: int
    k2: int
    q: int
    table: dict = field(default_factory=dict)

    def to_json(self):
        rows = []
        for (cops, comp, left), (z, w) in sorted(self.table.items(), key=lambda kv: (-kv[0][2], repr(kv[0]))):
            rows.append({"cops": {p: v for p, v in cops if v is not None}, "robber_component": bits(comp),
                         "rounds_left": left, "move": [z, w]})
        return {"game": "cr", "k1": self.k1, "k2": self.k2, "q": self.q, "positions": rows}


@dataclass
class Outcome:
    pursuers_win: bool
    strategy: object = None
    decomposition: object = None
    inconclusive: bool = False
    game: str = "ns"

    @property
    def label(self):
        if self.inconclusive:
            return "inconclusive"
        if self.game == "cr":
            return "cops-win" if self.pursuers_win else "robber-wins"
        return "searchers-win" if self.pursuers_win else "fugitive-wins"


# ---------------------------------------------------------------- node searching

def _search_sets(adj, universe, k1, monotone):
    """BFS over (occupied set, contaminated set) for k1 interchangeable searchers.

    Returns the list of occupied sets after each round of a shortest winning
    play, or None.
    """
    start = (0, universe)
    if universe == 0:
        return []
    prev = {start: None}
    queue = deque([start])
    while queue:
        occ, dirty = queue.popleft()
        lifts = [None] + bits(occ) if popcount(occ) < k1 else bits(occ)
        for a in lifts:
            rest = occ if a is None else occ & ~(1 << a)
            mid = _region(adj, universe & ~rest, dirty)
            if monotone and mid != dirty:
                continue
            for w in [None] + bits(universe & ~rest):
                occ2 = rest | (0 if w is None else 1 << w)
                if occ2 == occ:
                    continue
                dirty2 = mid & ~occ2
                state = (occ2, dirty2)
                if state in prev:
                    continue
                prev[state] = (occ, dirty)
                if dirty2 == 0:
                    seq = []
                    s = state
                    while s != start:
                        seq.append(s[0])
                        s = prev[s]
                    return seq[::-1]
                queue.append(state)
    return None


def _name_pebbles(occ_seq, names, fixed=None):
    """Attach pebble identities to a sequence of occupied sets (one change per round)."""
    pos = dict(fixed or {})
    out = []
    cur = 0
    for occ in occ_seq:
        gone = [v for v in bits(cur & ~occ)]
        new = [v for v in bits(occ & ~cur)]
        holder = {v: z for z, v in pos.items() if z in names}
        if gone:
            z = holder[gone[0]]
        else:
            z = next(z for z in names if z not in pos)
        if new:
            pos[z] = new[0]
        else:
            pos.pop(z, None)
        cur = occ
        out.append(dict(pos))
    return out


def solve_ns(g, k1, k2):
    """Decide the node searching game; on a win, also return a monotone
    strategy that places all non-reusable searchers first."""
    if k1 + k2 < 1:
        raise ValueError("need at least one searcher")
    full = (1 << g.n) - 1
    for size in range(min(k2, g.n) + 1):
        for excl in combinations(range(g.n), size):
            universe = full & ~sum(1 << v for v in excl)
            adj = [a & universe for a in g.adj]
            if universe and k1 == 0:
                continue
            seq = _search_sets(adj, universe, k1, monotone=False)
            if seq is None:
                continue
            mono = _search_sets(adj, universe, k1, monotone=True)
            if mono is None:
                raise MonotonicityViolation(f"searchers win on {g!r} minus {excl} but not monotonically")
            return Outcome(True, _ns_strategy(g, k1, k2, excl, mono), _ns_decomposition(g, excl, mono))
    return Outcome(False)


def _ns_strategy(g, k1, k2, excl, occ_seq):
    ys = pebble_names(0, k2)
    positions, fixed = [], {}
    for y, v in zip(ys, excl):
        fixed[y] = v
        positions.append(dict(fixed))
    positions += _name_pebbles(occ_seq, pebble_names(k1, 0), fixed)
    return NsStrategy(k1, k2, positions, tuple(excl))


def _ns_decomposition(g, excl, occ_seq):
    """Path decomposition from the order in which searchers first occupy vertices."""
    order, seen = [], set()
    for occ in occ_seq:
        for v in bits(occ):
            if v not in seen:
                seen.add(v)
                order.append(v)
    rest = [v for v in range(g.n) if v not in excl]
    assert sorted(order) == rest
    adj = [a & ~sum(1 << v for v in excl) for a in g.adj]
    bags = [b | set(excl) for b in _bags_from_order(adj, order)] or [set(excl)]
    return RootedDecomposition([i - 1 for i in range(len(bags))], bags, "path", {len(bags) - 1: set(excl)})


def ns_strategy_wins(s, g):
    """Replay an NS strategy; True iff the fugitive region is empty at the end."""
    dirty = (1 << g.n) - 1
    prev = {}
    used_y = set()
    for cur in s.positions:
        (z, w), = [(z, cur.get(z)) for z in set(prev) | set(cur) if prev.get(z) != cur.get(z)]
        if z.startswith("y"):
            if z in used_y or prev.get(z) is not None:
                raise IllegalStrategy(f"non-reusable pebble {z} moved twice")
            used_y.add(z)
        lifted = dict(prev)
        lifted.pop(z, None)
        mid = _region(g.adj, ((1 << g.n) - 1) & ~_occupied(lifted), dirty)
        dirty = mid & ~_occupied(cur)
        prev = cur
    return dirty == 0


def solve_ns_direct(g, k1, k2, max_moves=64):
    """Breadth-first search over full positions (x-set, y-set, fugitive region).

    Independent of the exception-first normal form.  Returns an Outcome
    flagged inconclusive when the move budget runs out first.
    """
    full = (1 << g.n) - 1
    if full == 0:
        return Outcome(True, NsStrategy(k1, k2, []))
    start = (0, 0, full)
    seen = {start}
    frontier = [start]
    for _ in range(max_moves):
        nxt = []
        for xs, ys, dirty in frontier:
            placed_y = popcount(ys)
            # moves of a reusable searcher
            lifts = [None] + bits(xs) if popcount(xs) < k1 else bits(xs)
            moves = [("x", a) for a in lifts] + ([("y", None)] if placed_y < k2 else [])
            for kind, a in moves:
                xs_rest = xs if a is None else xs & ~(1 << a)
                mid = _region(g.adj, full & ~(xs_rest | ys), dirty)
                for w in [None] + list(range(g.n)):
                    if kind == "x":
                        xs2, ys2 = xs_rest | (0 if w is None else 1 << w), ys
                    else:
                        if w is None:
                            continue
                        xs2, ys2 = xs, ys | (1 << w)
                        if ys2 == ys:
                            continue
                    dirty2 = mid & ~(xs2 | ys2)
                    if dirty2 == 0:
                        return Outcome(True)
                    state = (xs2, ys2, dirty2)
                    if state not in seen:
                        seen.add(state)
                        nxt.append(state)
        if not nxt:
            return Outcome(False)
        frontier = nxt
    return Outcome(False, inconclusive=True)


# ---------------------------------------------------------------- cops and robber

def solve_cr(g, k1, k2, q):
    """Decide the q-round cops-and-robber game by backward induction.

    The robber picks a starting component in plain sight before the first
    round.  Cops only ever put a pebble down inside the robber's current
    region, which loses nothing.  On a win the returned strategy is monotone.
    """
    if k1 + k2 < 1 or q < 1:
        raise ValueError("need at least one cop and one round")
    full = (1 << g.n) - 1
    adj = g.adj
    xs, ys = pebble_names(k1, 0), pebble_names(0, k2)

    def canon(xpos, ypos, used_y, comp):
        # only pebbles next to the robber's region matter; x-pebbles are interchangeable
        border = 0
        for v in bits(comp):
            border |= adj[v]
        border &= ~comp
        xk = tuple(sorted(v for v in xpos if border >> v & 1))
        yk = tuple(sorted(v for v in ypos if border >> v & 1))
        return xk, yk, used_y, comp

    @lru_cache(maxsize=None)
    def win(xk, yk, used_y, comp, left, monotone):
        if left == 0:
            return False
        for move in _cr_moves(adj, full, k1, k2, xk, yk, used_y, comp, monotone):
            if all(win(*c, left - 1, monotone) for c in move[-1]):
                return True
        return False

    def _cr_moves(adj, full, k1, k2, xk, yk, used_y, comp, monotone):
        occ = 0
        for v in xk + yk:
            occ |= 1 << v
        lifts = []
        if len(xk) < k1:
            lifts.append(("x", None))
        for v in sorted(set(xk)):
            lifts.append(("x", v))
        if used_y < k2:
            lifts.append(("y", None))
        for kind, a in lifts:
            xrest = list(xk)
            if a is not None:
                xrest.remove(a)
            rest = 0
            for v in xrest + list(yk):
                rest |= 1 << v
            region = _region(adj, full & ~rest, comp)
            if monotone and region != comp:
                continue
            for w in bits(region):
                if kind == "x":
                    x2, y2, u2 = xrest + [w], list(yk), used_y
                else:
                    x2, y2, u2 = xrest if a is None else list(xk), list(yk) + [w], used_y + 1
                occ2 = region & ~(1 << w)
                kids = [canon(x2, y2, u2, c) for c in _split(adj, occ2)]
                yield (kind, a, w, kids)

    starts = _split(adj, full)
    result = all(win(*canon([], [], 0, c), q, False) for c in starts)
    if not result:
        return Outcome(False, game="cr")
    if not all(win(*canon([], [], 0, c), q, True) for c in starts):
        raise MonotonicityViolation(f"cops win on {g!r} but not monotonically")
    strategy = CrStrategy(k1, k2, q)
    parent, bags, exc = [-1], [set()], {}

    def extract(pos, comp, left, node):
        # pos: pebble -> vertex with identities; follow the lowest winning move
        xpos = [v for z, v in pos.items() if z.startswith("x")]
        ypos = [v for z, v in pos.items() if z.startswith("y")]
        used_y = len(ypos)
        key = canon(xpos, ypos, used_y, comp)
        for kind, a, w, kids in _cr_moves(adj, full, k1, k2, *key, True):
            if not all(win(*c, left - 1, True) for c in kids):
                continue
            pos2 = dict(pos)
            if kind == "x":
                if a is None:
                    z = next((z for z in xs if pos.get(z) is None or not _touches(adj, pos[z], comp)), None)
                else:
                    z = next(z for z in xs if pos.get(z) == a)
            else:
                z = next(y for y in ys if y not in pos)
            pos2[z] = w
            strategy.table[(tuple(sorted(pos.items())), comp, left)] = (z, w)
            me = len(bags)
            parent.append(node)
            bags.append({v for v in pos2.values() if v is not None})
            occ = 0
            for v in pos2.values():
                occ |= 1 << v
            region = _region(adj, full & ~_occupied({p: v for p, v in pos.items() if p != z}), comp)
            pieces = _split(adj, region & ~occ)
            if not pieces:
                exc[me] = {v for p, v in pos2.items() if p.startswith("y")}
            for c in pieces:
                extract(pos2, c, left - 1, me)
            return
        raise AssertionError("no winning move found during extraction")

    for c in starts:
        extract({}, c, q, 0)
    if len(bags) == 1:
        exc[0] = set()
    d = RootedDecomposition(parent, bags, "tree", exc)
    chk = verify_decomposition(d, g, k1, k2, q)
    assert chk.ok, chk.reason
    return Outcome(True, strategy, d, game="cr")


def _touches(adj, v, comp):
    return bool((adj[v] | (1 << v)) & comp)


def solve_cr_full(g, k1, k2, q):
    """Same game without the monotone restriction or the placement restriction; used as a check."""
    full = (1 << g.n) - 1
    adj = g.adj

    @lru_cache(maxsize=None)
    def win(xk, yk, used_y, robber, left):
        if left == 0:
            return False
        occ = 0
        for v in xk + yk:
            occ |= 1 << v
        lifts = [("x", None)] if len(xk) < k1 else []
        lifts += [("x", v) for v in sorted(set(xk))]
        if used_y < k2:
            lifts.append(("y", None))
        for kind, a in lifts:
            xrest = list(xk)
            if a is not None:
                xrest.remove(a)
            rest = 0
            for v in xrest + list(yk):
                rest |= 1 << v
            region = _region(adj, full & ~rest, robber)
            for w in [None] + list(range(g.n)):
                if kind == "y" and w is None:
                    continue
                if kind == "x":
                    x2 = tuple(sorted(xrest + ([w] if w is not None else [])))
                    y2, u2 = yk, used_y
                else:
                    x2, y2, u2 = tuple(sorted(xk)), tuple(sorted(yk + (w,))), used_y + 1
                occ2 = 0
                for v in x2 + y2:
                    occ2 |= 1 << v
                escape = region & ~occ2
                if all(win(x2, y2, u2, c, left - 1) for c in _split(adj, escape)):
                    return True
        return False

    return all(win((), (), 0, c, q) for c in _split(adj, full))


def is_monotone(s, g):
    """True iff no round lets the evader's region grow while a pebble is lifted."""
    full = (1 << g.n) - 1
    if isinstance(s, NsStrategy):
        dirty = full
        prev = {}
        for cur in s.positions:
            diff = [z for z in set(prev) | set(cur) if prev.get(z) != cur.get(z)]
            if len(diff) != 1:
                raise IllegalStrategy("each round must move exactly one pebble")
            z = diff[0]
            if z.startswith("y") and prev.get(z) is not None:
                raise IllegalStrategy(f"non-reusable pebble {z} moved after placement")
            lifted = {p: v for p, v in prev.items() if p != z}
            mid = _region(g.adj, full & ~_occupied(lifted), dirty)
            if mid != dirty:
                return False
            dirty = mid & ~_occupied(cur)
            prev = cur
        return True
    if isinstance(s, CrStrategy):
        for (cops, comp, left), (z, w) in s.table.items():
            pos = dict(cops)
            if z.startswith("y") and pos.get(z) is not None:
                raise IllegalStrategy(f"non-reusable pebble {z} moved after placement")
            lifted = {p: v for p, v in pos.items() if p != z}
            region = _region(g.adj, full & ~_occupied(lifted), comp)
            if region != comp:
                return False
        return True
    raise TypeError("unknown strategy type")


def ns_strategy_from_json(obj):
    return NsStrategy(obj["k1"], obj["k2"], [dict(p) for p in obj["positions"]], tuple(obj.get("exceptions", ())))


# ---------------------------------------------------------------- membership

def membership(g, cls, k1, k2, q=None):
    """cls is 'P', 'UP' or 'T'."""
    if cls == "P":
        return solve_ns(g, k1, k2).pursuers_win
    if cls == "UP":
        return all(solve_ns(g.induced(bits(c)), k1, k2).pursuers_win for c in g.components())
    if cls == "T":
        return solve_cr(g, k1, k2, q).pursuers_win
    raise ValueError(f"unknown class {cls!r}")
