"""Exhaustive existence searches for decompositions and pebble forest covers.

These search the objects directly (bags and exception sets, or forest orders
and pebblings) and are independent of the game solvers in `pursuit`; the
harness compares the two.
"""
from functools import lru_cache
from itertools import combinations

from .decomp import ForestCover, RootedDecomposition, verify_decomposition, verify_forest_cover
from .graphs import bits, pebble_names, popcount


def _submasks(mask):
    sub = mask
    while sub:
        yield sub
        sub = (sub - 1) & mask


def _components(adj, mask):
    comps = []
    rest = mask
    while rest:
        low = rest & -rest
        comp = low
        frontier = low
        while frontier:
            nxt = 0
            for v in bits(frontier):
                nxt |= adj[v]
            nxt &= mask & ~comp
            comp |= nxt
            frontier = nxt
        comps.append(comp)
        rest &= ~comp
    return comps


def _nbhd(adj, mask):
    out = 0
    for v in bits(mask):
        out |= adj[v]
    return out & ~mask


# ---------------------------------------------------------------- path decompositions

def _separation_order(adj, universe, k1, s_mask):
    """Vertex ordering of `universe` whose induced bags have at most k1 non-exception vertices."""
    dead = set()

    def rec(done):
        if done == universe:
            return []
        if done in dead:
            return None
        active = 0
        for u in bits(done):
            if adj[u] & universe & ~done:
                active |= 1 << u
        for v in bits(universe & ~done):
            bag = active | (1 << v)
            if popcount(bag & ~s_mask) > k1:
                continue
            rest = rec(done | (1 << v))
            if rest is not None:
                return [v] + rest
        dead.add(done)
        return None

    return rec(0)


def _bags_from_order(adj, order):
    bags, done = [], 0
    universe = 0
    for v in order:
        universe |= 1 << v
    for v in order:
        active = {u for u in bits(done) if adj[u] & universe & ~done}
        bags.append(active | {v})
        done |= 1 << v
    return bags


def find_path_decomposition(g, k1, k2, component=False):
    """A path decomposition of class width (k1, k2), or None.

    One global exception set, or one per connected component when
    `component` is set.  Searches every exception set and every vertex
    ordering (vertex-separation normal form).
    """
    adj = g.adj
    if g.n == 0:
        return RootedDecomposition([-1], [set()], "path", {0: set()})
    if not component:
        for size in range(k2 + 1):
            for s in combinations(range(g.n), size):
                s_mask = sum(1 << v for v in s)
                order = _separation_order(adj, (1 << g.n) - 1, k1, s_mask)
                if order is not None:
                    bags = _bags_from_order(adj, order)
                    d = RootedDecomposition([i - 1 for i in range(len(bags))], bags, "path", {len(bags) - 1: set(s)})
                    assert verify_decomposition(d, g, k1, k2).ok
                    return d
        return None
    bags, cexc = [], {}
    for comp in g.components():
        vs = bits(comp)
        found = None
        for size in range(k2 + 1):
            for s in combinations(vs, size):
                s_mask = sum(1 << v for v in s)
                order = _separation_order(adj, comp, k1, s_mask)
                if order is not None:
                    found = (order, set(s))
                    break
            if found:
                break
        if found is None:
            return None
        bags += _bags_from_order(adj, found[0])
        cexc[frozenset(vs)] = found[1]
    d = RootedDecomposition([i - 1 for i in range(len(bags))], bags, "path", None, cexc)
    assert verify_decomposition(d, g, k1, k2).ok
    return d


# ---------------------------------------------------------------- tree decompositions

def find_tree_decomposition(g, k1, k2, q, coherent=False):
    """A rooted tree decomposition of class width (k1, k2) and depth <= q, or None.

    The search builds the tree top-down.  Each child bag keeps the parent's
    vertices that still have neighbours in the child's component and adds a
    non-empty set of that component's vertices; every tree decomposition can
    be reduced to this form without increasing width or depth.  Exception
    sets are tracked exactly: the state holds the family of all exception
    sets (restricted to vertices seen on the root path) that satisfy every
    bag so far, and each leaf picks its own.  With `coherent`, exceptions are
    instead fixed when a vertex is introduced and kept in all lower bags.
    """
    adj = g.adj

    def fam_next(fam, new, bag):
        out = set()
        for s in fam:
            for x in _all_submasks(new):
                s2 = s | x
                if popcount(s2) <= k2 and popcount(bag & ~s2) <= k1:
                    out.add(s2)
        return frozenset(out)

    @lru_cache(maxsize=None)
    def solve(bag, seen, fam, comp):
        """Subtree for component `comp` hanging below a node with `bag`; returns a nested plan."""
        for add in _submasks(comp):
            seen2 = seen | add
            if popcount(seen2) > q:
                continue
            if coherent:
                (exc,) = fam
                keep = bag & (_nbhd(adj, comp) | exc)
                bag2 = keep | add
                options = []
                for x in _all_submasks(add):
                    e2 = exc | x
                    if popcount(e2) <= k2 and popcount(bag2 & ~e2) <= k1:
                        options.append(frozenset([e2]))
            else:
                bag2 = (bag & _nbhd(adj, comp)) | add
                f2 = fam_next(fam, add, bag2)
                options = [f2] if f2 else []
            for f2 in options:
                rest = comp & ~add
                kids = []
                for c in _components(adj, rest):
                    sub = solve(bag2, seen2, f2, c)
                    if sub is None:
                        break
                    kids.append(sub)
                else:
                    return (bag2, f2, tuple(kids))
        return None

    plans = []
    for c in g.components():
        plan = solve(0, 0, frozenset([0]), c)
        if plan is None:
            return None
        plans.append(plan)
    parent, bags, exc = [-1], [set()], {}

    def emit(plan, par):
        bag, fam, kids = plan
        me = len(bags)
        parent.append(par)
        bags.append(set(bits(bag)))
        if not kids:
            exc[me] = set(bits(min(fam, key=lambda s: (popcount(s), s))))
        for k in kids:
            emit(k, me)

    for p in plans:
        emit(p, 0)
    if len(bags) == 1:
        exc[0] = set()
    d = RootedDecomposition(parent, bags, "tree", exc)
    chk = verify_decomposition(d, g, k1, k2, q)
    assert chk.ok, chk.reason
    return d


def _all_submasks(mask):
    yield 0
    yield from _submasks(mask)


# ---------------------------------------------------------------- covers

def find_linear_cover(g, k1, k2, component=False):
    """A linear (or linear-component) (k1, k2)-pebble forest cover, or None.

    Searches vertex orderings with a failure memo on (placed set, placed
    vertices still waiting for a neighbour that carry a y-pebble, y-pebbles
    used); x-pebbles are interchangeable so only the smallest free one is tried.
    """
    adj = g.adj
    xs, ys = pebble_names(k1, 0), pebble_names(0, k2)
    if component:
        parent, peb = [-1] * g.n, [None] * g.n
        for comp in g.components():
            res = _linear_order(adj, comp, xs, ys)
            if res is None:
                return None
            order, pebs = res
            for i, v in enumerate(order):
                parent[v] = order[i - 1] if i else -1
                peb[v] = pebs[i]
        fc = ForestCover(parent, peb, k1, k2, "linear-component")
    else:
        res = _linear_order(adj, (1 << g.n) - 1, xs, ys)
        if res is None:
            return None
        order, pebs = res
        parent, peb = [-1] * g.n, [None] * g.n
        for i, v in enumerate(order):
            parent[v] = order[i - 1] if i else -1
            peb[v] = pebs[i]
        fc = ForestCover(parent, peb, k1, k2, "linear")
    chk = verify_forest_cover(fc, g)
    assert chk.ok, chk.reason
    return fc


def _linear_order(adj, universe, xs, ys):
    dead = set()
    order, pebs = [], []

    def rec(done, active, used_y):
        if done == universe:
            return True
        active_y = frozenset(u for u in active if active[u].startswith("y"))
        key = (done, active_y, used_y)
        if key in dead:
            return False
        taken = set(active.values())
        options = []
        free_x = [z for z in xs if z not in taken]
        if free_x:
            options.append(free_x[0])
        if used_y < len(ys):
            options.append(ys[used_y])
        for v in bits(universe & ~done):
            for z in options:
                done2 = done | (1 << v)
                act2 = {u: p for u, p in active.items() if adj[u] & universe & ~done2}
                if adj[v] & universe & ~done2:
                    act2[v] = z
                order.append(v)
                pebs.append(z)
                if rec(done2, act2, used_y + z.startswith("y")):
                    return True
                order.pop()
                pebs.pop()
        dead.add(key)
        return False

    if rec(0, {}, 0):
        return list(order), list(pebs)
    return None


def find_forest_cover(g, k1, k2, q):
    """A (k1, k2)-pebble forest cover of height <= q, or None.

    Each connected piece hangs below one chosen root; the state is the piece,
    the pebbles of ancestors adjacent to it, the y-pebbles on the root path
    and the remaining height.
    """
    adj = g.adj
    xs, ys = pebble_names(k1, 0), pebble_names(0, k2)

    @lru_cache(maxsize=None)
    def solve(comp, active, used_y, height):
        if height == 0:
            return None
        taken = {p for _, p in active}
        options = []
        free_x = [z for z in xs if z not in taken]
        if free_x:
            options.append(free_x[0])
        free_y = [z for z in ys if z not in taken and z not in used_y]
        if free_y:
            options.append(free_y[0])
        for v in bits(comp):
            for z in options:
                anc = dict(active)
                anc[v] = z
                used2 = used_y | ({z} if z.startswith("y") else set())
                plan = []
                for c in _components(adj, comp & ~(1 << v)):
                    nb = _nbhd(adj, c)
                    act = tuple(sorted((u, p) for u, p in anc.items() if nb >> u & 1))
                    sub = solve(c, act, frozenset(used2), height - 1)
                    if sub is None:
                        break
                    plan.append(sub)
                else:
                    return (v, z, tuple(plan))
        return None

    parent, peb = [-1] * g.n, [None] * g.n

    def emit(plan, par):
        v, z, kids = plan
        parent[v] = par
        peb[v] = z
        for k in kids:
            emit(k, v)

    for c in g.components():
        plan = solve(c, (), frozenset(), q)
        if plan is None:
            return None
        emit(plan, -1)
    fc = ForestCover(parent, peb, k1, k2, "tree")
    chk = verify_forest_cover(fc, g, q)
    assert chk.ok, chk.reason
    return fc
