"""Rooted decompositions with exception sets, pebble forest covers and
construction trees: verification, normalisation, conversion and hom
evaluation along a construction tree.

Width arguments are in the class sense throughout: a decomposition has
width (k1, k2) when every bag minus the relevant exception set has at most
k1 vertices and every exception set has at most k2 vertices.  k1 = 0 with
k2 > 0 is allowed and means every bag lies inside the exceptions.
"""
from collections import namedtuple
from itertools import product as cartesian

from .graphs import (
    Graph, LabeledGraph, bits, find_isomorphism, labeled_isomorphic, pebble_names, product, product_all, relabel,
)

Check = namedtuple("Check", "ok reason depth")


class DecompositionError(ValueError):
    pass


def _fs(xs):
    return frozenset(xs)


# ---------------------------------------------------------------- decompositions

class RootedDecomposition:
    """Rooted tree (or path) with bags and exception sets.

    `exceptions` maps each leaf to its exception set.  For component width
    `component_exceptions` maps each connected component (a frozenset) to its
    exception set instead and `exceptions` is ignored.
    """

    def __init__(self, parent, bags, kind="tree", exceptions=None, component_exceptions=None):
        self.parent = tuple(parent)
        self.bags = tuple(_fs(b) for b in bags)
        if len(self.parent) != len(self.bags):
            raise DecompositionError("parent array and bag list differ in length")
        self.kind = kind
        self.exceptions = {t: _fs(s) for t, s in (exceptions or {}).items()}
        self.component_exceptions = (
            None if component_exceptions is None
            else {_fs(c): _fs(s) for c, s in component_exceptions.items()}
        )
        self._children = None

    @property
    def size(self):
        return len(self.bags)

    @property
    def root(self):
        roots = [t for t, p in enumerate(self.parent) if p == -1]
        if len(roots) != 1:
            raise DecompositionError(f"expected one root, found {len(roots)}")
        return roots[0]

    def children(self, t):
        if self._children is None:
            ch = [[] for _ in self.parent]
            for s, p in enumerate(self.parent):
                if p != -1:
                    ch[p].append(s)
            self._children = ch
        return self._children[t]

    def leaves(self):
        return [t for t in range(self.size) if not self.children(t)]

    def ancestors(self, t):
        """Nodes from the root down to t, inclusive."""
        chain = []
        while t != -1:
            chain.append(t)
            t = self.parent[t]
        return chain[::-1]

    def exception_set(self, leaf):
        return self.exceptions.get(leaf, frozenset())

    def depth(self):
        best = 0
        for t in range(self.size):
            seen = set()
            for a in self.ancestors(t):
                seen |= self.bags[a]
            best = max(best, len(seen))
        return best

    def preorder(self):
        out, stack = [], [self.root]
        while stack:
            t = stack.pop()
            out.append(t)
            stack.extend(reversed(self.children(t)))
        return out

    def __repr__(self):
        return f"RootedDecomposition(kind={self.kind}, parent={self.parent}, bags={[sorted(b) for b in self.bags]})"


def _check_tree(parent, kind):
    n = len(parent)
    roots = [t for t, p in enumerate(parent) if p == -1]
    if n == 0:
        return "empty tree"
    if len(roots) != 1:
        return f"tree must have exactly one root, found {len(roots)}"
    for t, p in enumerate(parent):
        if p != -1 and not 0 <= p < n:
            return f"node {t} has out-of-range parent {p}"
    for t in range(n):
        seen, s = set(), t
        while s != -1:
            if s in seen:
                return f"cycle through node {t}"
            seen.add(s)
            s = parent[s]
    if kind == "path":
        counts = [0] * n
        for p in parent:
            if p != -1:
                counts[p] += 1
        bad = [t for t in range(n) if counts[t] > 1]
        if bad:
            return f"path decomposition node {bad[0]} has {counts[bad[0]]} children"
    return None


def verify_decomposition(d, g, k1, k2, q=None):
    """Check that d is a decomposition of g of class width (k1, k2) and, if q is given, depth <= q."""
    err = _check_tree(d.parent, d.kind)
    if err:
        return Check(False, err, None)
    for t, b in enumerate(d.bags):
        for v in b:
            if not 0 <= v < g.n:
                return Check(False, f"bag {t} holds out-of-range vertex {v}", None)
    covered = set().union(*d.bags) if d.bags else set()
    for v in range(g.n):
        if v not in covered:
            return Check(False, f"vertex {v} lies in no bag", None)
    for u, v in g.sorted_edges():
        if not any(u in b and v in b for b in d.bags):
            return Check(False, f"edge ({u}, {v}) lies in no bag", None)
    for v in range(g.n):
        nodes = [t for t, b in enumerate(d.bags) if v in b]
        # connected iff exactly one of them has its parent outside the set
        tops = [t for t in nodes if d.parent[t] == -1 or v not in d.bags[d.parent[t]]]
        if len(tops) != 1:
            return Check(False, f"bags containing vertex {v} are not connected", None)
    depth = d.depth()
    if d.component_exceptions is not None:
        comps = {_fs(bits(c)) for c in g.components()}
        union = set()
        for c in comps:
            s = d.component_exceptions.get(c, frozenset())
            if not s <= c:
                return Check(False, f"exception set {sorted(s)} leaves component {sorted(c)}", depth)
            if len(s) > k2:
                return Check(False, f"component {sorted(c)} has {len(s)} > {k2} exceptions", depth)
            union |= s
        for t, b in enumerate(d.bags):
            if len(b - union) > k1:
                return Check(False, f"bag {t} has {len(b - union)} > {k1} non-exception vertices", depth)
    else:
        for leaf in d.leaves():
            s = d.exception_set(leaf)
            if len(s) > k2:
                return Check(False, f"leaf {leaf} has {len(s)} > {k2} exceptions", depth)
            for t in d.ancestors(leaf):
                if len(d.bags[t] - s) > k1:
                    return Check(
                        False, f"bag {t} has {len(d.bags[t] - s)} > {k1} non-exception vertices for leaf {leaf}", depth
                    )
    if q is not None and depth > q:
        return Check(False, f"depth {depth} exceeds {q}", depth)
    return Check(True, "ok", depth)


def measured_width(d):
    """Smallest (k1, k2) in the class sense that d satisfies with its own exception sets."""
    if d.component_exceptions is not None:
        union = set().union(*d.component_exceptions.values()) if d.component_exceptions else set()
        k2 = max((len(s) for s in d.component_exceptions.values()), default=0)
        return max(len(b - union) for b in d.bags), k2
    k1 = k2 = 0
    for leaf in d.leaves():
        s = d.exception_set(leaf)
        k2 = max(k2, len(s))
        k1 = max([k1] + [len(d.bags[t] - s) for t in d.ancestors(leaf)])
    return k1, k2


# ---------------------------------------------------------------- nice form

class _Builder:
    def __init__(self):
        self.parent, self.bags = [], []

    def add(self, parent, bag):
        self.parent.append(parent)
        self.bags.append(_fs(bag))
        return len(self.bags) - 1


def _committed(d):
    """Per vertex: True if an exception for every leaf below its topmost node, False if for none.

    Returns None when some vertex is an exception for only part of those leaves.
    """
    top = {}
    for t in d.preorder():
        for v in d.bags[t]:
            top.setdefault(v, t)
    below = {t: set() for t in range(d.size)}
    for leaf in d.leaves():
        for a in d.ancestors(leaf):
            below[a].add(leaf)
    out = {}
    for v, t in top.items():
        flags = {v in d.exception_set(leaf) for leaf in below[t]}
        if len(flags) > 1:
            return None
        out[v] = flags == {True}
    return out, top


def _normalise_exceptions(d, k1, k2):
    """Try to make every vertex's exception status uniform below its topmost node.

    Returns a new decomposition (exceptions trimmed or extended) or None.
    """
    top = {}
    for t in d.preorder():
        for v in d.bags[t]:
            top.setdefault(v, t)
    below = {t: [] for t in range(d.size)}
    for leaf in d.leaves():
        for a in d.ancestors(leaf):
            below[a].append(leaf)
    exc = {leaf: set(d.exception_set(leaf)) for leaf in d.leaves()}
    for leaf in exc:
        on_path = set().union(*(d.bags[a] for a in d.ancestors(leaf)))
        exc[leaf] &= on_path

    def width_ok(leaves):
        for leaf in leaves:
            if len(exc[leaf]) > k2:
                return False
            if any(len(d.bags[a] - exc[leaf]) > k1 for a in d.ancestors(leaf)):
                return False
        return True

    for v in sorted(top, key=lambda v: (len(d.ancestors(top[v])), v)):
        leaves = below[top[v]]
        flags = {v in exc[leaf] for leaf in leaves}
        if len(flags) <= 1:
            continue
        saved = {leaf: set(exc[leaf]) for leaf in leaves}
        for leaf in leaves:
            exc[leaf].discard(v)
        if width_ok(leaves):
            continue
        for leaf in leaves:
            exc[leaf] = saved[leaf] | {v}
        if width_ok(leaves):
            continue
        return None
    return RootedDecomposition(d.parent, d.bags, d.kind, exc)


def _persist(d, committed, top):
    """Extend every committed exception vertex into all bags below its topmost node."""
    bags = [set(b) for b in d.bags]
    for v, flag in committed.items():
        if not flag:
            continue
        stack = [top[v]]
        while stack:
            t = stack.pop()
            bags[t].add(v)
            stack.extend(d.children(t))
    return RootedDecomposition(d.parent, bags, d.kind, d.exceptions, d.component_exceptions)


def _contract(d):
    """Remove nodes whose bag is contained in the parent's bag; prepend an empty root."""
    parent = list(d.parent)
    bags = list(d.bags)
    exc = dict(d.exceptions)
    root = d.root
    if bags[root]:
        parent = [p if p != -1 else len(bags) for p in parent] + [-1]
        bags = bags + [frozenset()]
        root = len(bags) - 1
    alive = [True] * len(bags)
    changed = True
    while changed:
        changed = False
        for t in range(len(bags)):
            if not alive[t] or parent[t] == -1:
                continue
            p = parent[t]
            if bags[t] <= bags[p]:
                kids = [s for s in range(len(bags)) if alive[s] and parent[s] == t]
                for s in kids:
                    parent[s] = p
                alive[t] = False
                if t in exc:
                    s_t = exc.pop(t)
                    if not any(alive[s] and parent[s] == p for s in range(len(bags))):
                        exc[p] = s_t
                changed = True
    keep = [t for t in range(len(bags)) if alive[t]]
    pos = {t: i for i, t in enumerate(keep)}
    return RootedDecomposition(
        [pos[parent[t]] if parent[t] != -1 else -1 for t in keep],
        [bags[t] for t in keep],
        d.kind,
        {pos[t]: s for t, s in exc.items() if t in pos},
        d.component_exceptions,
    )


def _expand(d):
    """Binary join trees plus forget-then-introduce chains."""
    out = _Builder()
    exc = {}

    def chain(parent_id, src, dst):
        cur = set(src)
        node = parent_id
        for v in sorted(src - dst):
            cur.discard(v)
            node = out.add(node, cur)
        for v in sorted(dst - src):
            cur.add(v)
            if cur == set(dst):
                break
            node = out.add(node, cur)
        return node

    def place(t, parent_id, parent_bag):
        if parent_id is None:
            me = out.add(-1, d.bags[t])
        else:
            before = chain(parent_id, parent_bag, d.bags[t])
            me = out.add(before, d.bags[t])
        kids = d.children(t)
        if not kids:
            exc[me] = d.exception_set(t)
            return
        if len(kids) == 1:
            place(kids[0], me, d.bags[t])
            return
        # binary join tree with one copy of the bag per child
        def join(hub, rest):
            if len(rest) == 1:
                place(rest[0], hub, d.bags[t])
                return
            left = out.add(hub, d.bags[t])
            place(rest[0], left, d.bags[t])
            join(out.add(hub, d.bags[t]), rest[1:])

        join(me, kids)

    place(d.root, None, None)
    return RootedDecomposition(out.parent, out.bags, d.kind, exc, d.component_exceptions)


def node_type(d, t):
    kids = d.children(t)
    if not kids:
        return "leaf"
    if len(kids) == 2 and all(d.bags[s] == d.bags[t] for s in kids):
        return "join"
    if len(kids) == 1:
        s = kids[0]
        if d.bags[s] < d.bags[t] and len(d.bags[t] - d.bags[s]) == 1:
            return "introduce"
        if d.bags[t] < d.bags[s] and len(d.bags[s] - d.bags[t]) == 1:
            return "forget"
    return None


def is_nice(d):
    return all(node_type(d, t) is not None for t in range(d.size))


def exceptions_persist(d):
    """Exception vertices stay in every bag below their topmost node, for every leaf below it."""
    res = _committed(d)
    if res is None:
        return False
    committed, top = res
    for v, flag in committed.items():
        if not flag:
            continue
        stack = [top[v]]
        while stack:
            t = stack.pop()
            if v not in d.bags[t]:
                return False
            stack.extend(d.children(t))
    return True


def make_nice(d, g, k1=None, k2=None, q=None):
    """Nice decomposition of g with the same width and depth as d, empty root bag
    and exceptions that persist downward.

    When the given exception sets cannot be made uniform on d's own tree, an
    equivalent decomposition is rebuilt by search (see `exhaustive`).
    """
    mk1, mk2 = measured_width(d)
    k1 = mk1 if k1 is None else k1
    k2 = mk2 if k2 is None else k2
    chk = verify_decomposition(d, g, k1, k2, q)
    if not chk.ok:
        raise DecompositionError(f"input decomposition invalid: {chk.reason}")
    q = chk.depth if q is None else q
    if d.component_exceptions is not None:
        return _nice_component(d, g, k1, k2)
    base = _contract(d)
    base = _normalise_exceptions(base, k1, k2)
    if base is None:
        from .exhaustive import find_tree_decomposition, find_path_decomposition
        if d.kind == "path":
            rebuilt = find_path_decomposition(g, k1, k2)
        else:
            rebuilt = find_tree_decomposition(g, k1, k2, q, coherent=True)
        if rebuilt is None:
            raise DecompositionError("could not rebuild a decomposition with uniform exceptions")
        return make_nice(rebuilt, g, k1, k2, q)
    committed, top = _committed(base)
    base = _persist(base, committed, top)
    base = _contract(base)
    nice = _expand(base)
    chk2 = verify_decomposition(nice, g, k1, k2, q)
    if not chk2.ok or not is_nice(nice) or not exceptions_persist(nice):
        raise DecompositionError(f"nice form failed verification: {chk2.reason}")
    return nice


def _nice_component(d, g, k1, k2):
    """Component-width path decomposition: persist S_C to the end of the component's segment."""
    comp_of = {}
    for c, s in d.component_exceptions.items():
        for v in c:
            comp_of[v] = c
    order = d.preorder()
    bags = [set(d.bags[t]) for t in order]
    for c, s in d.component_exceptions.items():
        for v in s:
            idx = [i for i, b in enumerate(bags) if v in b]
            last = max(i for i, b in enumerate(bags) if b & c)
            for i in range(min(idx), last + 1):
                bags[i].add(v)
    path = RootedDecomposition([i - 1 for i in range(len(bags))], bags, "path", None, d.component_exceptions)
    nice = _expand(_contract_path(path))
    chk = verify_decomposition(nice, g, k1, k2)
    if not chk.ok:
        raise DecompositionError(f"nice form failed verification: {chk.reason}")
    return nice


def _contract_path(d):
    c = _contract(RootedDecomposition(d.parent, d.bags, "path", {}))
    return RootedDecomposition(c.parent, c.bags, "path", None, d.component_exceptions)


# ---------------------------------------------------------------- forest covers

class ForestCover:
    """Rooted forest on V(G) with a pebbling function.

    variant: 'tree', 'linear' or 'linear-component'.
    """

    def __init__(self, parent, pebbles, k1, k2, variant="tree"):
        self.parent = tuple(parent)
        self.pebbles = tuple(pebbles)
        self.k1 = k1
        self.k2 = k2
        self.variant = variant

    @property
    def roots(self):
        return [v for v, p in enumerate(self.parent) if p == -1]

    def chain(self, v):
        """Ancestors of v from its root down to v."""
        out = []
        seen = set()
        while v != -1:
            if v in seen:
                raise DecompositionError("forest parent array has a cycle")
            seen.add(v)
            out.append(v)
            v = self.parent[v]
        return out[::-1]

    def height(self):
        return max((len(self.chain(v)) for v in range(len(self.parent))), default=0)

    def children(self, v):
        return [u for u, p in enumerate(self.parent) if p == v]

    def __repr__(self):
        return f"ForestCover({self.variant}, parent={self.parent}, pebbles={self.pebbles})"


def verify_forest_cover(fc, g, q=None):
    n = g.n
    if len(fc.parent) != n or len(fc.pebbles) != n:
        return Check(False, "cover does not match the vertex count", None)
    alphabet = set(pebble_names(fc.k1, fc.k2))
    for v, p in enumerate(fc.pebbles):
        if p not in alphabet:
            return Check(False, f"vertex {v} carries pebble {p} outside the alphabet", None)
    try:
        chains = [fc.chain(v) for v in range(n)]
    except DecompositionError as e:
        return Check(False, str(e), None)
    anc = [set(c[:-1]) for c in chains]
    height = max((len(c) for c in chains), default=0)
    for u, v in g.sorted_edges():
        if u not in anc[v] and v not in anc[u]:
            return Check(False, f"edge ({u}, {v}) joins incomparable vertices", height)
        lo, hi = (u, v) if u in anc[v] else (v, u)
        path = chains[hi][chains[hi].index(lo) + 1:]
        for w in path:
            if fc.pebbles[w] == fc.pebbles[lo]:
                return Check(False, f"pebble {fc.pebbles[lo]} repeats at {w} inside edge ({lo}, {hi})", height)
    for u in range(n):
        if fc.pebbles[u].startswith("y"):
            for w in range(n):
                if u in anc[w] and fc.pebbles[w] == fc.pebbles[u]:
                    return Check(False, f"non-reusable pebble {fc.pebbles[u]} repeats below {u} at {w}", height)
    if fc.variant in ("linear", "linear-component"):
        kids = [0] * n
        for p in fc.parent:
            if p != -1:
                kids[p] += 1
        if any(k > 1 for k in kids):
            return Check(False, "linear cover has a branching node", height)
        root_of = [c[0] for c in chains]
        for u in range(n):
            if not fc.pebbles[u].startswith("y"):
                continue
            for w in range(n):
                if w == u or fc.pebbles[w] != fc.pebbles[u]:
                    continue
                if fc.variant == "linear" or root_of[w] == root_of[u]:
                    return Check(False, f"non-reusable pebble {fc.pebbles[u]} used twice ({u}, {w})", height)
    elif fc.variant != "tree":
        return Check(False, f"unknown cover variant {fc.variant}", height)
    if q is not None and height > q:
        return Check(False, f"cover height {height} exceeds {q}", height)
    return Check(True, "ok", height)


def cover_to_decomposition(fc, g):
    """Bags are the ancestors whose pebble is not reused on the way down."""
    n = g.n
    chains = [fc.chain(v) for v in range(n)]

    def bag(v):
        ch = chains[v]
        out = set()
        for i, u in enumerate(ch):
            if all(fc.pebbles[w] != fc.pebbles[u] for w in ch[i + 1:]):
                out.add(u)
        return out

    if fc.variant == "tree":
        # nodes 0..n-1 are the vertices, node n is an empty root
        parent = [p if p != -1 else n for p in fc.parent] + [-1]
        bags = [bag(v) for v in range(n)] + [set()]
        d = RootedDecomposition(parent, bags, "tree")
        exc = {}
        for leaf in d.leaves():
            if leaf == n:
                exc[leaf] = frozenset()
                continue
            exc[leaf] = _fs(w for w in chains[leaf] if fc.pebbles[w].startswith("y"))
        d.exceptions = exc
        return d
    # linear variants: concatenate the paths in root order
    order = []
    for r in sorted(fc.roots):
        v = r
        while v != -1:
            order.append(v)
            kids = fc.children(v)
            v = kids[0] if kids else -1
    seq_pebbles = [fc.pebbles[v] for v in order]
    bags = []
    for i, v in enumerate(order):
        b = set()
        for j in range(i + 1):
            if all(seq_pebbles[m] != seq_pebbles[j] for m in range(j + 1, i + 1)):
                b.add(order[j])
        bags.append(b)
    # restrict each bag to vertices of a connected component that is still active
    parent = [-1] + list(range(len(order) - 1))
    if fc.variant == "linear":
        s = _fs(v for v in range(n) if fc.pebbles[v].startswith("y"))
        last = len(order) - 1
        return RootedDecomposition(parent, bags or [set()], "path", {max(last, 0): s})
    comps = [_fs(bits(c)) for c in g.components()]
    cexc = {c: _fs(v for v in c if fc.pebbles[v].startswith("y")) for c in comps}
    return RootedDecomposition(parent, bags or [set()], "path", None, cexc)


def decomposition_to_cover(d, g, k1, k2):
    """Topmost-node order plus the greedy smallest-free-pebble rule (nice form with persisting exceptions)."""
    if d.component_exceptions is not None:
        return _component_cover(d, g, k1, k2)
    nice = d if (is_nice(d) and not d.bags[d.root] and exceptions_persist(d)) else make_nice(d, g, k1, k2)
    committed, top = _committed(nice)
    tau = {v: top[v] for v in range(g.n)}
    node_vertex = {t: v for v, t in tau.items()}
    if len(node_vertex) != g.n:
        raise DecompositionError("topmost-node map is not injective")
    parent = [-1] * g.n
    for v in range(g.n):
        t = nice.parent[tau[v]]
        while t != -1 and t not in node_vertex:
            t = nice.parent[t]
        if t != -1:
            parent[v] = node_vertex[t]
    if d.kind == "path":
        # separate components into separate paths
        comp = {}
        for i, c in enumerate(g.components()):
            for v in bits(c):
                comp[v] = i
        order = sorted(range(g.n), key=lambda v: len(nice.ancestors(tau[v])))
        last = {}
        parent = [-1] * g.n
        for v in order:
            if comp[v] in last:
                parent[v] = last[comp[v]]
            last[comp[v]] = v
    xs, ys = pebble_names(k1, 0), pebble_names(0, k2)
    peb = [None] * g.n
    for v in sorted(range(g.n), key=lambda v: len(nice.ancestors(tau[v]))):
        taken = {peb[w] for w in nice.bags[tau[v]] if w != v}
        pool = ys if committed[v] else xs
        free = [z for z in pool if z not in taken]
        if not free:
            raise DecompositionError(f"no free pebble for vertex {v}")
        peb[v] = free[0]
    variant = "linear" if d.kind == "path" else "tree"
    fc = ForestCover(parent, peb, k1, k2, variant)
    chk = verify_forest_cover(fc, g)
    if not chk.ok:
        raise DecompositionError(f"derived cover invalid: {chk.reason}")
    return fc


def _component_cover(d, g, k1, k2):
    """Linear-component cover: one path per connected component."""
    parent = [-1] * g.n
    peb = [None] * g.n
    order_pos = {}
    for i, t in enumerate(d.preorder()):
        for v in d.bags[t]:
            order_pos.setdefault(v, i)
    for c, s in d.component_exceptions.items():
        vs = sorted(c, key=lambda v: order_pos[v])
        sub = g.induced(vs)
        pos = {v: i for i, v in enumerate(vs)}
        sub_bags = []
        for t in d.preorder():
            b = d.bags[t] & c
            if b:
                sub_bags.append({pos[v] for v in b})
        sd = RootedDecomposition([i - 1 for i in range(len(sub_bags))], sub_bags, "path",
                                 {len(sub_bags) - 1: {pos[v] for v in s}})
        fc = decomposition_to_cover(sd, sub, k1, k2)
        for v in vs:
            p = fc.parent[pos[v]]
            parent[v] = vs[p] if p != -1 else -1
            peb[v] = fc.pebbles[pos[v]]
    fc = ForestCover(parent, peb, k1, k2, "linear-component")
    chk = verify_forest_cover(fc, g)
    if not chk.ok:
        raise DecompositionError(f"derived cover invalid: {chk.reason}")
    return fc


# ---------------------------------------------------------------- construction trees

class ConstructionTree:
    """Nodes carry labeled graphs; tags are 'leaf', 'elim' (with the deleted label) or 'product'."""

    def __init__(self, parent, tags, payloads, eliminated=None, caterpillar=False):
        self.parent = tuple(parent)
        self.tags = tuple(tags)
        self.payloads = tuple(payloads)
        self.eliminated = dict(eliminated or {})
        self.caterpillar = caterpillar

    @property
    def root(self):
        return self.parent.index(-1)

    def children(self, t):
        return [s for s, p in enumerate(self.parent) if p == t]

    def target(self):
        return self.payloads[self.root]

    def __len__(self):
        return len(self.parent)

    def postorder(self):
        out = []

        def rec(t):
            for s in self.children(t):
                rec(s)
            out.append(t)

        rec(self.root)
        return out

    def __repr__(self):
        return f"ConstructionTree(size={len(self)}, caterpillar={self.caterpillar})"


def verify_construction_tree(ct, target, k1, k2):
    """Returns (ok, reason, elimination depth)."""
    alphabet = set(pebble_names(k1, k2))
    if _check_tree(ct.parent, "tree"):
        return Check(False, _check_tree(ct.parent, "tree"), None)
    if not labeled_isomorphic(ct.target(), target):
        return Check(False, "root payload differs from the target", None)
    for t in range(len(ct)):
        g = ct.payloads[t]
        if not g.label_set <= alphabet:
            return Check(False, f"node {t} uses labels outside the alphabet", None)
        kids = ct.children(t)
        tag = ct.tags[t]
        if not kids:
            if tag != "leaf":
                return Check(False, f"node {t} has no children but tag {tag}", None)
            if not g.is_fully_labeled():
                return Check(False, f"leaf {t} is not fully labeled", None)
        elif len(kids) == 1:
            if tag != "elim":
                return Check(False, f"node {t} has one child but tag {tag}", None)
            z = ct.eliminated.get(t)
            child = ct.payloads[kids[0]]
            if z not in child.labels:
                return Check(False, f"elimination node {t} deletes absent label {z}", None)
            if not labeled_isomorphic(relabel(child, z, None), g):
                return Check(False, f"elimination node {t} payload is not the child minus {z}", None)
        else:
            if tag != "product":
                return Check(False, f"node {t} has several children but tag {tag}", None)
            if not labeled_isomorphic(product_all([ct.payloads[s] for s in kids]), g):
                return Check(False, f"product node {t} payload differs from the product of its children", None)
            if ct.caterpillar and sum(1 for s in kids if ct.children(s)) > 1:
                return Check(False, f"caterpillar product node {t} has two non-leaf children", None)
        if tag == "elim" and ct.eliminated[t].startswith("y"):
            y = ct.eliminated[t]
            s = ct.parent[t]
            while s != -1:
                if y in ct.payloads[s].labels:
                    return Check(False, f"label {y} reappears at node {s} above its elimination at {t}", None)
                s = ct.parent[s]
    depth = 0
    for t in range(len(ct)):
        if ct.children(t):
            continue
        count, s = 0, t
        while s != -1:
            count += ct.tags[s] == "elim"
            s = ct.parent[s]
        depth = max(depth, count)
    return Check(True, "ok", depth)


def decomposition_to_construction(d, g, k1, k2):
    """Append a fully labeled leaf at each introduce node and label forgotten vertices top-down."""
    if d.component_exceptions is not None:
        raise DecompositionError("component-width decompositions have no construction tree; split by component first")
    nice = d if (is_nice(d) and not d.bags[d.root] and exceptions_persist(d)) else make_nice(d, g, k1, k2)
    committed, _ = _committed(nice)
    xs, ys = pebble_names(k1, 0), pebble_names(0, k2)
    colour = {}
    parent, tags, elim, owner = [], [], {}, []
    # build T' node list: nice nodes first, extra leaves after
    for t in range(nice.size):
        parent.append(nice.parent[t])
        owner.append(t)
    extra_leaf = {}
    for t in range(nice.size):
        if node_type(nice, t) == "introduce":
            extra_leaf[t] = len(parent)
            parent.append(t)
            owner.append(t)
    for t in nice.preorder():
        if node_type(nice, t) == "forget":
            s = nice.children(t)[0]
            (v,) = nice.bags[s] - nice.bags[t]
            taken = {colour[w] for w in nice.bags[t]}
            pool = ys if committed[v] else xs
            free = [z for z in pool if z not in taken]
            if not free:
                raise DecompositionError(f"no free label for vertex {v}")
            colour[v] = free[0]
            elim[t] = colour[v]
    below = {}
    for t in reversed(nice.preorder()):
        acc = set(nice.bags[t])
        for s in nice.children(t):
            acc |= below[s]
        below[t] = acc
    payloads = []
    for i, t in enumerate(owner):
        if i >= nice.size:
            vs = sorted(nice.bags[t])
        else:
            vs = sorted(below[t])
        pos = {v: j for j, v in enumerate(vs)}
        labels = {colour[v]: pos[v] for v in nice.bags[t]}
        payloads.append(LabeledGraph(g.induced(vs), labels))
        if i >= nice.size:
            tags.append("leaf")
        else:
            nt = node_type(nice, t)
            tags.append({"leaf": "leaf", "forget": "elim"}.get(nt, "product"))
    ct = ConstructionTree(parent, tags, payloads, elim, caterpillar=(d.kind == "path"))
    chk = verify_construction_tree(ct, LabeledGraph(g), k1, k2)
    if not chk.ok:
        raise DecompositionError(f"derived construction tree invalid: {chk.reason}")
    return ct


def construction_to_decomposition(ct, k1, k2):
    """Bags are the labeled vertices of each payload, mapped back to vertices of the target."""
    # trace each node's labeled vertices up to the root graph via label identities
    ident = _embed_payloads(ct)
    bags = [_fs(ident[t][v] for v in ct.payloads[t].labels.values()) for t in range(len(ct))]
    d = RootedDecomposition(ct.parent, bags, "path" if ct.caterpillar else "tree")
    exc = {}
    for leaf in d.leaves():
        # y-labeled vertices anywhere on the root path; each y names one vertex there
        exc[leaf] = _fs(
            ident[t][v] for t in d.ancestors(leaf) for z, v in ct.payloads[t].labels.items() if z.startswith("y")
        )
    d.exceptions = exc
    if ct.caterpillar:
        return _caterpillar_spine(ct, d, ident)
    return d


def _caterpillar_spine(ct, d, ident):
    """Path decomposition along the central path of a caterpillar."""
    spine = [ct.root]
    while True:
        kids = ct.children(spine[-1])
        if not kids:
            break
        inner = [s for s in kids if ct.children(s)]
        spine.append(inner[0] if inner else kids[0])
    bags = [d.bags[t] for t in spine]
    s = set()
    for t in range(len(ct)):
        s |= {ident[t][v] for z, v in ct.payloads[t].labels.items() if z.startswith("y")}
    return RootedDecomposition([i - 1 for i in range(len(spine))], bags, "path", {len(spine) - 1: s})


def _embed_payloads(ct):
    """For every node, a map from its payload vertices to root payload vertices."""
    ident = {ct.root: {v: v for v in range(ct.payloads[ct.root].n)}}
    for t in reversed(ct.postorder()):
        if t == ct.root:
            continue
        p = ct.parent[t]
        child, par = ct.payloads[t], ct.payloads[p]
        emb = _embedding(child, par, ct, t, p)
        ident[t] = {v: ident[p][emb[v]] for v in range(child.n)}
    return ident


def _embedding(child, par, ct, t, p):
    """Label-respecting embedding of a child payload into its parent payload."""
    kids = ct.children(p)
    if ct.tags[p] == "elim":
        z = ct.eliminated[p]
        target = relabel(child, z, None)
        iso = _labeled_iso(target, par)
        return iso
    # product: place siblings in order; the product identifies labeled vertices
    offset_maps = []
    n_before = 0
    for s in kids:
        offset_maps.append((s, n_before))
        n_before += ct.payloads[s].n
    prod = product_all([ct.payloads[s] for s in kids])
    iso = _labeled_iso(prod, par)
    mapping = _product_vertex_map([ct.payloads[s] for s in kids])
    idx = kids.index(t)
    return {v: iso[mapping[idx][v]] for v in range(child.n)}


def _labeled_iso(a, b):
    ca = [tuple(sorted(z for z, v in a.labels.items() if v == x)) for x in range(a.n)]
    cb = [tuple(sorted(z for z, v in b.labels.items() if v == x)) for x in range(b.n)]
    iso = find_isomorphism(a.graph, b.graph, ca, cb)
    if iso is None:
        raise DecompositionError("payloads are not label-isomorphic")
    return iso


def _product_vertex_map(gs):
    """Vertex maps from each factor into product_all(gs), mirroring graphs.product."""
    acc = LabeledGraph(Graph(0))
    acc_map = []
    for g in gs:
        before = acc
        acc = product(before, g)
        old, new = _merge_maps(before, g, acc)
        acc_map = [{v: old[m[v]] for v in m} for m in acc_map]
        acc_map.append({v: new[v] for v in range(g.n)})
    return acc_map


def _merge_maps(a, b, prod):
    n = a.n + b.n
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    labels = {}
    for z, v in a.labels.items():
        labels.setdefault(z, []).append(v)
    for z, v in b.labels.items():
        labels.setdefault(z, []).append(v + a.n)
    for vs in labels.values():
        for w in vs[1:]:
            rx, ry = find(vs[0]), find(w)
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)
    roots = sorted({find(x) for x in range(n)})
    pos = {r: i for i, r in enumerate(roots)}
    return ({v: pos[find(v)] for v in range(a.n)}, {v: pos[find(v + a.n)] for v in range(b.n)})


def cover_to_construction(fc, g):
    d = cover_to_decomposition(fc, g)
    return decomposition_to_construction(d, g, fc.k1, fc.k2)


def convert(src, dst_kind, g=None, k1=None, k2=None):
    """Convert between decompositions ('decomposition'), covers ('cover') and construction trees ('construction')."""
    if isinstance(src, ForestCover):
        if dst_kind == "decomposition":
            return cover_to_decomposition(src, g)
        if dst_kind == "construction":
            return cover_to_construction(src, g)
    elif isinstance(src, RootedDecomposition):
        if dst_kind == "cover":
            return decomposition_to_cover(src, g, k1, k2)
        if dst_kind == "construction":
            return decomposition_to_construction(src, g, k1, k2)
        if dst_kind == "nice":
            return make_nice(src, g, k1, k2)
    elif isinstance(src, ConstructionTree):
        if dst_kind == "decomposition":
            return construction_to_decomposition(src, k1, k2)
        if dst_kind == "cover":
            d = construction_to_decomposition(src, k1, k2)
            return decomposition_to_cover(d, g or src.target().graph, k1, k2)
    raise DecompositionError(f"cannot convert {type(src).__name__} to {dst_kind}")


# ---------------------------------------------------------------- hom evaluation

def _leaf_table(f, g):
    """Homomorphisms of a fully labeled graph, keyed by the image of each label."""
    labels = list(f.labels)
    out = {}
    vs = sorted(f.image())
    for img in cartesian(range(g.n), repeat=len(vs)):
        m = dict(zip(vs, img))
        if all(g.graph.has_edge(m[u], m[v]) for u, v in f.graph.edges):
            out[tuple(m[f.labels[z]] for z in labels)] = 1
    return labels, out


def eval_hom_via_construction(ct, g):
    """hom(target, g) by summing out one eliminated label at a time and multiplying at products."""
    if not isinstance(g, LabeledGraph):
        g = LabeledGraph(g)
    tables = {}
    for t in ct.postorder():
        kids = ct.children(t)
        if not kids:
            tables[t] = _leaf_table(ct.payloads[t], g)
        elif len(kids) == 1:
            labels, tab = tables.pop(kids[0])
            z = ct.eliminated[t]
            i = labels.index(z)
            out = {}
            for key, c in tab.items():
                k = key[:i] + key[i + 1:]
                out[k] = out.get(k, 0) + c
            tables[t] = (labels[:i] + labels[i + 1:], out)
        else:
            labels, tab = tables.pop(kids[0])
            for s in kids[1:]:
                labels, tab = _join(labels, tab, *tables.pop(s))
            tables[t] = (labels, tab)
    labels, tab = tables[ct.root]
    missing = set(labels) - set(g.labels)
    if missing:
        raise ValueError(f"labels {sorted(missing)} of the target are not assigned in g")
    key = tuple(g.labels[z] for z in labels)
    return tab.get(key, 0)


def _join(la, ta, lb, tb):
    common = [z for z in la if z in lb]
    ia = [la.index(z) for z in common]
    ib = [lb.index(z) for z in common]
    extra = [i for i, z in enumerate(lb) if z not in la]
    index = {}
    for key, c in tb.items():
        index.setdefault(tuple(key[i] for i in ib), []).append((key, c))
    out = {}
    for key, c in ta.items():
        for kb, cb in index.get(tuple(key[i] for i in ia), ()):
            k = key + tuple(kb[i] for i in extra)
            out[k] = out.get(k, 0) + c * cb
    return la + [lb[i] for i in extra], out


# ---------------------------------------------------------------- io

def decomposition_to_json(d):
    out = {
        "kind": d.kind,
        "parent": list(d.parent),
        "bags": [sorted(b) for b in d.bags],
    }
    if d.component_exceptions is not None:
        out["component_exceptions"] = [
            {"component": sorted(c), "exceptions": sorted(s)} for c, s in sorted(d.component_exceptions.items(), key=lambda t: min(t[0]))
        ]
    else:
        out["exceptions"] = {str(t): sorted(s) for t, s in sorted(d.exceptions.items())}
    return out


def decomposition_from_json(obj):
    if "component_exceptions" in obj:
        cexc = {_fs(e["component"]): _fs(e["exceptions"]) for e in obj["component_exceptions"]}
        return RootedDecomposition(obj["parent"], obj["bags"], obj.get("kind", "path"), None, cexc)
    exc = {int(t): s for t, s in obj.get("exceptions", {}).items()}
    return RootedDecomposition(obj["parent"], obj["bags"], obj.get("kind", "tree"), exc)


def cover_to_json(fc):
    return {"variant": fc.variant, "k1": fc.k1, "k2": fc.k2, "parent": list(fc.parent), "pebbles": list(fc.pebbles)}


def cover_from_json(obj):
    return ForestCover(obj["parent"], obj["pebbles"], obj["k1"], obj["k2"], obj.get("variant", "tree"))


def decomposition_to_dot(d):
    lines = ["graph T {"]
    for t, b in enumerate(d.bags):
        extra = ""
        if d.component_exceptions is None and t in d.exceptions and d.exceptions[t]:
            extra = " S=" + ",".join(map(str, sorted(d.exceptions[t])))
        lines.append(f'  t{t} [label="{{{",".join(map(str, sorted(b)))}}}{extra}"];')
    for t, p in enumerate(d.parent):
        if p != -1:
            lines.append(f"  t{p} -- t{t};")
    lines.append("}")
    return "\n".join(lines)
