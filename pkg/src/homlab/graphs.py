"""Finite graphs, labeled graphs and relational structures.

Vertices are the integers 0..n-1 and adjacency is kept as one int bitset
per vertex.  Everything here is immutable.
"""
from itertools import combinations


def pebble_names(k1, k2):
    return [f"x{i}" for i in range(1, k1 + 1)] + [f"y{i}" for i in range(1, k2 + 1)]


def is_reusable(z):
    return z.startswith("x")


def pebble_key(z):
    # x-block first, then y-block, then anything else (tally labels)
    order = {"x": 0, "y": 1}.get(z[0], 2)
    digits = z[1:]
    return (order, z[0], int(digits) if digits.isdigit() else 0, z)


class PebbleAlphabet:
    __slots__ = ("k1", "k2")

    def __init__(self, k1, k2):
        if k1 < 0 or k2 < 0 or k1 + k2 < 1:
            raise ValueError(f"bad pebble alphabet ({k1}, {k2})")
        self.k1 = k1
        self.k2 = k2

    @property
    def x(self):
        return [f"x{i}" for i in range(1, self.k1 + 1)]

    @property
    def y(self):
        return [f"y{i}" for i in range(1, self.k2 + 1)]

    @property
    def pebbles(self):
        return self.x + self.y

    def __contains__(self, z):
        return z in self.pebbles

    def __eq__(self, other):
        return isinstance(other, PebbleAlphabet) and (self.k1, self.k2) == (other.k1, other.k2)

    def __hash__(self):
        return hash((self.k1, self.k2))

    def __repr__(self):
        return f"PebbleAlphabet({self.k1}, {self.k2})"


class Graph:
    """Simple undirected graph on 0..n-1."""

    __slots__ = ("n", "adj", "_edges")

    def __init__(self, n, edges=()):
        if n < 0:
            raise ValueError("negative vertex count")
        adj = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        self.n = n
        self.adj = tuple(adj)
        self._edges = None

    @classmethod
    def from_adj(cls, adj):
        g = cls.__new__(cls)
        g.n = len(adj)
        g.adj = tuple(adj)
        g._edges = None
        return g

    @property
    def edges(self):
        if self._edges is None:
            self._edges = frozenset(
                (u, v) for u in range(self.n) for v in range(u + 1, self.n) if self.adj[u] >> v & 1
            )
        return self._edges

    def sorted_edges(self):
        return sorted(self.edges)

    @property
    def m(self):
        return sum(bin(a).count("1") for a in self.adj) // 2

    def has_edge(self, u, v):
        return bool(self.adj[u] >> v & 1)

    def neighbors(self, v):
        return bits(self.adj[v])

    def degree(self, v):
        return bin(self.adj[v]).count("1")

    def degrees(self):
        return [self.degree(v) for v in range(self.n)]

    def vertices(self):
        return range(self.n)

    def induced(self, vs):
        """Induced subgraph on vs, renumbered in the given order."""
        vs = list(vs)
        pos = {v: i for i, v in enumerate(vs)}
        return Graph(len(vs), [(pos[u], pos[v]) for u, v in self.edges if u in pos and v in pos])

    def delete_vertices(self, vs):
        drop = set(vs)
        return self.induced([v for v in range(self.n) if v not in drop])

    def components(self):
        seen = 0
        comps = []
        for s in range(self.n):
            if seen >> s & 1:
                continue
            comp = 1 << s
            frontier = comp
            while frontier:
                nxt = 0
                for v in bits(frontier):
                    nxt |= self.adj[v]
                frontier = nxt & ~comp
                comp |= nxt
            seen |= comp
            comps.append(comp)
        return comps

    def is_connected(self):
        return self.n == 0 or len(self.components()) == 1

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self):
        return hash((self.n, self.adj))

    def __repr__(self):
        return f"Graph({self.n}, {self.sorted_edges()})"


def bits(mask):
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def popcount(mask):
    return bin(mask).count("1")


def complete(n):
    return Graph(n, combinations(range(n), 2))


def cycle(n):
    if n < 3:
        raise ValueError("cycles need at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path(n):
    """Path with n vertices."""
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def empty(n):
    return Graph(n)


def star(leaves):
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def grid(r, c):
    idx = lambda i, j: i * c + j
    es = [(idx(i, j), idx(i, j + 1)) for i in range(r) for j in range(c - 1)]
    es += [(idx(i, j), idx(i + 1, j)) for i in range(r - 1) for j in range(c)]
    return Graph(r * c, es)


def disjoint_union(*gs):
    edges, off = [], 0
    for g in gs:
        edges += [(u + off, v + off) for u, v in g.edges]
        off += g.n
    return Graph(off, edges)


class LabeledGraph:
    """A graph with a partial map from labels to vertices (missing = unlabeled)."""

    __slots__ = ("graph", "labels")

    def __init__(self, graph, labels=None):
        labels = dict(labels or {})
        for z, v in labels.items():
            if v is None:
                continue
            if not 0 <= v < graph.n:
                raise ValueError(f"label {z} targets missing vertex {v}")
        self.graph = graph
        self.labels = {z: v for z, v in sorted(labels.items(), key=lambda t: pebble_key(t[0])) if v is not None}

    @property
    def n(self):
        return self.graph.n

    @property
    def label_set(self):
        return frozenset(self.labels)

    def image(self):
        return frozenset(self.labels.values())

    def is_fully_labeled(self):
        return len(self.image()) == self.graph.n

    def key(self):
        return (self.graph, tuple(self.labels.items()))

    def __eq__(self, other):
        return isinstance(other, LabeledGraph) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"LabeledGraph({self.graph!r}, {self.labels})"


def unlabeled(g):
    return LabeledGraph(g, {})


def product(a, b):
    """Disjoint union of a and b with equally labeled vertices identified.

    Edges that would become loops are dropped; use `loopless_product` when
    that matters for homomorphism counts.
    """
    return _product(a, b)[0]


def loopless_product(a, b):
    """Like `product`, but None when an edge collapses to a loop (no homomorphisms into simple graphs)."""
    g, looped = _product(a, b)
    return None if looped else g


def _product(a, b):
    # union-find over the n_a + n_b vertices
    n = a.n + b.n
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    labels = {}
    for z, v in a.labels.items():
        labels.setdefault(z, []).append(v)
    for z, v in b.labels.items():
        labels.setdefault(z, []).append(v + a.n)
    for vs in labels.values():
        for w in vs[1:]:
            union(vs[0], w)
    # labels on the same vertex of a also merge the partner vertices in b
    roots = sorted({find(x) for x in range(n)})
    new = {r: i for i, r in enumerate(roots)}
    edges = set()
    for u, v in a.graph.edges:
        edges.add((u, v))
    for u, v in b.graph.edges:
        edges.add((u + a.n, v + a.n))
    merged, looped = set(), False
    for u, v in edges:
        x, y = new[find(u)], new[find(v)]
        if x != y:
            merged.add((min(x, y), max(x, y)))
        else:
            looped = True
    return LabeledGraph(Graph(len(roots), merged), {z: new[find(vs[0])] for z, vs in labels.items()}), looped


def product_all(gs):
    out = LabeledGraph(Graph(0))
    for g in gs:
        out = product(out, g)
    return out


def relabel(g, z, v):
    """Return g with label z moved to v (v=None removes it)."""
    if v is not None and not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    labels = dict(g.labels)
    if v is None:
        labels.pop(z, None)
    else:
        labels[z] = v
    return LabeledGraph(g.graph, labels)


def relabel_seq(g, zs, vs):
    for z, v in zip(zs, vs):
        g = relabel(g, z, v)
    return g


def drop_isolated_unlabeled(g):
    """Remove unlabeled isolated vertices (used for canonical leaf shapes)."""
    keep = [v for v in range(g.n) if g.graph.adj[v] or v in g.image()]
    pos = {v: i for i, v in enumerate(keep)}
    return LabeledGraph(g.graph.induced(keep), {z: pos[v] for z, v in g.labels.items()})


# ---------------------------------------------------------------- isomorphism

def _refine(graphs, colors):
    """Joint colour refinement on several graphs; returns stable colours."""
    while True:
        sigs = []
        for g, col in zip(graphs, colors):
            sigs.append([(col[v], tuple(sorted(col[u] for u in g.neighbors(v)))) for v in range(g.n)])
        palette = {s: i for i, s in enumerate(sorted({s for sig in sigs for s in sig}))}
        new = [[palette[s] for s in sig] for sig in sigs]
        if all(len(set(a)) == len(set(b)) for a, b in zip(new, colors)):
            return new
        colors = new


def find_isomorphism(g, h, g_colors=None, h_colors=None):
    """Return a vertex map g -> h preserving edges (and colours), or None."""
    if g.n != h.n or g.m != h.m or sorted(g.degrees()) != sorted(h.degrees()):
        return None
    gc = list(g_colors) if g_colors is not None else [0] * g.n
    hc = list(h_colors) if h_colors is not None else [0] * h.n
    base = {c: i for i, c in enumerate(sorted(set(gc) | set(hc), key=repr))}
    gc, hc = _refine([g, h], [[base[c] for c in gc], [base[c] for c in hc]])
    if sorted(gc) != sorted(hc):
        return None
    # most constrained first: small colour classes, then connectivity to placed ones
    size = {}
    for c in gc:
        size[c] = size.get(c, 0) + 1
    order, placed = [], 0
    remaining = set(range(g.n))
    while remaining:
        v = min(remaining, key=lambda v: (-popcount(g.adj[v] & placed), size[gc[v]], -g.degree(v), v))
        order.append(v)
        placed |= 1 << v
        remaining.discard(v)
    cand = {c: [w for w in range(h.n) if hc[w] == c] for c in set(hc)}
    mapping = [-1] * g.n
    used = [False] * h.n

    def extend(i):
        if i == len(order):
            return True
        v = order[i]
        for w in cand.get(gc[v], ()):
            if used[w]:
                continue
            ok = True
            for u in order[:i]:
                if g.has_edge(u, v) != h.has_edge(mapping[u], w):
                    ok = False
                    break
            if ok:
                mapping[v] = w
                used[w] = True
                if extend(i + 1):
                    return True
                used[w] = False
        mapping[v] = -1
        return False

    if not extend(0):
        return None
    for u, v in g.edges:
        assert h.has_edge(mapping[u], mapping[v])
    assert len(set(mapping)) == g.n
    return dict(enumerate(mapping))


def are_isomorphic(g, h):
    """(True, witness) if g and h are isomorphic, otherwise (False, None)."""
    iso = find_isomorphism(g, h)
    return (iso is not None), iso


def labeled_isomorphic(a, b):
    """Isomorphism of labeled graphs that respects every label."""
    if a.label_set != b.label_set:
        return False
    ca = [tuple(sorted(z for z, v in a.labels.items() if v == x)) for x in range(a.n)]
    cb = [tuple(sorted(z for z, v in b.labels.items() if v == x)) for x in range(b.n)]
    return find_isomorphism(a.graph, b.graph, ca, cb) is not None


def invariant(g):
    """Cheap isomorphism invariant used to bucket graphs before exact checks."""
    col = _refine([g], [[0] * g.n])[0]
    sig = sorted((g.degree(v), tuple(sorted(g.degree(u) for u in g.neighbors(v)))) for v in range(g.n))
    hist = sorted(col.count(c) for c in set(col))
    return (g.n, g.m, tuple(sig), tuple(hist))


class IsoBucket:
    """Set of graphs up to isomorphism."""

    def __init__(self):
        self._buckets = {}
        self.items = []

    def add(self, g):
        key = invariant(g)
        bucket = self._buckets.setdefault(key, [])
        for h in bucket:
            if find_isomorphism(g, h) is not None:
                return False
        bucket.append(g)
        self.items.append(g)
        return True

    def __contains__(self, g):
        return any(find_isomorphism(g, h) is not None for h in self._buckets.get(invariant(g), ()))

    def __len__(self):
        return len(self.items)


def enumerate_graphs(n_max, connected=False, n_min=1):
    """One representative per isomorphism class on n_min..n_max vertices."""
    out = []
    level = [Graph(0)]
    for n in range(1, n_max + 1):
        bucket = IsoBucket()
        for g in level:
            for nb in range(1 << g.n):
                adj = list(g.adj) + [nb]
                for v in bits(nb):
                    adj[v] |= 1 << g.n
                bucket.add(Graph.from_adj(adj))
        level = bucket.items
        if n >= n_min:
            out += [g for g in level if not connected or g.is_connected()]
    return out


# ---------------------------------------------------------------- structures

class RelStructure:
    """Finite relational structure: universe 0..size-1 plus named relations."""

    __slots__ = ("size", "relations")

    def __init__(self, size, relations=None):
        rels = {}
        for name, (arity, tuples) in (relations or {}).items():
            ts = set()
            for t in tuples:
                t = tuple(t)
                if len(t) != arity:
                    raise ValueError(f"tuple {t} has wrong arity for {name}/{arity}")
                if any(not 0 <= a < size for a in t):
                    raise ValueError(f"tuple {t} out of range")
                ts.add(t)
            rels[name] = (arity, frozenset(ts))
        self.size = size
        self.relations = rels

    @classmethod
    def from_graph(cls, g):
        es = [(u, v) for u, v in g.edges] + [(v, u) for u, v in g.edges]
        return cls(g.n, {"E": (2, es)})

    def holds(self, name, t):
        return tuple(t) in self.relations[name][1]

    def __repr__(self):
        return f"RelStructure({self.size}, {self.relations})"


def gaifman(a):
    edges = set()
    for _, tuples in a.relations.values():
        for t in tuples:
            for u, v in combinations(set(t), 2):
                edges.add((min(u, v), max(u, v)))
    return Graph(a.size, edges)


def minor_step(g, op, target):
    """Apply one minor operation: delete-vertex v, delete-edge (u,v), contract-edge (u,v)."""
    if op == "delete-vertex":
        if not 0 <= target < g.n:
            raise ValueError(f"no vertex {target}")
        return g.delete_vertices([target])
    u, v = target
    if not (0 <= u < g.n and 0 <= v < g.n and g.has_edge(u, v)):
        raise ValueError(f"no edge {target}")
    if op == "delete-edge":
        return Graph(g.n, [e for e in g.edges if e != (min(u, v), max(u, v))])
    if op == "contract-edge":
        keep, gone = min(u, v), max(u, v)
        rest = [x for x in range(g.n) if x != gone]
        pos = {x: i for i, x in enumerate(rest)}
        pos[gone] = pos[keep]
        es = {(min(pos[a], pos[b]), max(pos[a], pos[b])) for a, b in g.edges}
        return Graph(len(rest), [(a, b) for a, b in es if a != b])
    raise ValueError(f"unknown minor operation {op!r}")


# ---------------------------------------------------------------- io

def to_json(g):
    if isinstance(g, Graph):
        g = LabeledGraph(g)
    return {"n": g.n, "edges": [list(e) for e in g.graph.sorted_edges()], "labels": dict(g.labels)}


def from_json(d):
    return LabeledGraph(Graph(d["n"], [tuple(e) for e in d.get("edges", [])]), d.get("labels", {}))


def parse_graph6(s):
    s = s.strip()
    if s.startswith(">>graph6<<"):
        s = s[10:]
    if not s:
        raise ValueError("empty graph6 string")
    data = [ord(c) - 63 for c in s]
    for i, x in enumerate(data):
        if not 0 <= x < 64:
            raise ValueError(f"invalid graph6 character {s[i]!r} at position {i}")
    if data[0] < 63:
        n, data = data[0], data[1:]
    elif len(data) > 1 and data[1] < 63:
        n = (data[1] << 12) | (data[2] << 6) | data[3]
        data = data[4:]
    else:
        n = 0
        for x in data[2:8]:
            n = (n << 6) | x
        data = data[8:]
    need = (n * (n - 1) // 2 + 5) // 6
    if len(data) != need:
        raise ValueError(f"graph6 payload length {len(data)} != {need}")
    stream = []
    for x in data:
        stream += [(x >> (5 - i)) & 1 for i in range(6)]
    if any(stream[n * (n - 1) // 2:]):
        raise ValueError("graph6 padding bits are not zero")
    edges, k = [], 0
    for v in range(1, n):
        for u in range(v):
            if stream[k]:
                edges.append((u, v))
            k += 1
    return Graph(n, edges)


def to_graph6(g):
    n = g.n
    if n < 63:
        head = [n]
    elif n < 258048:
        head = [63, (n >> 12) & 63, (n >> 6) & 63, n & 63]
    else:
        head = [63, 63] + [(n >> (6 * i)) & 63 for i in range(5, -1, -1)]
    stream = [int(g.has_edge(u, v)) for v in range(1, n) for u in range(v)]
    stream += [0] * (-len(stream) % 6)
    body = [int("".join(map(str, stream[i:i + 6])), 2) for i in range(0, len(stream), 6)]
    return "".join(chr(x + 63) for x in head + body)


def to_dot(g, name="G"):
    if isinstance(g, Graph):
        g = LabeledGraph(g)
    lines = [f"graph {name} {{"]
    tags = {}
    for z, v in g.labels.items():
        tags.setdefault(v, []).append(z)
    for v in range(g.n):
        if v in tags:
            lines.append(f'  {v} [label="{v}:{",".join(tags[v])}"];')
        else:
            lines.append(f"  {v};")
    for u, v in g.graph.sorted_edges():
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines)
