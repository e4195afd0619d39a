"""CFI graphs over a connected base graph and the twist-moving isomorphisms."""
from itertools import combinations

from .graphs import Graph, are_isomorphic


class TheoremViolation(AssertionError):
    """Raised when a check that must always hold fails."""


class CfiGraph:
    """X_U(base).  Vertex i is `vertices[i] = (v, S)` with S a bitmask over base edge indices."""

    def __init__(self, base, twist, vertices, graph):
        self.base = base
        self.twist = frozenset(twist)
        self.vertices = vertices
        self.graph = graph
        self.index = {vs: i for i, vs in enumerate(vertices)}
        self.edge_index = {e: i for i, e in enumerate(base.sorted_edges())}

    def rho(self, i):
        return self.vertices[i][0]

    def gadget(self, v):
        return [i for i, (w, _) in enumerate(self.vertices) if w == v]

    def to_json(self):
        edges = self.base.sorted_edges()
        return {
            "n": self.graph.n,
            "edges": [list(e) for e in self.graph.sorted_edges()],
            "labels": {},
            "gadgets": [{"vertex": v, "subset": [list(edges[j]) for j in range(len(edges)) if s >> j & 1]}
                        for v, s in self.vertices],
            "base": {"n": self.base.n, "edges": [list(e) for e in edges]},
            "twist": sorted(self.twist),
        }


def _incident(base, edge_index, v):
    return [edge_index[(min(v, u), max(v, u))] for u in base.neighbors(v)]


def build_cfi(g, u_set=()):
    if not g.is_connected():
        raise ValueError("CFI graphs need a connected base graph")
    u_set = set(u_set)
    edge_index = {e: i for i, e in enumerate(g.sorted_edges())}
    vertices = []
    for v in range(g.n):
        inc = _incident(g, edge_index, v)
        want = 1 if v in u_set else 0
        for r in range(want, len(inc) + 1, 2):
            for pick in combinations(inc, r):
                vertices.append((v, sum(1 << j for j in pick)))
    edges = []
    for i, (v, s) in enumerate(vertices):
        for j in range(i + 1, len(vertices)):
            u, t = vertices[j]
            if not g.has_edge(u, v):
                continue
            e = edge_index[(min(u, v), max(u, v))]
            if not ((s ^ t) >> e & 1):
                edges.append((i, j))
    return CfiGraph(g, u_set, vertices, Graph(len(vertices), edges))


def cfi_even(g):
    return build_cfi(g, ())


def cfi_odd(g):
    return build_cfi(g, {0})


def parity_check(g, s, t):
    """Isomorphism of X_s(g) and X_t(g); raises TheoremViolation if it disagrees with parity."""
    iso, _ = are_isomorphic(build_cfi(g, s).graph, build_cfi(g, t).graph)
    if iso != (len(set(s)) % 2 == len(set(t)) % 2):
        raise TheoremViolation(f"X_{sorted(s)} vs X_{sorted(t)} on {g!r}: isomorphic={iso}")
    return iso


def twist_iso(g, u, v, path):
    """Isomorphism X_{u}(g) -> X_{v}(g) flipping the path edges in every gadget on the path.

    Returned as a list phi with phi[i] the image of vertex i.
    """
    if not path or path[0] != u or path[-1] != v:
        raise ValueError("path must run from u to v")
    for a, b in zip(path, path[1:]):
        if not g.has_edge(a, b):
            raise ValueError(f"{a}-{b} is not an edge")
    src, dst = build_cfi(g, {u}), build_cfi(g, {v})
    if u == v:
        return list(range(src.graph.n))
    flip = [0] * g.n
    for a, b in zip(path, path[1:]):
        e = 1 << src.edge_index[(min(a, b), max(a, b))]
        flip[a] ^= e
        flip[b] ^= e
    phi = []
    for w, s in src.vertices:
        key = (w, s ^ flip[w])
        if key not in dst.index:
            raise TheoremViolation(f"flip leaves gadget {w} parity class")
        phi.append(dst.index[key])
    _verify_iso(src.graph, dst.graph, phi)
    for i, j in enumerate(phi):
        if src.rho(i) != dst.rho(j):
            raise TheoremViolation("flip does not commute with the projection")
        if flip[src.rho(i)] == 0 and src.vertices[i][1] != dst.vertices[j][1]:
            raise TheoremViolation("flip touched a gadget off the path")
    return phi


def _verify_iso(a, b, phi):
    if a.n != b.n or sorted(phi) != list(range(b.n)):
        raise TheoremViolation("not a bijection")
    if a.m != b.m or any(not b.has_edge(phi[x], phi[y]) for x, y in a.edges):
        raise TheoremViolation("not edge preserving")


def gadget_size(g, v):
    d = g.degree(v)
    return 1 << (d - 1) if d else 1


def expected_order(g, u_set=()):
    """Closed-form vertex count; isolated vertices contribute 1 or 0 by twist."""
    return sum(gadget_size(g, v) if g.degree(v) else int(v not in set(u_set)) for v in range(g.n))

