from itertools import combinations, permutations, product

from hypothesis import strategies as st

from homlab.graphs import Graph, LabeledGraph


def brute_hom(f, g, injective=False):
    """Count label-respecting maps V(f) -> V(g) directly, with no pruning."""
    if not isinstance(f, LabeledGraph):
        f = LabeledGraph(f)
    if not isinstance(g, LabeledGraph):
        g = LabeledGraph(g)
    total = 0
    for img in product(range(g.n), repeat=f.n):
        if injective and len(set(img)) != f.n:
            continue
        if any(img[v] != g.labels[z] for z, v in f.labels.items()):
            continue
        if all(g.graph.has_edge(img[u], img[v]) for u, v in f.graph.edges):
            total += 1
    return total


def brute_sub(f, g):
    """Subgraphs of g isomorphic to f: edge subsets of g checked against f by permutation."""
    if any(f.degree(v) == 0 for v in range(f.n)):
        raise ValueError("pattern must have no isolated vertices")
    if f.n > g.n:
        return 0
    seen = set()
    for vs in combinations(range(g.n), f.n):
        for perm in permutations(vs):
            es = frozenset((min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in f.edges)
            if all(g.has_edge(u, v) for u, v in es):
                seen.add(es)
    return len(seen)


def brute_iso(g, h):
    if g.n != h.n or g.m != h.m:
        return False
    return any(all(h.has_edge(p[u], p[v]) for u, v in g.edges) for p in permutations(range(h.n)))


def vertex_separation(g):
    """Pathwidth via the vertex separation number over all orderings (n <= 7)."""
    if g.n == 0:
        return -1
    best = g.n
    for order in permutations(range(g.n)):
        width = 0
        for i in range(g.n):
            left = set(order[:i + 1])
            width = max(width, sum(1 for v in left if any(u not in left for u in g.neighbors(v))))
        best = min(best, width)
    return best


@st.composite
def graphs(draw, min_n=0, max_n=6):
    n = draw(st.integers(min_n, max_n))
    pairs = list(combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, [e for e, keep in zip(pairs, mask) if keep])


@st.composite
def connected_graphs(draw, min_n=1, max_n=5):
    g = draw(graphs(min_n=min_n, max_n=max_n))
    # attach every component to vertex 0 so the result is connected
    edges = set(g.edges)
    for c in g.components()[1:]:
        v = (c & -c).bit_length() - 1
        edges.add((0, v))
    return Graph(g.n, edges)


@st.composite
def labeled_graphs(draw, labels=("x1", "x2", "y1"), min_n=1, max_n=4):
    g = draw(graphs(min_n=min_n, max_n=max_n))
    chosen = {}
    for z in labels:
        v = draw(st.one_of(st.none(), st.integers(0, g.n - 1)))
        if v is not None:
            chosen[z] = v
    return LabeledGraph(g, chosen)
