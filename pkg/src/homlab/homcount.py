"""Homomorphism counts, linear combinations of labeled graphs, spasm and sub."""
from fractions import Fraction

from .graphs import Graph, IsoBucket, LabeledGraph, from_json, labeled_isomorphic, loopless_product, popcount, to_json


def _as_labeled(g):
    return g if isinstance(g, LabeledGraph) else LabeledGraph(g)


def _search_order(f, pinned):
    order, placed = [], 0
    left = set(range(f.n)) - set(pinned)
    while left:
        v = max(left, key=lambda v: (popcount(f.adj[v] & placed), f.degree(v), -v))
        order.append(v)
        placed |= 1 << v
        left.discard(v)
    return order


def _pins(f, g):
    missing = f.label_set - g.label_set
    if missing:
        raise ValueError(f"labels {sorted(missing)} of the pattern are not assigned in the target")
    pins = {}
    for z, v in f.labels.items():
        w = g.labels[z]
        if pins.setdefault(v, w) != w:
            return None
    return pins


def hom_count(f, g, injective=False):
    """Number of homomorphisms f -> g that respect the labels of f."""
    f, g = _as_labeled(f), _as_labeled(g)
    pins = _pins(f, g)
    if pins is None:
        return 0
    F, G = f.graph, g.graph
    for u, v in F.edges:
        if u in pins and v in pins and not G.has_edge(pins[u], pins[v]):
            return 0
    if injective and len(set(pins.values())) != len(pins):
        return 0
    if not injective:
        # unpinned parts that only meet through pinned vertices are counted separately
        free = [v for v in range(F.n) if v not in pins]
        total = 1
        seen = set()
        for v in free:
            if v in seen:
                continue
            comp, stack = {v}, [v]
            while stack:
                u = stack.pop()
                for w in F.neighbors(u):
                    if w not in pins and w not in comp:
                        comp.add(w)
                        stack.append(w)
            seen |= comp
            total *= _count(F, G, pins, comp, False)
            if total == 0:
                return 0
        return total
    return _count(F, G, pins, set(range(F.n)) - set(pins), True)


def _count(F, G, pins, part, injective):
    full = (1 << G.n) - 1
    order = [v for v in _search_order(F, pins) if v in part]
    if not order:
        return 1
    # candidate mask for each free vertex given pinned neighbours
    base = []
    for v in order:
        mask = full
        for u in F.neighbors(v):
            if u in pins:
                mask &= G.adj[pins[u]]
        base.append(mask)
    pos = {v: i for i, v in enumerate(order)}
    earlier = [[pos[u] for u in F.neighbors(v) if u in pos and pos[u] < i] for i, v in enumerate(order)]
    used0 = 0
    for w in pins.values():
        used0 |= 1 << w
    image = [0] * len(order)
    last = len(order) - 1
    adj = G.adj

    def rec(i, used):
        mask = base[i]
        for j in earlier[i]:
            mask &= adj[image[j]]
        if injective:
            mask &= ~used
        if i == last:
            return popcount(mask)
        total = 0
        while mask:
            low = mask & -mask
            w = low.bit_length() - 1
            image[i] = w
            total += rec(i + 1, used | low)
            mask ^= low
        return total

    return rec(0, used0)


def inj_count(f, g):
    return hom_count(f, g, injective=True)


def aut_count(f):
    return inj_count(f, f)


def sub_count(f, g):
    """Number of subgraphs of g isomorphic to f, by enumerating embeddings."""
    return inj_count(f, g) // aut_count(f)


class LinComb:
    """Finite rational combination of labeled graphs; equal terms are merged."""

    __slots__ = ("terms", "trees")

    def __init__(self, terms=()):
        self.trees = None
        acc = {}
        for c, g in terms:
            g = _as_labeled(g)
            c = Fraction(c)
            acc[g] = acc.get(g, 0) + c
        self.terms = [(c, g) for g, c in acc.items() if c != 0]

    @classmethod
    def of(cls, g, coef=1):
        return cls([(coef, g)])

    @property
    def labels(self):
        out = set()
        for _, g in self.terms:
            out |= g.label_set
        return frozenset(out)

    def __add__(self, other):
        return LinComb(self.terms + other.terms)

    def __neg__(self):
        return LinComb([(-c, g) for c, g in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        return LinComb([(k * c, g) for c, g in self.terms])

    def __mul__(self, other):
        out = []
        for c, f in self.terms:
            for d, g in other.terms:
                fg = loopless_product(f, g)
                if fg is not None:
                    out.append((c * d, fg))
        return LinComb(out)

    def reduce(self):
        """Merge terms whose graphs are isomorphic as labeled graphs."""
        buckets = {}
        for c, g in self.terms:
            sig = (g.n, g.graph.m, tuple(sorted(g.graph.degrees())),
                   tuple((z, g.graph.degree(v)) for z, v in g.labels.items()))
            for entry in buckets.setdefault(sig, []):
                if labeled_isomorphic(entry[1], g):
                    entry[0] += c
                    break
            else:
                buckets[sig].append([c, g])
        return LinComb([(c, g) for entries in buckets.values() for c, g in entries])

    def map_graphs(self, fn):
        return LinComb([(c, fn(g)) for c, g in self.terms])

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return "LinComb(" + " + ".join(f"{c}*{g!r}" for c, g in self.terms) + ")"


def hom_lincomb(lc, g):
    g = _as_labeled(g)
    return sum((c * hom_count(f, g) for c, f in lc.terms), Fraction(0))


def power(f, j):
    """Label-preserving j-th power of f; the 0th power is the vertex-only graph on the labeled vertices."""
    img = sorted(f.image())
    pos = {v: i for i, v in enumerate(img)}
    out = LabeledGraph(Graph(len(img)), {z: pos[v] for z, v in f.labels.items()})
    for _ in range(j):
        out = loopless_product(out, f)
        if out is None:
            raise ValueError("power of a graph whose labels collapse an edge")
    return out


def interpolate(f, s_minus, s_plus):
    """Combination of powers of f that is 1 where hom(f, .) is in s_plus and 0 where it is in s_minus."""
    coeffs = interpolation_coefficients(s_minus, s_plus)
    return LinComb([(c, power(f, j)) for j, c in enumerate(coeffs) if c != 0])


def interpolation_coefficients(s_minus, s_plus):
    """Monomial coefficients of the polynomial that is 0 on s_minus and 1 on s_plus."""
    s_minus = [Fraction(x) for x in sorted(set(s_minus))]
    s_plus = [Fraction(x) for x in sorted(set(s_plus))]
    if set(s_minus) & set(s_plus):
        raise ValueError("the two value sets overlap")
    points = s_minus + s_plus
    coeffs = [Fraction(0)] * len(points)
    for a in s_plus:
        # Lagrange basis polynomial for a, expanded in monomials
        basis = [Fraction(1)]
        denom = Fraction(1)
        for b in points:
            if b == a:
                continue
            basis = [Fraction(0)] + basis
            for i in range(len(basis) - 1):
                basis[i] -= b * basis[i + 1]
            denom *= a - b
        for i, c in enumerate(basis):
            coeffs[i] += c / denom
    return coeffs


def _rgs(n):
    """Set partitions of range(n) as restricted-growth strings."""
    if n == 0:
        yield []
        return
    a = [0] * n

    def rec(i, mx):
        if i == n:
            yield list(a)
            return
        for b in range(mx + 2):
            a[i] = b
            yield from rec(i + 1, max(mx, b))

    a[0] = 0
    yield from rec(1, 0)


def quotients(f):
    """Yield (block assignment, quotient graph) for every partition without adjacent merges."""
    for blocks in _rgs(f.n):
        if any(blocks[u] == blocks[v] for u, v in f.edges):
            continue
        k = max(blocks) + 1 if blocks else 0
        yield blocks, Graph(k, {(min(blocks[u], blocks[v]), max(blocks[u], blocks[v])) for u, v in f.edges})


def spasm(f):
    bucket = IsoBucket()
    for _, q in quotients(f):
        bucket.add(q)
    return sorted(bucket.items, key=lambda g: (-g.n, -g.m, g.adj))


def _solve(matrix, rhs):
    n = len(rhs)
    a = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ArithmeticError("singular evaluation matrix")
        a[col], a[piv] = a[piv], a[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col] / a[col][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]


def sub_coefficients(f):
    """Rational alpha over spasm(f) with sub(f, G) = sum alpha(F) hom(F, G) for every G."""
    members = spasm(f)
    matrix = [[Fraction(hom_count(F, G)) for F in members] for G in members]
    rhs = [Fraction(sub_count(f, G)) for G in members]
    alpha = _solve(matrix, rhs)
    return LinComb([(a, F) for a, F in zip(alpha, members) if a != 0])


def sub_via_hom(f, g, coeffs=None):
    lc = coeffs or sub_coefficients(f)
    return hom_lincomb(lc, g)


def hom_profile(family, g):
    return [hom_count(f, g) for f in family]


def lincomb_to_json(lc):
    return [{"coef": f"{c.numerator}/{c.denominator}", "graph": to_json(g)} for c, g in lc.terms]


def lincomb_from_json(items):
    return LinComb([(Fraction(d["coef"]), from_json(d["graph"])) for d in items])
