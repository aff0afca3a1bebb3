"""Graph operads Gra and vKGra.

A graph has type-I vertices 1..m and type-II vertices 1̄..n̄, an ordered list
of odd directed edges and an even decoration v_i^p on each type-I vertex.
Edges always start at a type-I vertex.  Internally a type-II target j̄ is
stored as the integer -j.

Keys are canonical: edges sorted (type-I targets before type-II ones), the
sorting sign goes into the coefficient.  A repeated edge is zero.
"""
import itertools
import json
from collections import namedtuple
from fractions import Fraction

from . import formal as fs
from .operad import ArityMismatch, DgOperad, OperadError, external_delta

__all__ = [
    "Graph", "TadpoleResidue", "canonical", "graph", "perm_parity", "degree",
    "has_tadpole", "insert", "gra_compose", "relabel", "GraphOperad", "Gra",
    "GraTadpoles", "gra_delta", "gra_delta_direct", "MU", "BRACKET", "TADPOLE",
    "IDENTITY", "graph_product", "vkgra_differential", "vkgra_sigma", "sigma_power", "csc_compose",
    "csc_theta_compose", "csc_minus_compose", "insert_boundary", "total_boundary_composition",
    "invariants_project", "bimodule_lie_bracket", "is_invariant", "graded_sigma", "gra_basis",
    "graph_to_json", "graph_from_json", "sum_to_json", "sum_from_json",
]

Graph = namedtuple("Graph", "m n edges v")


class TadpoleResidue(OperadError):
    pass


def _edge_key(e):
    s, t = e
    return (s, 0, t) if t > 0 else (s, 1, -t)


def perm_parity(seq):
    """Parity (0/1) of the permutation sorting ``seq`` (distinct items)."""
    inv = 0
    n = len(seq)
    for a in range(n):
        x = seq[a]
        for b in range(a + 1, n):
            if seq[b] < x:
                inv += 1
    return inv & 1


def canonical(m, n, edges, v=None):
    """(Graph, ±1), or (None, 0) if an edge repeats."""
    keys = [_edge_key(e) for e in edges]
    if len(set(keys)) != len(keys):
        return None, 0
    order = sorted(range(len(edges)), key=keys.__getitem__)
    sign = -1 if perm_parity(order) else 1
    v = tuple(v) if v is not None else (0,) * m
    return Graph(m, n, tuple(edges[k] for k in order), v), sign


def _check_edges(m, n, edges):
    for s, t in edges:
        if not 1 <= s <= m:
            raise ValueError(f"edge source {s} is not a type-I vertex of 1..{m}")
        if t == 0 or t > m or -t > n:
            raise ValueError(f"edge target {t} outside the vertex set")


def graph(m, edges=(), n=0, v=None, coeff=1):
    """Formal sum holding the canonical form of one graph."""
    edges = [tuple(e) for e in edges]
    _check_edges(m, n, edges)
    if v is not None and isinstance(v, dict):
        v = [v.get(i, 0) for i in range(1, m + 1)]
    key, sign = canonical(m, n, edges, v)
    if key is None:
        return {}
    return {key: Fraction(coeff) * sign}


def degree(key):
    return -len(key.edges) - 2 * sum(key.v)


def has_tadpole(key):
    return any(s == t for s, t in key.edges)


MU = graph(2)
IDENTITY = graph(1)
TADPOLE = graph(1, [(1, 1)])
BRACKET = fs.combine((1, graph(2, [(1, 2)])), (1, graph(2, [(2, 1)])))


def _compositions(p, k):
    """All (p_1..p_k) of naturals summing to p."""
    if k == 1:
        yield (p,)
        return
    for first in range(p + 1):
        for rest in _compositions(p - first, k - 1):
            yield (first,) + rest


def insert(x, i, g):
    """x ∘ᵢ g for graph keys: g (no type-II vertices) goes into type-I vertex i."""
    if g.n:
        raise ArityMismatch("the inserted graph must not have type-II vertices")
    if not 1 <= i <= x.m:
        raise ArityMismatch(f"cannot insert at vertex {i} of a graph with {x.m} type-I vertices")
    k = g.m
    shift = k - 1

    def ren(j):
        if j < 0:
            return j
        return j if j < i else j + shift

    slots = list(range(i, i + k))
    options = []
    for s, t in x.edges:
        srcs = slots if s == i else [ren(s)]
        tgts = slots if t == i else [ren(t)]
        options.append([(a, b) for a in srcs for b in tgts])
    g_edges = [(s + i - 1, t + i - 1) for s, t in g.edges]
    xv = x.v
    p = xv[i - 1]
    before = xv[:i - 1]
    after = xv[i:]
    out = {}
    for dist in _compositions(p, k):
        v = before + tuple(a + b for a, b in zip(dist, g.v)) + after
        for choice in itertools.product(*options):
            key, sign = canonical(x.m + shift, x.n, list(choice) + g_edges, v)
            if key is not None:
                fs.add_term(out, key, sign)
    return out


def gra_compose(a, i, b):
    """Bilinear insertion of formal sums of graphs."""
    out = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            fs.add_into(out, insert(ka, i, kb), ca * cb)
    return out


def relabel(key, perm):
    """Type-I vertex j becomes perm[j-1]."""
    perm = tuple(perm)
    if sorted(perm) != list(range(1, key.m + 1)):
        raise ArityMismatch(f"{perm} is not a permutation of 1..{key.m}")
    edges = [(perm[s - 1], perm[t - 1] if t > 0 else t) for s, t in key.edges]
    v = [0] * key.m
    for j, p in enumerate(key.v):
        v[perm[j] - 1] = p
    k, sign = canonical(key.m, key.n, edges, v)
    return {k: Fraction(sign)}


def gra_basis(m, max_edges, tadpoles=False):
    """Canonical graphs on m type-I vertices with at most ``max_edges`` edges."""
    pairs = [(s, t) for s in range(1, m + 1) for t in range(1, m + 1) if tadpoles or s != t]
    out = []
    for e in range(max_edges + 1):
        for combo in itertools.combinations(pairs, e):
            key, _ = canonical(m, 0, list(combo))
            out.append(key)
    return sorted(set(out))


class GraphOperad(DgOperad):
    """Color-one graph operad.  With ``tadpoles`` it is the S¹-operad of all
    graphs whose δ is the one-vertex tadpole."""

    def __init__(self, tadpoles=False, max_edges=3):
        self.tadpoles = tadpoles
        self.max_edges = max_edges
        self.name = "GraTadpoles" if tadpoles else "Gra"

    def arity(self, key):
        return key.m

    def degree(self, key):
        return degree(key)

    def compose_keys(self, a, i, b):
        return insert(a, i, b)

    def act_key(self, key, perm):
        return relabel(key, perm)

    def delta(self):
        return TADPOLE if self.tadpoles else None

    def rho_key(self, key):
        if self.tadpoles:
            return external_delta(self, {key: Fraction(1)})
        return gra_delta({key: Fraction(1)})

    def basis(self, n):
        return gra_basis(n, self.max_edges, self.tadpoles)

    def lie_map(self):
        return BRACKET


Gra = GraphOperad(False)
GraTadpoles = GraphOperad(True)


def gra_delta(a):
    """Δ = {δ, −} computed in the graphs-with-tadpoles operad."""
    for k in a:
        if has_tadpole(k):
            raise ValueError("gra_delta expects tadpole-free graphs")
    out = external_delta(GraTadpoles, a)
    for k in out:
        if has_tadpole(k):
            raise TadpoleResidue(f"tadpole term {k} survived in Δ")
    return out


def gra_delta_direct(a):
    """Add one edge (s, t), s ≠ t, in all ways, as the first edge."""
    out = {}
    for key, c in a.items():
        for s in range(1, key.m + 1):
            for t in range(1, key.m + 1):
                if s != t:
                    k, sign = canonical(key.m, key.n, [(s, t)] + list(key.edges), key.v)
                    if k is not None:
                        fs.add_term(out, k, c * sign)
    return out


# -- vKGra ------------------------------------------------------------------

def vkgra_differential(x):
    """d v_i = Γ^{i,i}; the new tadpole is placed first in the edge order."""
    out = {}
    for key, c in x.items():
        for i, p in enumerate(key.v, start=1):
            if p == 0:
                continue
            v = list(key.v)
            v[i - 1] -= 1
            k, sign = canonical(key.m, key.n, [(i, i)] + list(key.edges), v)
            if k is not None:
                fs.add_term(out, k, c * p * sign)
    return out


def _sigma_edge(e, m, n):
    s, t = e
    if t > 0 or t < -1:
        return [(1, (s, t + 1 if t < 0 else t))]
    terms = [(-1, (s, -k)) for k in range(1, n + 1)]
    terms += [(-1, (s, k)) for k in range(1, m + 1)]
    return terms


def vkgra_sigma(x):
    """Generator of the cyclic ℤ_{n+1} action, extended multiplicatively."""
    out = {}
    for key, c in x.items():
        options = [_sigma_edge(e, key.m, key.n) for e in key.edges]
        for choice in itertools.product(*options):
            coef = c
            for a, _ in choice:
                coef *= a
            k, sign = canonical(key.m, key.n, [e for _, e in choice], key.v)
            if k is not None:
                fs.add_term(out, k, coef * sign)
    return out


def graph_product(a, b):
    """Product in the free graded-commutative algebra on edges and v's:
    union of edge lists (a's first) and sum of v-powers."""
    out = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            if (ka.m, ka.n) != (kb.m, kb.n):
                raise ArityMismatch("product of graphs with different vertex sets")
            v = tuple(x + y for x, y in zip(ka.v, kb.v))
            k, sign = canonical(ka.m, ka.n, list(ka.edges) + list(kb.edges), v)
            if k is not None:
                fs.add_term(out, k, ca * cb * sign)
    return out


def sigma_power(x, j):
    for _ in range(j):
        x = vkgra_sigma(x)
    return x


def csc_compose(x, i, g):
    """Color-two graph x with a Gra element g inserted at type-I vertex i."""
    for k in x:
        if not 1 <= i <= k.m:
            raise ArityMismatch(f"vertex {i} not in 1..{k.m}")
    return gra_compose(x, i, g)


def csc_theta_compose(x, i, g, k):
    """x ∘̃ᵢ (g vᵏ) in the CCᶿ(Gra) action: x ∘ᵢ Δ(g) for k = 0, else 0."""
    if k:
        return {}
    return csc_compose(x, i, gra_delta(g))


def csc_minus_compose(x, i, g, k):
    """x ∘ᵢ (g uᵏ) in the CC⁻(Gra) action: x ∘ᵢ g for k = 0, else 0."""
    if k:
        return {}
    return csc_compose(x, i, g)


def insert_boundary(x, j, y):
    """x ∘_j̄ y: y is plugged into type-II vertex j̄ of x.

    Type-I vertices of y follow those of x; type-II vertices of y take the
    place of j̄.  Edges of x ending at j̄ are reattached to every vertex of y
    (type I or II).  Edges of x come first.
    """
    if not 1 <= j <= x.n:
        raise ArityMismatch(f"type-II vertex {j} not in 1..{x.n}")
    m, n = x.m + y.m, x.n + y.n - 1
    off = x.m
    sh = y.n - 1

    def ren_x(t):
        if t > 0:
            return t
        b = -t
        return -(b if b < j else b + sh)

    def ren_y(t):
        if t > 0:
            return t + off
        return -(-t + j - 1)

    targets = [off + a for a in range(1, y.m + 1)] + [-(j - 1 + b) for b in range(1, y.n + 1)]
    options = []
    for s, t in x.edges:
        if t == -j:
            options.append([(s, tt) for tt in targets])
        else:
            options.append([(s, ren_x(t))])
    y_edges = [(s + off, ren_y(t)) for s, t in y.edges]
    v = x.v + y.v
    out = {}
    for choice in itertools.product(*options):
        k, sign = canonical(m, n, list(choice) + y_edges, v)
        if k is not None:
            fs.add_term(out, k, sign)
    return out


def total_boundary_composition(x, y):
    """Σ_j (−1)^{(j−1)(n_y−1)} x ∘_j̄ y, bilinear."""
    out = {}
    for kx, cx in x.items():
        for ky, cy in y.items():
            for j in range(1, kx.n + 1):
                sgn = -1 if ((j - 1) * (ky.n - 1)) % 2 else 1
                fs.add_into(out, insert_boundary(kx, j, ky), cx * cy * sgn)
    return out


def graded_sigma(x):
    """(−1)ⁿσ: the cyclic generator acting on the suspended Σⁿ vKGra(m, n),
    where the n+1 cyclically permuted slots are odd."""
    return {k: (-c if k.n % 2 else c) for k, c in vkgra_sigma(x).items()}


def _by_shape(x):
    parts = {}
    for k, c in x.items():
        parts.setdefault((k.m, k.n), {})[k] = c
    return parts


def invariants_project(x):
    """Average over ℤ_{n+1} (graded action) in each (m, n) component."""
    out = {}
    for (m, n), part in _by_shape(x).items():
        acc = {}
        cur = part
        for _ in range(n + 1):
            fs.add_into(acc, cur)
            cur = graded_sigma(cur)
        fs.add_into(out, acc, Fraction(1, n + 1))
    return out


def is_invariant(x):
    return fs.difference(graded_sigma(x), x) == {}


def _swap_blocks(key, first):
    """Move the leading block of ``first`` type-I vertices behind the rest."""
    m = key.m
    perm = tuple(list(range(m - first + 1, m + 1)) + list(range(1, m - first + 1)))
    return relabel(key, perm)


def bimodule_lie_bracket(x, y):
    """[x, y] = x∘y − (−1)^{(nₓ−1)(n_y−1) + eₓe_y} τ(y∘x).

    ∘ is the signed total composition along type-II vertices, e counts edges
    and τ moves the type-I vertices of x back in front of those of y.
    """
    out = {}
    for kx, cx in x.items():
        for ky, cy in y.items():
            a, b = {kx: cx}, {ky: cy}
            fs.add_into(out, total_boundary_composition(a, b))
            sgn = (kx.n - 1) * (ky.n - 1) + len(kx.edges) * len(ky.edges)
            yx = total_boundary_composition(b, a)
            for k, c in yx.items():
                fs.add_into(out, _swap_blocks(k, ky.m), c if sgn % 2 else -c)
    return out


# -- JSON -------------------------------------------------------------------

def graph_to_json(key, sign=1):
    edges = [[s, t if t > 0 else f"b{-t}"] for s, t in key.edges]
    v = {str(i): p for i, p in enumerate(key.v, start=1) if p}
    return {"m": key.m, "n": key.n, "edges": edges, "v": v, "sign": int(sign)}


def _read_target(t):
    if isinstance(t, str):
        if not t.startswith("b"):
            raise ValueError(f"bad vertex label {t!r}")
        return -int(t[1:])
    return int(t)


def graph_from_json(obj):
    """Formal sum (one term, coefficient = stored sign after canonicalizing)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    m, n = int(obj["m"]), int(obj.get("n", 0))
    edges = [(int(s), _read_target(t)) for s, t in obj.get("edges", [])]
    v = [0] * m
    for i, p in obj.get("v", {}).items():
        v[int(i) - 1] = int(p)
    return graph(m, edges, n=n, v=v, coeff=obj.get("sign", 1))


def sum_to_json(x):
    from .exactla import format_rational
    return {"terms": [dict(graph_to_json(k), c=format_rational(c)) for k, c in sorted(x.items())]}


def sum_from_json(obj):
    from .exactla import parse_rational
    if isinstance(obj, str):
        obj = json.loads(obj)
    if "terms" not in obj:
        return graph_from_json(obj)
    out = {}
    for t in obj["terms"]:
        fs.add_into(out, graph_from_json(t), parse_rational(t.get("c", 1)))
    return out
