"""Planar trees with white (labeled) and black (internal) vertices: the
operad M, its rotation R and the suboperad M_circ = im R.

A tree is a nested tuple ``(kind, label, children)`` with kind ``"w"`` or
``"b"``.  White labels are 1..n.  Black vertices are odd and ordered; in a
canonical key their label is 0 and the order is the preorder, any other
order being recorded by a sign.  While computing, black labels carry
ordering ids (any comparable numbers).

Grading: degree = number of black vertices.  The differential raises it by
one and R lowers it by one.
"""
import collections
import itertools
import json
from fractions import Fraction

from . import formal as fs
from .exactla import GradedBasis, matrix_of, span_rank
from .mixed import ChainComplex, MixedComplex
from .operad import DgOperad

__all__ = [
    "BoundExceeded", "UnstableResidue", "white", "black", "canonical", "n_white", "n_black",
    "is_stable", "enumerate_M", "m_basis", "m_compose", "m_differential", "rotation_R", "TreeOperad",
    "M", "m_mixed_complex", "m_homology_dims", "m_circ_basis", "m_circ_homology_dims", "tree_to_json",
    "tree_from_json", "sum_to_json", "sum_from_json", "DEFAULT_BOUND",
]

DEFAULT_BOUND = 4


class BoundExceeded(ValueError):
    pass


class UnstableResidue(ArithmeticError):
    """Unstable terms of the differential failed to cancel (a sign bug)."""


def white(i, *children):
    return ("w", i, tuple(children))


def black(*children):
    return ("b", 0, tuple(children))


def preorder(t):
    yield t
    for c in t[2]:
        yield from preorder(c)


def n_white(t):
    return sum(1 for x in preorder(t) if x[0] == "w")


def n_black(t):
    return sum(1 for x in preorder(t) if x[0] == "b")


def is_stable(t):
    return all(len(x[2]) >= 2 for x in preorder(t) if x[0] == "b")


def _perm_sign(seq):
    inv = sum(1 for a, b in itertools.combinations(seq, 2) if a > b)
    return -1 if inv % 2 else 1


def _strip(t):
    kind, lab, ch = t
    return (kind, lab if kind == "w" else 0, tuple(_strip(c) for c in ch))


def canonical(t):
    """(key, sign): sign is the parity of the black ids read in preorder."""
    ids = [x[1] for x in preorder(t) if x[0] == "b"]
    return _strip(t), _perm_sign(ids)


def _number_blacks(t, start=0):
    """Give black vertices the ids start, start+1, ... in preorder."""
    cnt = itertools.count(start)

    def go(x):
        kind, lab, ch = x
        if kind == "b":
            lab = next(cnt)
        return (kind, lab, tuple(go(c) for c in ch))
    return go(t)


def _add(acc, t, c):
    key, s = canonical(t)
    fs.add_term(acc, key, c * s)


def _relabel(t, f):
    kind, lab, ch = t
    return (kind, f(lab) if kind == "w" else lab, tuple(_relabel(c, f) for c in ch))


def _gaps(t, path=()):
    """All positions (path, slot) where a new child can be attached, in
    contour order."""
    out = []
    for j, c in enumerate(t[2]):
        out.append((path, j))
        out.extend(_gaps(c, path + (j,)))
    out.append((path, len(t[2])))
    return out


def _attach(t, placements):
    by = collections.defaultdict(list)
    for gap, sub in placements:
        by[gap].append(sub)

    def go(x, path):
        kind, lab, ch = x
        new = []
        for j in range(len(ch) + 1):
            new.extend(by.get((path, j), ()))
            if j < len(ch):
                new.append(go(ch[j], path + (j,)))
        return (kind, lab, tuple(new))
    return go(t, ())


def _variants(t, pred, fn):
    """Replace each vertex satisfying pred (one at a time) by every tree in fn(vertex)."""
    kind, lab, ch = t
    if pred(t):
        yield from fn(t)
    for j, c in enumerate(ch):
        for r in _variants(c, pred, fn):
            yield (kind, lab, ch[:j] + (r,) + ch[j + 1:])


def _splits(ch):
    r = len(ch)
    for a in range(r + 1):
        for b in range(a, r + 1):
            yield ch[:a], ch[a:b], ch[b:]


# -- enumeration ------------------------------------------------------------

def _forests(labels, min_parts=0):
    if not labels:
        if min_parts <= 0:
            yield ()
        return
    n = len(labels)
    top = n if min_parts <= 1 else n - 1
    for k in range(1, top + 1):
        for sub in itertools.combinations(labels, k):
            rest = tuple(x for x in labels if x not in sub)
            for t in _trees(sub):
                for f in _forests(rest, min_parts - 1):
                    yield (t,) + f


def _trees(labels):
    for w in labels:
        rest = tuple(x for x in labels if x != w)
        for f in _forests(rest):
            yield ("w", w, f)
    if len(labels) >= 2:
        for f in _forests(labels, 2):
            yield ("b", 0, f)


def enumerate_M(n, bound=DEFAULT_BOUND):
    """All stable planar trees with white vertices 1..n, sorted."""
    if n < 1:
        raise ValueError("arity must be >= 1")
    if n > bound:
        raise BoundExceeded(f"arity {n} exceeds bound {bound}")
    return sorted(set(_trees(tuple(range(1, n + 1)))))


def m_basis(n, bound=DEFAULT_BOUND):
    return GradedBasis(enumerate_M(n, bound), [n_black(t) for t in enumerate_M(n, bound)])


# -- operations -------------------------------------------------------------

def _compose_key(a, i, b):
    p = n_white(b)
    a = _number_blacks(a, 0)
    b = _number_blacks(b, n_black(a))
    a = _relabel(a, lambda x: x + p - 1 if x > i else x)
    b = _relabel(b, lambda x: x + i - 1)
    gaps = _gaps(b)

    def substitute(node):
        ch = node[2]
        # children of the replaced white vertex keep their planar order
        for combo in itertools.combinations_with_replacement(range(len(gaps)), len(ch)):
            yield _attach(b, [(gaps[g], c) for g, c in zip(combo, ch)])

    out = {}
    for r in _variants(a, lambda x: x[0] == "w" and x[1] == i, substitute):
        _add(out, r, 1)
    return out


def m_compose(a, i, b):
    """a ∘ᵢ b on formal sums: b replaces white vertex i, whose children are
    distributed over the corners of b in all planar ways."""
    out = {}
    for ka, ca in a.items():
        if not 1 <= i <= n_white(ka):
            raise ValueError(f"no white vertex {i}")
        for kb, cb in b.items():
            fs.add_into(out, _compose_key(ka, i, kb), ca * cb)
    return out


def _differential_key(t):
    t = _number_blacks(t)
    new = -1  # the new black vertex comes first
    acc = {}
    _add(acc, ("b", new, (t,)), 1)
    for g in _gaps(t):
        _add(acc, _attach(t, [(g, ("b", new, ()))]), -1)

    def black_above(x):
        for L, Mid, Rt in _splits(x[2]):
            yield ("b", new, L + (("w", x[1], Mid),) + Rt)

    def black_below(x):
        for L, Mid, Rt in _splits(x[2]):
            yield ("w", x[1], L + (("b", new, Mid),) + Rt)

    for r in _variants(t, lambda x: x[0] == "w", black_above):
        _add(acc, r, -1)
    for r in _variants(t, lambda x: x[0] == "w", black_below):
        _add(acc, r, 1)
    for j in range(n_black(t)):
        sgn = 1 if j % 2 else -1

        def split(x, j=j):
            for L, Mid, Rt in _splits(x[2]):
                yield ("b", j, L + (("b", j + 0.5, Mid),) + Rt)
        for r in _variants(t, lambda x, j=j: x[0] == "b" and x[1] == j, split):
            _add(acc, r, sgn)
    bad = [k for k in acc if not is_stable(k)]
    if bad:
        raise UnstableResidue(f"d({_strip(t)}) leaves unstable terms {bad[:3]}")
    return acc


_D_CACHE = {}


def m_differential(x):
    out = {}
    for k, c in x.items():
        if k not in _D_CACHE:
            _D_CACHE[k] = _differential_key(k)
        fs.add_into(out, _D_CACHE[k], c)
    return out


def _ribbon(t):
    """Vertices in preorder with cyclic neighbour lists (parent first)."""
    nodes, nbrs = {}, {}
    counter = itertools.count()

    def go(x, parent):
        v = next(counter)
        nodes[v] = (x[0], x[1])
        nbrs[v] = [] if parent is None else [parent]
        for c in x[2]:
            nbrs[v].append(go(c, v))
        return v
    root = go(t, None)
    return nodes, nbrs, root


def _rooted_at(nodes, nbrs, v, corner, label_black):
    def build(x, parent, start):
        cyc = nbrs[x]
        if parent is None:
            order = cyc[start:] + cyc[:start]
        else:
            k = cyc.index(parent)
            order = cyc[k + 1:] + cyc[:k]
        kind, lab = nodes[x]
        return (kind, lab if kind == "w" else label_black(x), tuple(build(u, x, 0) for u in order))
    return build(v, None, corner)


def _distances(nbrs, v):
    dist = {v: 0}
    queue = collections.deque([v])
    while queue:
        x = queue.popleft()
        for y in nbrs[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def _rotation_key(t):
    if t[0] != "b" or len(t[2]) != 2:
        return {}
    nodes, nbrs, root = _ribbon(t)
    u1, u2 = nbrs[root]
    # dissolve the root, joining its two children
    nbrs[u1] = [u2 if x == root else x for x in nbrs[u1]]
    nbrs[u2] = [u1 if x == root else x for x in nbrs[u2]]
    del nbrs[root], nodes[root]
    out = {}
    for v in nodes:
        dist = _distances(nbrs, v)
        near1 = dist[u1] < dist[u2]
        sgn = (-1) ** min(dist[u1], dist[u2]) * (1 if near1 else -1)
        for corner in range(max(1, len(nbrs[v]))):
            # black ids = old preorder positions, so the sign tracks the reordering
            _add(out, _rooted_at(nodes, nbrs, v, corner, lambda x: x), sgn)
    return out


_R_CACHE = {}


def rotation_R(x):
    """Zero unless the root is black with exactly two children; then the
    root is dissolved and the tree re-rooted at every corner of every
    vertex."""
    out = {}
    for k, c in x.items():
        if k not in _R_CACHE:
            _R_CACHE[k] = _rotation_key(k)
        fs.add_into(out, _R_CACHE[k], c)
    return out


class TreeOperad(DgOperad):
    """The dg operad M with rotation R."""

    name = "M"

    def __init__(self, bound=DEFAULT_BOUND):
        self.bound = bound

    def arity(self, key):
        return n_white(key)

    def degree(self, key):
        return n_black(key)

    def compose_keys(self, a, i, b):
        return _compose_key(a, i, b)

    def act_key(self, key, perm):
        return {canonical(_relabel(key, lambda j: perm[j - 1]))[0]: Fraction(1)}

    def d_key(self, key):
        return m_differential({key: Fraction(1)})

    def rho_key(self, key):
        return rotation_R({key: Fraction(1)})

    def basis(self, n):
        return enumerate_M(n, self.bound)


M = TreeOperad()


# -- homology ---------------------------------------------------------------

def m_mixed_complex(n, bound=DEFAULT_BOUND):
    """(M(n), d, R); the constructor validates d² = R² = dR + Rd = 0."""
    B = m_basis(n, bound)
    d = matrix_of(lambda k: m_differential({k: 1}), B, B)
    R = matrix_of(lambda k: rotation_R({k: 1}), B, B)
    return MixedComplex(B, d, R)


def m_homology_dims(n, bound=DEFAULT_BOUND):
    B = m_basis(n, bound)
    return ChainComplex(B, matrix_of(lambda k: m_differential({k: 1}), B, B)).homology()


def m_circ_basis(n, bound=DEFAULT_BOUND):
    """Spanning vectors of im R ⊂ M(n), grouped by degree: {deg: [formal sums]}."""
    out = collections.defaultdict(list)
    for t in enumerate_M(n, bound):
        r = rotation_R({t: 1})
        if r:
            out[n_black(t) - 1].append(r)
    return dict(out)


def m_circ_homology_dims(n, bound=DEFAULT_BOUND, check_subcomplex=True):
    """Homology of (im R, d) on M(n), by degree."""
    B = m_basis(n, bound)
    span = m_circ_basis(n, bound)
    vec = {g: [B.vector(x) for x in xs] for g, xs in span.items()}
    dim = {g: span_rank(vs) for g, vs in vec.items()}
    drank = {}
    for g, xs in span.items():
        images = [B.vector(m_differential(x)) for x in xs]
        drank[g] = span_rank(images)
        if check_subcomplex and drank[g]:
            target = vec.get(g + 1, [])
            if span_rank(target + images) != dim.get(g + 1, 0):
                raise ArithmeticError("d does not preserve im R")
    out = {}
    for g in sorted(dim):
        h = dim[g] - drank[g] - drank.get(g - 1, 0)
        if h:
            out[g] = h
    return out


# -- JSON -------------------------------------------------------------------

def _node_to_json(t):
    kind, lab, ch = t
    tag = f"w:{lab}" if kind == "w" else "b"
    return [tag] + [_node_to_json(c) for c in ch]


def tree_to_json(key, sign=1):
    return {"tree": _node_to_json(key), "root": [], "sign": int(sign)}


def _node_from_json(arr, ids):
    tag, rest = arr[0], arr[1:]
    if tag == "b":
        lab = next(ids)
        kind = "b"
    elif isinstance(tag, str) and tag.startswith("w:"):
        kind, lab = "w", int(tag[2:])
    else:
        raise ValueError(f"bad node tag {tag!r}")
    return (kind, lab, tuple(_node_from_json(c, ids) for c in rest))


def tree_from_json(obj):
    """Single-term formal sum.  Black vertices are ordered as listed; a
    non-empty ``root`` path re-roots the stored tree at that vertex (its
    parent becomes the first child)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    t = _node_from_json(obj["tree"], itertools.count())
    path = list(obj.get("root", []))
    if path:
        target = 0
        x = t
        # preorder index of the vertex at ``path``
        index = {id(y): j for j, y in enumerate(preorder(t))}
        for j in path:
            x = x[2][j]
        target = index[id(x)]
        nodes, nbrs, _ = _ribbon(t)
        t = _rooted_at(nodes, nbrs, target, 0, lambda v: nodes[v][1])
    key, s = canonical(t)
    return {key: Fraction(obj.get("sign", 1)) * s}


def sum_to_json(x):
    from .exactla import format_rational
    return {"terms": [dict(tree_to_json(k), c=format_rational(c)) for k, c in sorted(x.items())]}


def sum_from_json(obj):
    from .exactla import parse_rational
    if isinstance(obj, str):
        obj = json.loads(obj)
    if "terms" not in obj:
        return tree_from_json(obj)
    out = {}
    for t in obj["terms"]:
        fs.add_into(out, tree_from_json(t), parse_rational(t.get("c", 1)))
    return out
