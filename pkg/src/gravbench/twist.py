"""Truncated operadic twisting, the Graphs suboperad, the filter defining
the vKGraphs^σ subquotient, and Maurer-Cartan twisted differentials.

A twisted element is a formal sum of ``TwKey(key, n)``: ``key`` is a base
element of arity n+k whose last k inputs are internal.  Internal inputs are
symmetrized; each carries degree ``internal_degree`` (even for graphs in
the plane, so symmetrization carries no sign).  The stored key is the least
relabelling of the internal inputs.

With λ the image of the shifted Lie bracket the differential is

    d x = d_P x + λ∘₁x − (−1)^{|x|} Σ_ext x∘ᵢλ − ½(−1)^{|x|} Σ_int x∘ⱼλ

where λ's second input becomes a new internal input.  Terms that would need
more than K internal inputs are kept apart in an overflow channel.
"""
import itertools
from collections import namedtuple
from fractions import Fraction

from . import formal as fs
from .graphs import GraphOperad, bimodule_lie_bracket, canonical, graph_to_json, invariants_project, relabel
from .operad import ArityMismatch, DgOperad, OperadError, Report

__all__ = [
    "NoLieMap", "NotMaurerCartan", "TwKey", "TwistedOperadTrunc", "tw_operad",
    "graphs_filter", "is_graphs_key", "orientation_sum", "ger_to_graphs_check",
    "vk_lift", "vk_cyclic_project", "vkgraphs_sigma_filter", "has_isolated_internal",
    "McElement", "LieHost", "TPOLY", "DPOLY", "VKGRA", "mc_twist_differential", "tw_to_json",
]

TwKey = namedtuple("TwKey", "key n")


class NoLieMap(OperadError):
    pass


class NotMaurerCartan(ValueError):
    def __init__(self, msg, witness):
        super().__init__(msg)
        self.witness = witness


def _lie_map(base):
    get = getattr(base, "lie_map", None)
    if get is None:
        raise NoLieMap(f"{base.name} exposes no shifted Lie generator")
    lam = get()
    if not lam or any(base.arity(k) != 2 for k in lam):
        raise NoLieMap(f"{base.name}: the Lie generator must be a nonzero arity-2 element")
    return lam


class TwistedOperadTrunc(DgOperad):
    """Tw(base) keeping at most K internal inputs."""

    def __init__(self, base, K, internal_degree=2):
        if K < 0:
            raise ValueError("K must be >= 0")
        self.base = base
        self.K = K
        self.lam = _lie_map(base)
        self.internal_degree = internal_degree
        self.name = f"Tw({base.name}, K={K})"

    # keys -----------------------------------------------------------------
    def internal_count(self, tk):
        return self.base.arity(tk.key) - tk.n

    def _monomial(self, key, perm):
        img = self.base.act_key(key, perm)
        if len(img) != 1:
            raise OperadError(f"{self.base.name} does not act by signed permutations of keys")
        (k, c), = img.items()
        return k, c

    def canonical(self, key, n):
        """(TwKey, sign) for the symmetrized class, or (None, 0) if it vanishes."""
        m = self.base.arity(key)
        odd = self.internal_degree % 2
        best, signs = None, set()
        for p in itertools.permutations(range(n + 1, m + 1)):
            perm = tuple(range(1, n + 1)) + p
            k, c = self._monomial(key, perm)
            if odd and _parity(p):
                c = -c
            if best is None or k < best:
                best, signs = k, {c}
            elif k == best:
                signs.add(c)
        if len(signs) > 1:
            return None, 0
        return TwKey(best, n), signs.pop()

    def lift(self, x, n=None):
        """Base element with no internal inputs, viewed in Tw."""
        out = {}
        for k, c in x.items():
            tk, s = self.canonical(k, self.base.arity(k) if n is None else n)
            if tk is not None:
                fs.add_term(out, tk, c * s)
        return out

    def arity(self, tk):
        return tk.n

    def degree(self, tk):
        return self.base.degree(tk.key) + self.internal_degree * self.internal_count(tk)

    def act_key(self, tk, perm):
        perm = tuple(perm)
        if len(perm) != tk.n:
            raise ArityMismatch(f"permutation of {len(perm)} letters on arity {tk.n}")
        m = self.base.arity(tk.key)
        full = perm + tuple(range(tk.n + 1, m + 1))
        k, c = self._monomial(tk.key, full)
        t, s = self.canonical(k, tk.n)
        return {t: Fraction(c * s)} if t is not None else {}

    def compose_keys(self, a, i, b):
        """Insert at external input i; internal inputs of a, then of b, go last."""
        if not 1 <= i <= a.n:
            raise ArityMismatch(f"slot {i} is not an external input of arity {a.n}")
        ka, kb = self.internal_count(a), self.internal_count(b)
        if ka + kb > self.K:
            return {}
        ma, mb = a.n + ka, b.n + kb
        # composite order: a[1..i-1], b ext, b int, a[i+1..]
        target = []
        for j in range(1, i):
            target.append(j)
        for j in range(b.n):
            target.append(i + j)
        for j in range(kb):
            target.append(a.n + b.n - 1 + ka + j + 1)
        for j in range(i + 1, a.n + 1):
            target.append(j + b.n - 1)
        for j in range(ka):
            target.append(a.n + b.n - 1 + j + 1)
        assert len(target) == ma + mb - 1
        out = {}
        for k, c in self.base.compose_keys(a.key, i, b.key).items():
            k2, s2 = self._monomial(k, tuple(target))
            t, s = self.canonical(k2, a.n + b.n - 1)
            if t is not None:
                fs.add_term(out, t, c * s2 * s)
        return out

    # differential -----------------------------------------------------------
    def d_split(self, x):
        """(interior, overflow) parts of the twisted differential of x."""
        inner, over = {}, {}
        for tk, c in x.items():
            k = self.internal_count(tk)
            fs.add_into(inner, self.lift_same(self.base.d_key(tk.key), tk.n), c)
            dest = inner if k + 1 <= self.K else over
            for key, e in self._twist_terms(tk).items():
                fs.add_term(dest, key, c * e)
        return inner, over

    def lift_same(self, x, n):
        out = {}
        for k, c in x.items():
            t, s = self.canonical(k, n)
            if t is not None:
                fs.add_term(out, t, c * s)
        return out

    def _twist_terms(self, tk):
        base = self.base
        key, n = tk.key, tk.n
        m = base.arity(key)
        par = base.degree(key) % 2
        out = {}
        for lk, lc in self.lam.items():
            # λ∘₁x: λ's second input is already last
            for k, c in base.compose_keys(lk, 1, key).items():
                t, s = self.canonical(k, n)
                if t is not None:
                    fs.add_term(out, t, lc * c * s)
            for i in range(1, m + 1):
                coef = Fraction(-1) if i <= n else Fraction(-1, 2)
                if par:
                    coef = -coef
                perm = [j if j <= i else j - 1 for j in range(1, m + 2)]
                perm[i] = m + 1
                perm = tuple(perm)
                for k, c in base.compose_keys(key, i, lk).items():
                    k2, s2 = self._monomial(k, perm)
                    t, s = self.canonical(k2, n)
                    if t is not None:
                        fs.add_term(out, t, coef * lc * c * s2 * s)
        return out

    def d_key(self, tk):
        return self.d_split({tk: Fraction(1)})[0]

    def overflow(self, x):
        return self.d_split(x)[1]

    def basis(self, n):
        seen = set()
        for k in range(self.K + 1):
            for key in self.base.basis(n + k):
                t, _ = self.canonical(key, n)
                if t is not None:
                    seen.add(t)
        return sorted(seen)

    def check_d_squared(self, elements):
        """d² = 0 on elements whose first differential stays inside K;
        elements at the truncation boundary are reported, not checked."""
        rep = Report(f"{self.name} d^2")
        rep.boundary = []
        for x in elements:
            first, over = self.d_split(x)
            second, over2 = self.d_split(first)
            if over or over2:
                rep.boundary.append(x)
                continue
            rep.record(second == {}, x=x, d2=second)
        return rep.finish()


def _parity(seq):
    return sum(1 for a, b in itertools.combinations(seq, 2) if a > b) & 1


def tw_operad(base, K):
    return TwistedOperadTrunc(base, K)


# -- Graphs ----------------------------------------------------------------

def _valences(key):
    val = [0] * (key.m + 1)
    for s, t in key.edges:
        val[s] += 1
        if t > 0:
            val[t] += 1
    return val


def is_graphs_key(tk):
    """Internal vertices at least trivalent; every component meets an external vertex."""
    key, n = tk.key, tk.n
    val = _valences(key)
    if any(val[j] < 3 for j in range(n + 1, key.m + 1)):
        return False
    parent = list(range(key.m + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for s, t in key.edges:
        if t > 0:
            parent[find(s)] = find(t)
    roots = {find(j) for j in range(1, n + 1)}
    return all(find(j) in roots for j in range(n + 1, key.m + 1))


def graphs_filter(x):
    return {k: c for k, c in x.items() if is_graphs_key(k)}


def orientation_sum(tw, x):
    """Replace every edge (s, t) by (s, t) + (t, s).  With directed edges the
    Graphs filter is closed under d only on such sums: a bivalent internal
    source and the matching sink cancel once orientations are summed."""
    out = {}
    for tk, c in x.items():
        key = tk.key
        for flips in itertools.product((0, 1), repeat=len(key.edges)):
            edges = [(t, s) if f else (s, t) for (s, t), f in zip(key.edges, flips)]
            k, sg = canonical(key.m, key.n, edges, key.v)
            if k is None:
                continue
            t, s2 = tw.canonical(k, tk.n)
            if t is not None:
                fs.add_term(out, t, c * sg * s2)
    return out


def ger_to_graphs_check(n_max=3, tw=None):
    """Ger(n) → Graphs(n): μ is the edgeless graph, the bracket the edge sum.
    Every basis image must be a cycle, and the images independent."""
    from .exactla import rank
    from .ger import GER
    tw = tw or TwistedOperadTrunc(GraphOperad(False), 1)
    rep = Report("Ger -> Graphs")
    rep.ranks = {}
    for n in range(1, n_max + 1):
        images = [tw.lift(b) for b in GER.basis(n)]
        for b, img in zip(GER.basis(n), images):
            rep.record(graphs_filter(img) == img and tw.d(img) == {}, n=n, element=b)
        idx = {k: j for j, k in enumerate(sorted({k for img in images for k in img}))}
        r = rank([{idx[k]: c for k, c in img.items()} for img in images])
        rep.ranks[n] = r
        rep.record(r == len(images), n=n, rank=r, count=len(images))
    return rep.finish()


# -- twisted vKGra filter ---------------------------------------------------------

def _vk_canonical(key, n):
    best, signs = None, set()
    for p in itertools.permutations(range(n + 1, key.m + 1)):
        (k, c), = relabel(key, tuple(range(1, n + 1)) + p).items()
        if best is None or k < best:
            best, signs = k, {c}
        elif k == best:
            signs.add(c)
    if len(signs) > 1:
        return None, 0
    return TwKey(best, n), signs.pop()


def vk_lift(x, n_ext):
    """vKGra graphs whose type-I vertices after the first ``n_ext`` are internal."""
    out = {}
    for k, c in x.items():
        if not 0 <= n_ext <= k.m:
            raise ValueError(f"{n_ext} external vertices requested on a graph with {k.m} type-I vertices")
        t, s = _vk_canonical(k, n_ext)
        if t is not None:
            fs.add_term(out, t, c * s)
    return out


def vk_cyclic_project(x):
    """Cyclic projector on the twisted module.  σ redirects edges to every
    type-I vertex, internal ones included."""
    out = {}
    for tk, c in x.items():
        fs.add_into(out, vk_lift(invariants_project({tk.key: c}), tk.n))
    return out


def has_isolated_internal(tk):
    return any(all(j not in e for e in tk.key.edges) for j in range(tk.n + 1, tk.key.m + 1))


def _vk_key_ok(tk):
    key, n = tk.key, tk.n
    internal = range(n + 1, key.m + 1)
    if any(key.v[j - 1] for j in internal):
        return False
    if any(s == t and s > n for s, t in key.edges):
        return False
    if n < 1:
        return False
    inc = [0] * (key.m + 1)
    out = [0] * (key.m + 1)
    for s, t in key.edges:
        out[s] += 1
        if t > 0:
            inc[t] += 1
    for j in internal:
        val = inc[j] + out[j]
        if val == 0:
            return False
        if val == 1 and out[j] == 1:
            return False
        if val == 2 and inc[j] == 1 and out[j] == 1:
            return False
    return True


def vkgraphs_sigma_filter(x):
    """Drop every term whose internal type-I vertices carry tadpoles or v-powers,
    or break the valence rules; type-II vertices are all external."""
    return {k: c for k, c in x.items() if _vk_key_ok(k)}


def tw_to_json(tk, sign=1):
    obj = graph_to_json(tk.key, sign)
    obj["vertices"] = [dict({"id": j}, **({"internal": True} if j > tk.n else {}))
                       for j in range(1, tk.key.m + 1)]
    return obj


# -- Maurer-Cartan twisting ---------------------------------------------------

class LieHost:
    """A shifted Lie algebra realized in the package: bracket, optional d,
    and a zero test."""

    def __init__(self, name, bracket, d=None, is_zero=None, add=None, scale=None):
        self.name = name
        self.bracket = bracket
        self.d = d
        self.is_zero = is_zero or (lambda z: not z)
        self.add = add or (lambda a, b: a + b)
        self.scale = scale or (lambda a, c: a.scaled(c))


def _fs_add(a, b):
    return fs.combine((1, a), (1, b))


TPOLY = LieHost("T_poly", lambda a, b: _schouten(a, b), is_zero=lambda z: z.is_zero())
DPOLY = LieHost("D_poly", lambda a, b: _gerst(a, b), is_zero=lambda z: z.is_zero())
VKGRA = LieHost("vKGra", bimodule_lie_bracket, add=_fs_add, scale=fs.scaled)


def _schouten(a, b):
    from .poly import schouten
    return schouten(a, b)


def _gerst(a, b):
    from .poly import gerst_bracket
    return gerst_bracket(a, b)


class McElement:
    """π with d(π) + ½[π, π] = 0, checked exactly on construction."""

    def __init__(self, host, value):
        self.host = host
        self.value = value
        w = host.bracket(value, value)
        if host.d is not None:
            w = host.add(w, host.scale(host.d(value), 2))
        if not host.is_zero(w):
            raise NotMaurerCartan(f"[π,π] + 2dπ ≠ 0 in {host.name}", w)


def mc_twist_differential(host, pi, samples=()):
    """X ↦ dX + [π, X]; d² = 0 is verified on ``samples``."""
    mc = pi if isinstance(pi, McElement) else McElement(host, pi)

    def d_pi(X):
        out = host.bracket(mc.value, X)
        if host.d is not None:
            out = host.add(host.d(X), out)
        return out

    for X in samples:
        dd = d_pi(d_pi(X))
        if not host.is_zero(dd):
            raise OperadError(f"twisted differential does not square to zero on {X!r}")
    return d_pi
