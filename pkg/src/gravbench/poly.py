"""Polyvector fields and multidifferential operators on R^d with polynomial
coefficients, and the graph actions on them.

Polyvector monomials are keyed by ``(x, xi)``: ``x`` an exponent tuple of
length d, ``xi`` a strictly increasing tuple of odd indices (0-based), the
monomial being x^a ξ_{i1}…ξ_{ik}.  ξ-derivatives act from the left.

A multidifferential operator term is ``(x, I)`` with ``I`` a tuple of n
exponent tuples: the operator f₁,…,fₙ ↦ x^a ∂^{I₁}f₁ ⋯ ∂^{Iₙ}fₙ.
"""
import itertools
import json
from fractions import Fraction
from math import factorial

from . import formal as fs
from .exactla import DimensionMismatch, format_rational, parse_rational
from .operad import ArityMismatch

__all__ = [
    "Polyvector", "MultiDiffOp", "schouten", "divergence", "wedge", "gra_act", "vkgra_act",
    "gerst_compose", "total_composition", "gerst_bracket", "hochschild_d", "MU_D",
    "hochschild_d_prime", "cyclic_sigma_D", "graded_sigma_D", "cyclic_norm_D", "cyclic_invariants_D", "is_cyclic_invariant_D",
    "check_dpoly_sigma_closed", "hkr", "cyclic_hkr_solve",
]


def _merge_xi(a, b):
    """(sorted union, sign) of ξ_a · ξ_b, or (None, 0) on overlap."""
    if set(a) & set(b):
        return None, 0
    inv = sum(1 for p in a for q in b if p > q)
    return tuple(sorted(a + b)), (-1 if inv % 2 else 1)


def _add_exp(a, b):
    return tuple(p + q for p, q in zip(a, b))


class Polyvector:
    """Element of T_poly[u] on R^d (homogeneous in u)."""

    __slots__ = ("d", "terms", "u")

    def __init__(self, d, terms=None, u=0):
        self.d = d
        self.u = u
        clean = {}
        for (x, xi), c in (terms or {}).items():
            x = tuple(x)
            xi = tuple(xi)
            if len(x) != d or any(i < 0 or i >= d for i in xi):
                raise DimensionMismatch(f"monomial {(x, xi)} not on R^{d}")
            if list(xi) != sorted(set(xi)):
                srt, sign = _sort_xi(xi)
                if srt is None:
                    continue
                xi, c = srt, c * sign
            fs.add_term(clean, (x, xi), Fraction(c))
        self.terms = clean

    @classmethod
    def monomial(cls, d, x=None, xi=(), c=1, u=0):
        x = tuple(x) if x is not None else (0,) * d
        return cls(d, {(x, tuple(xi)): c}, u)

    def __add__(self, other):
        self._compatible(other)
        out = dict(self.terms)
        fs.add_into(out, other.terms)
        return Polyvector(self.d, out, self.u)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, k):
        return Polyvector(self.d, fs.scaled(self.terms, k), self.u)

    def __eq__(self, other):
        return (isinstance(other, Polyvector) and self.d == other.d and self.terms == other.terms
                and (self.u == other.u or not self.terms))

    def __repr__(self):
        return f"Polyvector(d={self.d}, u={self.u}, terms={self.terms})"

    def _compatible(self, other):
        if self.d != other.d:
            raise DimensionMismatch("polyvectors on different R^d")
        if self.u != other.u and self.terms and other.terms:
            raise ValueError("sum of different u-powers")

    def is_zero(self):
        return not self.terms

    def xi_degrees(self):
        return {len(xi) for _, xi in self.terms}

    def degree(self):
        """ξ-degree + 2·(u-power); raises if inhomogeneous."""
        ds = self.xi_degrees()
        if len(ds) > 1:
            raise ValueError("inhomogeneous polyvector")
        return (ds.pop() if ds else 0) + 2 * self.u

    def parts(self):
        out = {}
        for (x, xi), c in self.terms.items():
            out.setdefault(len(xi), {})[(x, xi)] = c
        return {k: Polyvector(self.d, t, self.u) for k, t in out.items()}

    def dx(self, l):
        out = {}
        for (x, xi), c in self.terms.items():
            if x[l]:
                y = list(x)
                y[l] -= 1
                fs.add_term(out, (tuple(y), xi), c * x[l])
        return Polyvector(self.d, out, self.u)

    def dxi(self, l):
        out = {}
        for (x, xi), c in self.terms.items():
            if l in xi:
                p = xi.index(l)
                fs.add_term(out, (x, xi[:p] + xi[p + 1:]), -c if p % 2 else c)
        return Polyvector(self.d, out, self.u)

    def to_json(self):
        terms = []
        for (x, xi), c in sorted(self.terms.items()):
            terms.append({"c": format_rational(c), "x": list(x),
                          "xi": [1 if l in xi else 0 for l in range(self.d)]})
        return {"d": self.d, "u": self.u, "terms": terms}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        d = int(obj["d"])
        terms = {}
        for t in obj["terms"]:
            xi = tuple(l for l, b in enumerate(t.get("xi", [0] * d)) if b)
            x = tuple(int(a) for a in t.get("x", [0] * d))
            fs.add_term(terms, (x, xi), parse_rational(t.get("c", 1)))
        return cls(d, terms, int(obj.get("u", 0)))


def _sort_xi(xi):
    if len(set(xi)) != len(xi):
        return None, 0
    inv = sum(1 for a, b in itertools.combinations(xi, 2) if a > b)
    return tuple(sorted(xi)), (-1 if inv % 2 else 1)


def wedge(X, Y):
    if X.d != Y.d:
        raise DimensionMismatch("polyvectors on different R^d")
    out = {}
    for (x1, a), c1 in X.terms.items():
        for (x2, b), c2 in Y.terms.items():
            xi, s = _merge_xi(a, b)
            if xi is not None:
                fs.add_term(out, (_add_exp(x1, x2), xi), c1 * c2 * s)
    return Polyvector(X.d, out, X.u + Y.u)


def schouten(X, Y):
    """[X, Y] = Σ_l ∂_{ξ_l}X·∂_{x_l}Y + (−1)^{|X|} ∂_{x_l}X·∂_{ξ_l}Y.

    This is the action of the symmetric edge graph Γ^{1,2} + Γ^{2,1}; it
    differs from the right-derivative Schouten bracket by (−1)^{|X|−1}.
    u-powers add.
    """
    if X.d != Y.d:
        raise DimensionMismatch("polyvectors on different R^d")
    out = Polyvector(X.d, {}, X.u + Y.u)
    for k, Xk in X.parts().items():
        for l in range(X.d):
            a = wedge(Xk.dxi(l), Y.dx(l))
            b = wedge(Xk.dx(l), Y.dxi(l))
            out = out + a + (b if k % 2 == 0 else b.scaled(-1))
    return out


def divergence(X):
    """Div X = Σ_l ∂_{x_l}∂_{ξ_l} X (standard volume form)."""
    out = Polyvector(X.d, {}, X.u)
    for l in range(X.d):
        out = out + X.dxi(l).dx(l)
    return out


# -- graph actions ------------------------------------------------------------

def _apply_edges(edges, state, n_type1):
    """Apply edge operators right to left to a formal sum of component tuples.

    ``state`` maps tuples (comp_1, …, comp_m, slot_1, …) to coefficients,
    comp = (x, xi), slot = exponent tuple.  Edge (s, t): left ξ_l-derivative
    of component s with the Koszul sign of the earlier components' ξ's,
    then x_l-derivative of component t, or (t < 0) one more ∂_l on slot −t.
    """
    for s, t in reversed(edges):
        new = {}
        for comps, c in state.items():
            before = sum(len(comps[p][1]) for p in range(s - 1))
            x_s, xi_s = comps[s - 1]
            for pos, l in enumerate(xi_s):
                sign = -1 if (before + pos) % 2 else 1
                cur = list(comps)
                cur[s - 1] = (x_s, xi_s[:pos] + xi_s[pos + 1:])
                if t > 0:
                    x_t, xi_t = cur[t - 1]
                    e = x_t[l]
                    if not e:
                        continue
                    x_t = x_t[:l] + (e - 1,) + x_t[l + 1:]
                    cur[t - 1] = (x_t, xi_t)
                    fs.add_term(new, tuple(cur), c * sign * e)
                else:
                    j = n_type1 + (-t) - 1
                    idx = cur[j]
                    cur[j] = idx[:l] + (idx[l] + 1,) + idx[l + 1:]
                    fs.add_term(new, tuple(cur), c * sign)
        state = new
    return state


def _initial_state(args):
    state = {(): Fraction(1)}
    for X in args:
        nxt = {}
        for comps, c in state.items():
            for mono, cx in X.terms.items():
                fs.add_term(nxt, comps + (mono,), c * cx)
        state = nxt
    return state


def gra_act(gamma, *args):
    """Γ(X₁, …, X_k): edge operators Σ_l ∂/∂x_l^{(t)} ∂/∂ξ_l^{(s)} applied
    to X₁∧…∧X_k (last edge first), then the components multiplied."""
    if not args:
        raise ArityMismatch("no arguments")
    d = args[0].d
    if any(X.d != d for X in args):
        raise DimensionMismatch("polyvectors on different R^d")
    u = sum(X.u for X in args)
    out = {}
    base = _initial_state(args)
    for key, gc in gamma.items():
        if key.m != len(args) or key.n:
            raise ArityMismatch(f"graph with {key.m} vertices on {len(args)} arguments")
        if any(key.v):
            raise ValueError("gra_act takes graphs without v-decorations")
        for comps, c in _apply_edges(list(key.edges), base, key.m).items():
            x, xi, sign = (0,) * d, (), 1
            for cx, cxi in comps:
                x = _add_exp(x, cx)
                xi, s = _merge_xi(xi, cxi)
                if xi is None:
                    break
                sign *= s
            if xi is not None:
                fs.add_term(out, (x, xi), gc * c * sign)
    return Polyvector(d, out, u)


def vkgra_act(gamma, args):
    """Operator of arity n from a vKGra(m, n) formal sum acting on m
    polyvectors: zero unless the v-power at vertex i equals the u-power of
    args[i]; edges into j̄ differentiate slot j; terms with a ξ left over
    are dropped."""
    args = list(args)
    if not args:
        raise ArityMismatch("no arguments")
    d = args[0].d
    ns = {k.n for k in gamma}
    if len(ns) > 1:
        raise ArityMismatch("graphs with different numbers of type-II vertices")
    n = ns.pop() if ns else 0
    out = {}
    zero_idx = (0,) * d
    for key, gc in gamma.items():
        if key.m != len(args):
            raise ArityMismatch(f"graph with {key.m} type-I vertices on {len(args)} arguments")
        if any(p != X.u for p, X in zip(key.v, args)):
            continue
        base = {comps + (zero_idx,) * n: c for comps, c in _initial_state(args).items()}
        for comps, c in _apply_edges(list(key.edges), base, key.m).items():
            if any(cxi for _, cxi in comps[:key.m]):
                continue
            x = (0,) * d
            for cx, _ in comps[:key.m]:
                x = _add_exp(x, cx)
            fs.add_term(out, (x, tuple(comps[key.m:])), gc * c)
    return MultiDiffOp(d, n, out)


# -- multidifferential operators --------------------------------------------

def _leibniz(I, count):
    """Ways to split the multi-index I over ``count`` factors, with the
    multinomial coefficients: yields (parts, coeff)."""
    per_coord = []
    for a in I:
        opts = []
        for split in _compositions(a, count):
            coef = factorial(a)
            for s in split:
                coef //= factorial(s)
            opts.append((split, coef))
        per_coord.append(opts)
    for choice in itertools.product(*per_coord):
        coef = 1
        for _, c in choice:
            coef *= c
        parts = tuple(tuple(choice[l][0][r] for l in range(len(I))) for r in range(count))
        yield parts, coef


def _compositions(a, k):
    if k == 1:
        yield (a,)
        return
    for first in range(a + 1):
        for rest in _compositions(a - first, k - 1):
            yield (first,) + rest


def _diff_monomial(x, I):
    """∂^I x^a = coefficient · x^{a−I}, or (None, 0)."""
    coef = 1
    for a, i in zip(x, I):
        if i > a:
            return None, 0
        for t in range(i):
            coef *= a - t
    return tuple(a - i for a, i in zip(x, I)), coef


class MultiDiffOp:
    """Σ c·x^a ∂^{I₁}⊗…⊗∂^{Iₙ}.  Empty multi-indices are allowed (the
    cyclic action produces them); ``vanishes_on_constants`` tests for the
    normalized subspace."""

    __slots__ = ("d", "n", "terms")

    def __init__(self, d, n, terms=None):
        self.d, self.n = d, n
        clean = {}
        for (x, I), c in (terms or {}).items():
            x, I = tuple(x), tuple(tuple(i) for i in I)
            if len(x) != d or len(I) != n or any(len(i) != d for i in I):
                raise DimensionMismatch(f"term {(x, I)} does not fit d={d}, n={n}")
            fs.add_term(clean, (x, I), Fraction(c))
        self.terms = clean

    @classmethod
    def zero(cls, d, n):
        return cls(d, n, {})

    def __add__(self, other):
        self._compatible(other)
        out = dict(self.terms)
        fs.add_into(out, other.terms)
        return MultiDiffOp(self.d, self.n, out)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, k):
        return MultiDiffOp(self.d, self.n, fs.scaled(self.terms, k))

    def __eq__(self, other):
        if not isinstance(other, MultiDiffOp) or self.d != other.d:
            return False
        if not self.terms and not other.terms:
            return True
        return self.n == other.n and self.terms == other.terms

    def __repr__(self):
        return f"MultiDiffOp(d={self.d}, n={self.n}, terms={self.terms})"

    def _compatible(self, other):
        if self.d != other.d or (self.n != other.n and self.terms and other.terms):
            raise DimensionMismatch("operators of different shape")

    def is_zero(self):
        return not self.terms

    def vanishes_on_constants(self):
        return all(all(any(i) for i in I) for _, I in self.terms)

    def __call__(self, *funcs):
        """Evaluate on polynomial functions given as {exponent: coeff}."""
        if len(funcs) != self.n:
            raise ArityMismatch(f"operator of arity {self.n} on {len(funcs)} functions")
        out = {}
        for (x, I), c in self.terms.items():
            acc = {x: c}
            for f, idx in zip(funcs, I):
                df = {}
                for e, v in f.items():
                    y, k = _diff_monomial(e, idx)
                    if y is not None and k:
                        fs.add_term(df, y, v * k)
                prod = {}
                for a, ca in acc.items():
                    for b, cb in df.items():
                        fs.add_term(prod, _add_exp(a, b), ca * cb)
                acc = prod
            fs.add_into(out, acc)
        return out

    def to_json(self):
        terms = [{"c": format_rational(c), "x": list(x), "I": [list(i) for i in I]}
                 for (x, I), c in sorted(self.terms.items())]
        return {"d": self.d, "n": self.n, "terms": terms}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        terms = {}
        for t in obj["terms"]:
            key = (tuple(t["x"]), tuple(tuple(i) for i in t["I"]))
            fs.add_term(terms, key, parse_rational(t.get("c", 1)))
        return cls(int(obj["d"]), int(obj["n"]), terms)


def MU_D(d):
    """The product μ(f, g) = fg."""
    z = (0,) * d
    return MultiDiffOp(d, 2, {(z, (z, z)): 1})


def gerst_compose(D, i, E):
    """(D ∘ᵢ E)(f…) = D(f₁, …, E(fᵢ, …), …), expanded by the Leibniz rule."""
    if D.d != E.d:
        raise DimensionMismatch("operators on different R^d")
    if not 1 <= i <= D.n:
        raise ArityMismatch(f"slot {i} not in 1..{D.n}")
    m = E.n
    out = {}
    for (x, I), c in D.terms.items():
        Ii = I[i - 1]
        for (y, J), e in E.terms.items():
            # ∂^{Iᵢ} falls on the coefficient y and on each of E's m inputs
            for parts, coef in _leibniz(Ii, m + 1):
                ycoef, k = _diff_monomial(y, parts[0])
                if ycoef is None or not k:
                    continue
                inner = tuple(_add_exp(J[r], parts[r + 1]) for r in range(m))
                key = (_add_exp(x, ycoef), I[:i - 1] + inner + I[i:])
                fs.add_term(out, key, c * e * coef * k)
    return MultiDiffOp(D.d, D.n + m - 1, out)


def total_composition(D, E):
    """D∘E = Σᵢ (−1)^{(i−1)(|E|−1)} D∘ᵢE with |E| the arity of E."""
    out = MultiDiffOp.zero(D.d, D.n + E.n - 1)
    for i in range(1, D.n + 1):
        term = gerst_compose(D, i, E)
        out = out + (term.scaled(-1) if ((i - 1) * (E.n - 1)) % 2 else term)
    return out


def gerst_bracket(D, E):
    """[D, E] = D∘E − (−1)^{(|D|−1)(|E|−1)} E∘D."""
    a = total_composition(D, E)
    b = total_composition(E, D)
    sgn = ((D.n - 1) * (E.n - 1)) % 2
    return a + b if sgn else a - b


def hochschild_d(D):
    """d_Hoch = [μ, −]."""
    return gerst_bracket(MU_D(D.d), D)


# -- cyclic action -----------------------------------------------------------

def cyclic_sigma_D(D):
    """σD defined by ∫ g₀·(σD)(g₁, …, gₙ) = ∫ gₙ·D(g₀, g₁, …, g_{n−1}),
    with ∂^{I₁} moved off g₀ by integration by parts."""
    n, d = D.n, D.d
    if n == 0:
        return D
    zero = (0,) * d
    out = {}
    for (x, I), c in D.terms.items():
        I1 = I[0]
        sgn = -1 if sum(I1) % 2 else 1
        # factors after parts: coefficient, slots g₁ … g_{n−1} (carrying I₂…Iₙ), gₙ
        for parts, coef in _leibniz(I1, n + 1):
            y, k = _diff_monomial(x, parts[0])
            if y is None or not k:
                continue
            slots = tuple(_add_exp(I[r], parts[r]) for r in range(1, n)) + (_add_exp(zero, parts[n]),)
            fs.add_term(out, (y, slots), c * sgn * coef * k)
    return MultiDiffOp(d, n, out)


def hochschild_d_prime(D):
    """d_Hoch without the term μ∘₁D (the one whose output slot is f₁·D(…));
    it intertwines the cyclic norms: d_Hoch∘N = N∘b′."""
    return hochschild_d(D) - gerst_compose(MU_D(D.d), 1, D)


def graded_sigma_D(D):
    """(−1)ⁿσ, the action used for invariants."""
    s = cyclic_sigma_D(D)
    return s.scaled(-1) if D.n % 2 else s


def cyclic_norm_D(D):
    """N = Σ_j σ̂^j over the n+1 powers of the graded cyclic action."""
    acc = MultiDiffOp.zero(D.d, D.n)
    cur = D
    for _ in range(D.n + 1):
        acc = acc + cur
        cur = graded_sigma_D(cur)
    return acc


def cyclic_invariants_D(D):
    """Projector onto invariants: N/(n+1)."""
    return cyclic_norm_D(D).scaled(Fraction(1, D.n + 1))


def is_cyclic_invariant_D(D):
    return graded_sigma_D(D) == D


def check_dpoly_sigma_closed(samples):
    """Report on pairs (D, E) of operators, projected to invariants: d_Hoch
    and the bracket keep them invariant, the projector commutes with d_Hoch
    on invariants, and on all of D_poly d_Hoch∘N = N∘b′."""
    from .operad import Report
    rep = Report("Dpoly-sigma-closed")
    for D, E in samples:
        P, Q = cyclic_invariants_D(D), cyclic_invariants_D(E)
        rep.record(is_cyclic_invariant_D(hochschild_d(P)), law="d_Hoch preserves invariants", D=D)
        rep.record(hochschild_d(P) == cyclic_invariants_D(hochschild_d(P)), law="projector commutes with d_Hoch on invariants", D=D)
        rep.record(hochschild_d(cyclic_norm_D(D)) == cyclic_norm_D(hochschild_d_prime(D)), law="d_Hoch N = N b'", D=D)
        rep.record(is_cyclic_invariant_D(gerst_bracket(P, Q)), law="bracket preserves invariants", D=D, E=E)
    return rep.finish()


# -- HKR --------------------------------------------------------------------

def _unit(d, l):
    return tuple(1 if j == l else 0 for j in range(d))


def hkr(X):
    """hkr(X)(f₁…f_k) = (1/k!) Σ_τ sgn τ ⟨X, df_{τ1}, …, df_{τk}⟩ with
    ⟨f ξ_{i1}…ξ_{ik}, α₁…α_k⟩ = f·det(α_b(∂_{i_a}))."""
    ks = X.xi_degrees() or {0}
    if len(ks) > 1:
        raise ValueError("hkr expects a homogeneous polyvector")
    k = ks.pop()
    d = X.d
    out = {}
    perms = list(itertools.permutations(range(k)))

    def sgn(p):
        inv = sum(1 for a, b in itertools.combinations(p, 2) if a > b)
        return -1 if inv % 2 else 1

    for (x, xi), c in X.terms.items():
        for tau in perms:
            for pi in perms:
                # slot τ(b) receives ∂_{i_{π(b)}}
                slots = [None] * k
                for b in range(k):
                    slots[tau[b]] = _unit(d, xi[pi[b]])
                fs.add_term(out, (x, tuple(slots)), Fraction(c * sgn(tau) * sgn(pi), factorial(k)))
    return MultiDiffOp(d, k, out)


def cyclic_hkr_solve(X, max_order=2):
    """Search for Φ(X) = hkr(X) + C, C a combination of normalized operators
    of the same arity, of order ≥ 2 in some slot and ≤ max_order in each, with coefficient
    degree ≤ that of X, such that Φ(X) is a graded cyclic invariant and the
    chain-map equation d_Hoch Φ(X) = Φ(u·Div X) can hold: when Div X = 0 this
    forces Φ(X) to be a cocycle, otherwise Φ(u·Div X) is set to d_Hoch Φ(X).

    Returns (Φ(X), Φ(u·Div X)) or None if the searched span has no solution.
    """
    from .exactla import SparseMatrix, solve
    H = hkr(X)
    d, n = X.d, H.n
    closed = divergence(X).is_zero()
    maxdeg = max((sum(x) for x, _ in X.terms), default=0)
    xs = [e for e in itertools.product(range(maxdeg + 1), repeat=d) if sum(e) <= maxdeg]
    idx = [e for e in itertools.product(range(max_order + 1), repeat=d) if 0 < sum(e) <= max_order]
    # corrections are of higher order somewhere, so the first-order part stays hkr(X)
    gens = [MultiDiffOp(d, n, {(x, I): 1}) for x in xs for I in itertools.product(idx, repeat=n)
            if any(sum(i) > 1 for i in I)]

    def conditions(D):
        parts = [graded_sigma_D(D) - D]
        if closed:
            parts.append(hochschild_d(D))
        vec = {}
        for tag, P in enumerate(parts):
            for key, c in P.terms.items():
                vec[(tag, key)] = c
        return vec

    target = conditions(H)
    cols = [conditions(g) for g in gens]
    keys = sorted({k for v in cols + [target] for k in v}, key=repr)
    pos = {k: j for j, k in enumerate(keys)}
    A = SparseMatrix.from_columns([{pos[k]: v for k, v in col.items()} for col in cols], len(keys))
    sol = solve(A, {pos[k]: -v for k, v in target.items()})
    if sol is None:
        return None
    phi = H
    for j, c in sol.items():
        phi = phi + gens[j].scaled(c)
    return phi, hochschild_d(phi)
