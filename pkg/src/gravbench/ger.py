"""Ger realized inside Gra, generated by μ (two vertices, no edge) and the
bracket b = Γ^{1,2} + Γ^{2,1}, together with R = Δ and Grav = ker R."""
import itertools
from fractions import Fraction

from . import formal as fs
from .exactla import GradedBasis, SparseMatrix, _rref, kernel_basis, rank
from .graphs import BRACKET, IDENTITY, MU, Gra, degree, gra_compose, gra_delta, relabel
from .operad import DgOperad

__all__ = ["ConcreteGer", "GER"]


def _act(x, perm):
    out = {}
    for k, c in x.items():
        fs.add_into(out, relabel(k, perm), c)
    return out


class ConcreteGer(DgOperad):
    """Sub-operad of Gra; elements are formal sums of graphs.

    ``basis(n)`` returns canonical echelon vectors, one per dimension, and
    ``coords`` expresses any element of Ger(n) in that basis.
    """

    name = "Ger"

    def __init__(self):
        self._echelon = {}
        self._basis = {}

    # the operad structure is the one of Gra
    def arity(self, key):
        return key.m

    def degree(self, key):
        return degree(key)

    def compose_keys(self, a, i, b):
        return Gra.compose_keys(a, i, b)

    def act_key(self, key, perm):
        return relabel(key, perm)

    def rho_key(self, key):
        return gra_delta({key: Fraction(1)})

    def spanning(self, n):
        if n == 1:
            return [dict(IDENTITY)]
        prev = self.basis(n - 1)
        out = []
        # Ger(n-1) is S_{n-1}-stable, so (2, n-2)-shuffles suffice
        shuffles = []
        for a, b in itertools.combinations(range(1, n + 1), 2):
            rest = [j for j in range(1, n + 1) if j not in (a, b)]
            shuffles.append(tuple([a, b] + rest))
        for y in prev:
            for g in (MU, BRACKET):
                base = gra_compose(y, 1, g)
                for perm in shuffles:
                    out.append(_act(base, perm))
        return out

    def _build(self, n):
        if n in self._echelon:
            return
        span = self.spanning(n)
        keys = sorted({k for x in span for k in x})
        index = {k: j for j, k in enumerate(keys)}
        rows = [{index[k]: c for k, c in x.items()} for x in span]
        piv = _rref(rows)
        order = sorted(piv)
        basis = [{keys[j]: c for j, c in piv[p].items()} for p in order]
        self._echelon[n] = (keys, index, [(keys[p], piv[p]) for p in order])
        self._basis[n] = basis

    def basis(self, n):
        self._build(n)
        return self._basis[n]

    def dim(self, n):
        return len(self.basis(n))

    def dims_by_degree(self, n):
        out = {}
        for x in self.basis(n):
            d = degree(next(iter(x)))
            out[d] = out.get(d, 0) + 1
        return dict(sorted(out.items()))

    def coords(self, x, n):
        """Coordinates of x in the echelon basis of Ger(n); raises if x ∉ Ger(n)."""
        self._build(n)
        keys, index, pivots = self._echelon[n]
        c = [x.get(pk, Fraction(0)) for pk, _ in pivots]
        rest = dict(x)
        for coef, b in zip(c, self._basis[n]):
            fs.add_into(rest, b, -coef)
        if rest:
            raise ValueError("element is not in Ger(n)")
        return c

    def contains(self, x, n):
        try:
            self.coords(x, n)
            return True
        except ValueError:
            return False

    def graded_basis(self, n):
        B = self.basis(n)
        return GradedBasis(list(range(len(B))), [degree(next(iter(b))) for b in B])

    def rotation_matrix(self, n):
        """Matrix of R = Δ on the echelon basis of Ger(n)."""
        B = self.basis(n)
        cols = []
        for b in B:
            img = gra_delta(b)
            cols.append({j: v for j, v in enumerate(self.coords(img, n)) if v})
        return SparseMatrix.from_columns(cols, len(B))

    def mixed_complex(self, n):
        """(Ger(n), 0, R) as a mixed complex on the echelon basis."""
        from .mixed import MixedComplex
        B = self.graded_basis(n)
        return MixedComplex(B, SparseMatrix.zero(len(B), len(B)), self.rotation_matrix(n))

    def grav_basis(self, n):
        """ker R on Ger(n), as formal sums of graphs."""
        B = self.basis(n)
        out = []
        for vec in kernel_basis(self.rotation_matrix(n)):
            x = {}
            for coef, b in zip(vec, B):
                fs.add_into(x, b, coef)
            out.append(x)
        return out

    def grav_dim(self, n):
        return self.dim(n) - rank(self.rotation_matrix(n))

    def grav_dims_by_degree(self, n):
        out = {}
        R = self.rotation_matrix(n)
        B = self.basis(n)
        degs = [degree(next(iter(b))) for b in B]
        for d in sorted(set(degs)):
            idx = [j for j, dj in enumerate(degs) if dj == d]
            tgt = [j for j, dj in enumerate(degs) if dj == d - 1]
            cols = R.column_dicts()
            sub = SparseMatrix.from_columns([{tgt.index(r): v for r, v in cols[j].items()} for j in idx], len(tgt))
            k = len(idx) - rank(sub)
            if k:
                out[d] = k
        return out


GER = ConcreteGer()
