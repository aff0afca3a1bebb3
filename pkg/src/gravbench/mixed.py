"""Mixed complexes (V, d, Δ) with |d| = +1, |Δ| = -1, and the cyclic chain
constructions CC⁻ = V[u], CC = V[v], CC^per = V[u, u⁻¹], all truncated.

Truncated complexes only report homology in degrees where nothing in the
three neighbouring degrees was cut away (the "window").
"""
import json

from .exactla import (
    DimensionMismatch, GradedBasis, SparseMatrix, format_rational, homology_dims,
    parse_rational,
)

__all__ = ["MixedComplexError", "MixedComplex", "ChainComplex", "TruncatedComplex",
           "tensor", "cc_minus", "cc_plain", "cc_per", "ses_check"]


class MixedComplexError(ValueError):
    pass


def _check_degree_shift(M, basis, shift, name):
    for r, c, _ in M.entries():
        if basis.degrees[r] != basis.degrees[c] + shift:
            raise MixedComplexError(f"{name} does not have degree {shift:+d} at ({r},{c})")


class ChainComplex:
    """A graded space with a single degree +1 differential."""

    def __init__(self, basis, d, check=True):
        if d.shape != (len(basis), len(basis)):
            raise DimensionMismatch("differential shape does not match basis")
        self.basis = basis
        self.d = d
        if check:
            _check_degree_shift(d, basis, 1, "d")
            if not (d @ d).is_zero():
                raise MixedComplexError("d^2 != 0")

    def degrees(self):
        return sorted(set(self.basis.degrees))

    def block(self, src_deg, dst_deg):
        src = self.basis.in_degree(src_deg)
        dst = self.basis.in_degree(dst_deg)
        pos = {j: i for i, j in enumerate(dst)}
        cols = self.d.column_dicts()
        out = []
        for c in src:
            out.append({pos[r]: v for r, v in cols[c].items() if r in pos})
        return SparseMatrix.from_columns(out, len(dst))

    def homology_in_degree(self, deg):
        return homology_dims(self.block(deg - 1, deg), self.block(deg, deg + 1))

    def homology(self, degrees=None):
        if degrees is None:
            degrees = self.degrees()
        out = {}
        for D in degrees:
            h = self.homology_in_degree(D)
            if h:
                out[D] = h
        return out

    def total_homology(self, degrees=None):
        return sum(self.homology(degrees).values())


class MixedComplex:
    def __init__(self, basis, d, delta, check=True):
        n = len(basis)
        if d.shape != (n, n) or delta.shape != (n, n):
            raise DimensionMismatch("operator shape does not match basis")
        self.basis, self.d, self.delta = basis, d, delta
        if check:
            self.validate()

    def validate(self):
        _check_degree_shift(self.d, self.basis, 1, "d")
        _check_degree_shift(self.delta, self.basis, -1, "delta")
        if not (self.d @ self.d).is_zero():
            raise MixedComplexError("d^2 != 0")
        if not (self.delta @ self.delta).is_zero():
            raise MixedComplexError("delta^2 != 0")
        if not (self.d @ self.delta + self.delta @ self.d).is_zero():
            raise MixedComplexError("d delta + delta d != 0")

    def __len__(self):
        return len(self.basis)

    @classmethod
    def from_degrees(cls, degrees, d_entries=(), delta_entries=(), labels=None):
        n = len(degrees)
        labels = list(range(n)) if labels is None else labels
        return cls(GradedBasis(labels, degrees), SparseMatrix(n, n, d_entries),
                   SparseMatrix(n, n, delta_entries))

    def homology(self):
        return ChainComplex(self.basis, self.d, check=False).homology()

    def to_json(self):
        order = sorted(range(len(self.basis)), key=lambda i: (self.basis.degrees[i], i))
        pos = {old: new for new, old in enumerate(order)}

        def ents(M):
            return sorted([pos[r], pos[c], format_rational(v)] for r, c, v in M.entries())

        return {"dims_by_degree": {str(k): v for k, v in self.basis.dims_by_degree().items()},
                "d_entries": ents(self.d), "delta_entries": ents(self.delta)}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        degs = []
        for k, v in sorted(((int(k), v) for k, v in obj["dims_by_degree"].items())):
            degs.extend([k] * v)

        def ents(rows):
            return [(r, c, parse_rational(v)) for r, c, v in rows]

        return cls.from_degrees(degs, ents(obj.get("d_entries", [])), ents(obj.get("delta_entries", [])))


def tensor(A, B):
    """A ⊗ B with d and Δ extended by the Koszul rule."""
    la, lb = len(A), len(B)
    labels, degs = [], []
    for i in range(la):
        for j in range(lb):
            labels.append((A.basis.labels[i], B.basis.labels[j]))
            degs.append(A.basis.degrees[i] + B.basis.degrees[j])
    basis = GradedBasis(labels, degs)

    def extend(MA, MB):
        ents = {}
        ca, cb = MA.column_dicts(), MB.column_dicts()
        for i in range(la):
            sign = -1 if A.basis.degrees[i] % 2 else 1
            for j in range(lb):
                src = i * lb + j
                for r, v in ca[i].items():
                    key = (r * lb + j, src)
                    ents[key] = ents.get(key, 0) + v
                for r, v in cb[j].items():
                    key = (i * lb + r, src)
                    ents[key] = ents.get(key, 0) + sign * v
        n = la * lb
        return SparseMatrix(n, n, [(r, c, v) for (r, c), v in ents.items() if v])

    return MixedComplex(basis, extend(A.d, B.d), extend(A.delta, B.delta))


class TruncatedComplex(ChainComplex):
    """A·t^k for k in ``powers`` with total differential; ``window`` lists the
    degrees where truncation has no effect on homology."""

    def __init__(self, A, powers, weight, delta_step, name):
        self.base = A
        self.powers = list(powers)
        self.weight = weight
        self.name = name
        labels, degs = [], []
        for k in self.powers:
            for i in range(len(A)):
                labels.append((A.basis.labels[i], k))
                degs.append(A.basis.degrees[i] + weight * k)
        basis = GradedBasis(labels, degs)
        pos = {k: idx for idx, k in enumerate(self.powers)}
        n = len(A)
        dcols, xcols = A.d.column_dicts(), A.delta.column_dicts()
        ents = {}
        for k in self.powers:
            for i in range(n):
                src = pos[k] * n + i
                for r, v in dcols[i].items():
                    key = (pos[k] * n + r, src)
                    ents[key] = ents.get(key, 0) + v
                k2 = k + delta_step
                if k2 in pos:
                    for r, v in xcols[i].items():
                        key = (pos[k2] * n + r, src)
                        ents[key] = ents.get(key, 0) + v
        N = len(labels)
        super().__init__(basis, SparseMatrix(N, N, [(r, c, v) for (r, c), v in ents.items() if v]))
        self.window = self._window()

    def _window(self):
        lo, hi = min(self.powers), max(self.powers)
        base_degs = sorted(set(self.base.basis.degrees))
        if not base_degs:
            return []
        w = self.weight
        inf_lo = lo == 0 and self.name in ("minus", "plain")
        cand = sorted(set(self.basis.degrees))
        ok = []
        for D in cand:
            good = True
            for D2 in (D - 1, D, D + 1):
                for b in base_degs:
                    if (D2 - b) % 2:
                        continue
                    k = (D2 - b) // w
                    if k < lo:
                        if not inf_lo:
                            good = False
                    elif k > hi:
                        good = False
            if good:
                ok.append(D)
        return ok

    def homology(self, degrees=None):
        return super().homology(self.window if degrees is None else degrees)

    def dims_by_degree(self, degrees=None):
        dims = self.basis.dims_by_degree()
        if degrees is None:
            degrees = self.window
        return {D: dims.get(D, 0) for D in degrees}


def cc_minus(A, trunc):
    """(A[u], d + uΔ), u of degree 2, powers 0..trunc."""
    if trunc < 1:
        raise ValueError("trunc must be >= 1")
    return TruncatedComplex(A, range(0, trunc + 1), 2, 1, "minus")


def cc_plain(A, trunc):
    """(A[v], d + uΔ) with v of degree -2 and u lowering the v-power."""
    if trunc < 1:
        raise ValueError("trunc must be >= 1")
    return TruncatedComplex(A, range(0, trunc + 1), -2, -1, "plain")


def cc_per(A, trunc):
    """(A[u, v], d + uΔ), u-powers -trunc..trunc."""
    if trunc < 1:
        raise ValueError("trunc must be >= 1")
    return TruncatedComplex(A, range(-trunc, trunc + 1), 2, 1, "per")


def ses_check(A, trunc):
    """0 -> CC⁻ -> CC^per -> Σ⁻²CC -> 0 at chain level.

    Checks that the inclusion and the projection commute with the
    differentials, and that the chain dimensions (hence Euler
    characteristics) add up degree by degree.
    """
    per = cc_per(A, trunc)
    minus = cc_minus(A, trunc)
    plain = cc_plain(A, trunc - 1)
    n = len(A)
    ok_incl = True
    ok_proj = True
    pcols = per.d.column_dicts()
    mcols = minus.d.column_dicts()
    qcols = plain.d.column_dicts()

    def per_index(i, k):
        return (k + trunc) * n + i

    for k in range(0, trunc + 1):
        for i in range(n):
            img = {r: v for r, v in pcols[per_index(i, k)].items()}
            want = {per_index(r % n, r // n): v for r, v in mcols[k * n + i].items()}
            if img != want:
                ok_incl = False
    for k in range(1, trunc + 1):
        for i in range(n):
            img = {}
            for r, v in pcols[per_index(i, -k)].items():
                kk = r // n - trunc
                if kk < 0:
                    img[(-kk - 1) * n + r % n] = v
            want = qcols[(k - 1) * n + i]
            if img != want:
                ok_proj = False
    dm = minus.basis.dims_by_degree()
    dp = per.basis.dims_by_degree()
    dq = plain.basis.dims_by_degree()
    degrees = sorted(set(per.window))
    rows = {}
    additive = True
    for D in degrees:
        a, b, c = dm.get(D, 0), dp.get(D, 0), dq.get(D + 2, 0)
        rows[D] = (a, b, c)
        if a + c != b:
            additive = False
    chi = lambda f: sum((-1) ** (D % 2) * f(D) for D in degrees)
    euler = (chi(lambda D: rows[D][1]) == chi(lambda D: rows[D][0]) + chi(lambda D: rows[D][2]))
    return {"inclusion_chain_map": ok_incl, "projection_chain_map": ok_proj,
            "dims_additive": additive, "euler_additive": euler, "dims": rows,
            "ok": ok_incl and ok_proj and additive and euler}
