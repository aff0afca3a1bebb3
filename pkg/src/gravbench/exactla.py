"""Exact sparse linear algebra over Q.

Matrices are stored row-wise as ``{row: {col: Fraction}}``.  Rank uses
integer elimination with content normalization, kernels and solves use a
fraction RREF.  Nothing here ever touches floating point.
"""
from fractions import Fraction
from math import gcd
import json

__all__ = [
    "LinAlgError", "CompositionNotZero", "DimensionMismatch", "BasisError",
    "parse_rational", "format_rational", "SparseMatrix", "GradedBasis",
    "rank", "kernel_basis", "homology_dims", "solve", "span_rank",
    "matrix_of", "coordinates",
]


class LinAlgError(Exception):
    pass


class CompositionNotZero(LinAlgError):
    pass


class DimensionMismatch(LinAlgError):
    pass


class BasisError(LinAlgError):
    """A vector has support outside the basis it is expressed in."""


def parse_rational(s):
    if isinstance(s, Fraction):
        return s
    if isinstance(s, bool):
        raise TypeError("bool is not a rational")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        return Fraction(s.strip())
    raise TypeError(f"cannot read {s!r} as a rational")


def format_rational(q):
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class SparseMatrix:
    """Immutable sparse matrix with Fraction entries."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows, cols, entries=()):
        if rows < 0 or cols < 0:
            raise DimensionMismatch("negative shape")
        data = {}
        for r, c, v in entries:
            if not (0 <= r < rows and 0 <= c < cols):
                raise DimensionMismatch(f"entry ({r},{c}) outside {rows}x{cols}")
            v = parse_rational(v)
            if v == 0:
                continue
            row = data.setdefault(r, {})
            if c in row:
                raise ValueError(f"duplicate entry at ({r},{c})")
            row[c] = v
        self.rows = rows
        self.cols = cols
        self._data = data

    @classmethod
    def _wrap(cls, rows, cols, data):
        m = cls.__new__(cls)
        m.rows, m.cols = rows, cols
        m._data = {r: dict(row) for r, row in data.items() if row}
        return m

    @classmethod
    def from_rows(cls, row_dicts, cols):
        data = {}
        for r, row in enumerate(row_dicts):
            clean = {c: Fraction(v) for c, v in row.items() if v != 0}
            for c in clean:
                if not 0 <= c < cols:
                    raise DimensionMismatch(f"column {c} outside width {cols}")
            if clean:
                data[r] = clean
        return cls._wrap(len(row_dicts), cols, data)

    @classmethod
    def from_columns(cls, col_dicts, rows):
        data = {}
        for c, col in enumerate(col_dicts):
            for r, v in col.items():
                if v == 0:
                    continue
                if not 0 <= r < rows:
                    raise DimensionMismatch(f"row {r} outside height {rows}")
                data.setdefault(r, {})[c] = Fraction(v)
        return cls._wrap(rows, len(col_dicts), data)

    @classmethod
    def from_dense(cls, rows):
        width = len(rows[0]) if rows else 0
        return cls.from_rows([{c: v for c, v in enumerate(r) if v} for r in rows], width)

    @classmethod
    def identity(cls, n):
        return cls._wrap(n, n, {i: {i: Fraction(1)} for i in range(n)})

    @classmethod
    def zero(cls, rows, cols):
        return cls._wrap(rows, cols, {})

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def nnz(self):
        return sum(len(r) for r in self._data.values())

    def entries(self):
        return sorted((r, c, v) for r, row in self._data.items() for c, v in row.items())

    def row(self, i):
        return dict(self._data.get(i, {}))

    def row_dicts(self):
        return [dict(self._data.get(i, {})) for i in range(self.rows)]

    def column_dicts(self):
        cols = [dict() for _ in range(self.cols)]
        for r, row in self._data.items():
            for c, v in row.items():
                cols[c][r] = v
        return cols

    def __getitem__(self, rc):
        r, c = rc
        return self._data.get(r, {}).get(c, Fraction(0))

    def is_zero(self):
        return not self._data

    def transpose(self):
        data = {}
        for r, row in self._data.items():
            for c, v in row.items():
                data.setdefault(c, {})[r] = v
        return SparseMatrix._wrap(self.cols, self.rows, data)

    def apply(self, vec):
        """Matrix times a sparse column vector ``{col: value}``."""
        out = {}
        for r, row in self._data.items():
            s = 0
            for c, v in row.items():
                x = vec.get(c)
                if x:
                    s += v * x
            if s:
                out[r] = Fraction(s)
        return out

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        data = {}
        for r, row in self._data.items():
            acc = {}
            for k, a in row.items():
                orow = other._data.get(k)
                if not orow:
                    continue
                for c, b in orow.items():
                    acc[c] = acc.get(c, 0) + a * b
            acc = {c: v for c, v in acc.items() if v}
            if acc:
                data[r] = acc
        return SparseMatrix._wrap(self.rows, other.cols, data)

    def __add__(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot add {self.shape} and {other.shape}")
        data = {r: dict(row) for r, row in self._data.items()}
        for r, row in other._data.items():
            tgt = data.setdefault(r, {})
            for c, v in row.items():
                s = tgt.get(c, 0) + v
                if s:
                    tgt[c] = s
                else:
                    tgt.pop(c, None)
        return SparseMatrix._wrap(self.rows, self.cols, data)

    def scaled(self, k):
        k = Fraction(k)
        if k == 0:
            return SparseMatrix.zero(self.rows, self.cols)
        return SparseMatrix._wrap(self.rows, self.cols,
                                  {r: {c: v * k for c, v in row.items()} for r, row in self._data.items()})

    def __neg__(self):
        return self.scaled(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(self.entries())))

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz})"

    def permuted(self, row_perm, col_perm):
        """Row r moves to row_perm[r], column c to col_perm[c]."""
        data = {}
        for r, row in self._data.items():
            data[row_perm[r]] = {col_perm[c]: v for c, v in row.items()}
        return SparseMatrix._wrap(self.rows, self.cols, data)

    def to_dense(self):
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for r, c, v in self.entries():
            out[r][c] = v
        return out

    def to_json(self):
        return {"rows": self.rows, "cols": self.cols,
                "entries": [[r, c, format_rational(v)] for r, c, v in self.entries()]}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(obj["rows"], obj["cols"], [(r, c, parse_rational(v)) for r, c, v in obj["entries"]])


# -- elimination ----------------------------------------------------------

def _integer_row(row):
    den = 1
    for v in row.values():
        d = v.denominator
        den = den * d // gcd(den, d)
    out = {c: int(v * den) for c, v in row.items()}
    return _primitive(out)


def _primitive(row):
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    if g > 1:
        row = {c: v // g for c, v in row.items()}
    return row


def _int_rank(rows):
    pivots = {}
    for row in sorted((r for r in rows if r), key=len):
        while row:
            lead = min(row)
            prow = pivots.get(lead)
            if prow is None:
                pivots[lead] = row
                break
            a, p = row[lead], prow[lead]
            g = gcd(a, p)
            fa, fp = p // g, a // g
            new = {c: fa * v for c, v in row.items()}
            for c, v in prow.items():
                s = new.get(c, 0) - fp * v
                if s:
                    new[c] = s
                else:
                    new.pop(c, None)
            row = _primitive(new) if new else new
    return len(pivots)


def rank(M):
    """Rank over Q."""
    if isinstance(M, SparseMatrix):
        rows = M._data.values()
    else:
        rows = M
    return _int_rank([_integer_row(r) for r in rows if r])


def span_rank(vectors):
    """Dimension of the span of sparse vectors ``{index: value}``."""
    return _int_rank([_integer_row({k: Fraction(v) for k, v in vec.items() if v}) for vec in vectors])


def _rref(rows):
    """Reduced row echelon form; returns ``{pivot_col: row}`` with unit pivots."""
    pivots = {}
    for row in rows:
        row = {c: Fraction(v) for c, v in row.items() if v}
        for c in sorted(set(row) & set(pivots)):
            a = row.get(c)
            if not a:
                continue
            for k, v in pivots[c].items():
                s = row.get(k, 0) - a * v
                if s:
                    row[k] = s
                else:
                    row.pop(k, None)
        if not row:
            continue
        lead = min(row)
        inv = 1 / row[lead]
        row = {c: v * inv for c, v in row.items()}
        for pc, prow in pivots.items():
            a = prow.get(lead)
            if a:
                for k, v in row.items():
                    s = prow.get(k, 0) - a * v
                    if s:
                        prow[k] = s
                    else:
                        prow.pop(k, None)
        pivots[lead] = row
    return pivots


def kernel_basis(M):
    """Basis of ker M as dense lists of Fractions (one per free column)."""
    piv = _rref(M._data.values())
    free = [c for c in range(M.cols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * M.cols
        v[f] = Fraction(1)
        for pc, prow in piv.items():
            a = prow.get(f)
            if a:
                v[pc] = -a
        basis.append(v)
    return basis


def solve(M, b):
    """One solution x of M x = b (b sparse ``{row: value}``), or None."""
    extra = M.cols
    cols = M.column_dicts()
    rows = [dict() for _ in range(M.rows)]
    for c, col in enumerate(cols):
        for r, v in col.items():
            rows[r][c] = v
    for r, v in b.items():
        if not 0 <= r < M.rows:
            raise DimensionMismatch(f"rhs row {r} outside height {M.rows}")
        if v:
            rows[r][extra] = Fraction(v)
    piv = _rref(rows)
    if extra in piv:
        return None
    x = {}
    for pc, prow in piv.items():
        v = prow.get(extra)
        if v:
            x[pc] = v
    return x


def homology_dims(d_in, d_out):
    """dim ker(d_out) - rank(d_in) for a composable pair C' -> C -> C''."""
    if d_in.rows != d_out.cols:
        raise DimensionMismatch(f"d_in lands in dim {d_in.rows} but d_out starts at dim {d_out.cols}")
    if not (d_out @ d_in).is_zero():
        raise CompositionNotZero("d_out . d_in != 0")
    return d_out.cols - rank(d_out) - rank(d_in)


class GradedBasis:
    """Ordered basis of canonical keys with an integer degree per key."""

    __slots__ = ("labels", "degrees", "_index")

    def __init__(self, labels, degrees):
        labels = list(labels)
        degrees = [int(d) for d in degrees]
        if len(labels) != len(degrees):
            raise DimensionMismatch("labels and degrees differ in length")
        index = {}
        for i, k in enumerate(labels):
            if k in index:
                raise ValueError(f"duplicate basis label {k!r}")
            index[k] = i
        self.labels = labels
        self.degrees = degrees
        self._index = index

    @classmethod
    def from_keys(cls, keys, degree_of, sort=True):
        keys = list(keys)
        if sort:
            keys = sorted(keys)
        return cls(keys, [degree_of(k) for k in keys])

    def __len__(self):
        return len(self.labels)

    def __contains__(self, key):
        return key in self._index

    def index(self, key):
        try:
            return self._index[key]
        except KeyError:
            raise BasisError(f"{key!r} is not in the basis") from None

    def degree_of(self, key):
        return self.degrees[self.index(key)]

    def in_degree(self, deg):
        return [i for i, d in enumerate(self.degrees) if d == deg]

    def dims_by_degree(self):
        out = {}
        for d in self.degrees:
            out[d] = out.get(d, 0) + 1
        return dict(sorted(out.items()))

    def vector(self, combo):
        """Coordinates of a formal sum ``{key: coeff}``."""
        out = {}
        for k, v in combo.items():
            if v:
                out[self.index(k)] = Fraction(v)
        return out

    def element(self, vec):
        """Formal sum from coordinates (dict or dense list)."""
        if isinstance(vec, dict):
            items = vec.items()
        else:
            items = enumerate(vec)
        return {self.labels[i]: Fraction(v) for i, v in items if v}


def matrix_of(fn, domain, codomain):
    """Matrix of a linear map given on basis keys.

    ``fn(key)`` returns a formal sum ``{key: coeff}`` over ``codomain``;
    ``domain`` is a GradedBasis or a sequence of keys.
    """
    keys = domain.labels if isinstance(domain, GradedBasis) else list(domain)
    cols = [codomain.vector(fn(k)) for k in keys]
    return SparseMatrix.from_columns(cols, len(codomain))


def coordinates(vectors, basis):
    return [basis.vector(v) for v in vectors]
