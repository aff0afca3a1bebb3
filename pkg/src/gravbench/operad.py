"""Generic dg operads over Q and the constructions built from a rotation.

An operad element is a formal sum (see ``formal``) of canonical basis keys
of one arity.  Concrete operads subclass ``DgOperad`` and implement the
key-level maps; everything here is extended bilinearly.

Symmetric groups act on the right on input labels.  ``act(a, p)`` renames
input ``j`` of ``a`` to ``p[j-1]``, so ``act(act(a, p), q) = act(a, q∘p)``.
"""
import itertools
import random
import time

from . import formal as fs

__all__ = [
    "OperadError", "MissingDelta", "NotRotational", "NotMixed", "ArityMismatch",
    "Report", "DgOperad", "OperadElement", "external_delta", "check_rotational",
    "check_associativity", "check_equivariance", "check_derivation",
    "ThetaOperad", "theta", "LevelwiseOperad", "cc_theta_operad",
    "cc_minus_operad", "theta_to_kernel", "kernel_to_minus", "w_identities_check",
    "block_permutation", "compose_perm",
]


class OperadError(Exception):
    pass


class MissingDelta(OperadError):
    pass


class NotRotational(OperadError):
    pass


class NotMixed(OperadError):
    pass


class ArityMismatch(OperadError):
    pass


class Report:
    """Outcome of a verification sweep; failures are data, not exceptions."""

    def __init__(self, name):
        self.name = name
        self.checked = 0
        self.violations = []
        self._t0 = time.perf_counter()
        self.seconds = 0.0

    def record(self, ok, **witness):
        self.checked += 1
        if not ok:
            self.violations.append(witness)
        return ok

    def finish(self):
        self.seconds = time.perf_counter() - self._t0
        return self

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"check": self.name, "ok": self.ok, "checked": self.checked,
                "violations": [{k: repr(v) for k, v in w.items()} for w in self.violations[:20]],
                "seconds": round(self.seconds, 4)}

    def __repr__(self):
        return f"Report({self.name}: {'pass' if self.ok else 'FAIL'}, {self.checked} checked, {len(self.violations)} violations)"


class DgOperad:
    """Interface.  Subclasses implement the key-level methods."""

    name = "operad"

    # key level -----------------------------------------------------------
    def arity(self, key):
        raise NotImplementedError

    def degree(self, key):
        raise NotImplementedError

    def compose_keys(self, a, i, b):
        raise NotImplementedError

    def act_key(self, key, perm):
        raise NotImplementedError

    def d_key(self, key):
        return {}

    def rho_key(self, key):
        raise NotRotational(f"{self.name} has no rotation")

    def delta(self):
        """The distinguished arity-one element δ, or None."""
        return None

    def basis(self, n):
        raise NotImplementedError

    @property
    def has_rho(self):
        return type(self).rho_key is not DgOperad.rho_key

    # linear level --------------------------------------------------------
    def compose(self, a, i, b):
        out = {}
        for ka, ca in a.items():
            for kb, cb in b.items():
                fs.add_into(out, self.compose_keys(ka, i, kb), ca * cb)
        return out

    def act(self, a, perm):
        return fs.extend(self.act_key, a, tuple(perm))

    def d(self, a):
        return fs.extend(self.d_key, a)

    def rho(self, a):
        return fs.extend(self.rho_key, a)

    def arity_of(self, a):
        ar = {self.arity(k) for k in a}
        if len(ar) > 1:
            raise ArityMismatch(f"mixed arities {sorted(ar)}")
        return ar.pop() if ar else None

    def degree_of(self, a):
        ds = {self.degree(k) for k in a}
        if len(ds) > 1:
            raise OperadError(f"inhomogeneous element with degrees {sorted(ds)}")
        return ds.pop() if ds else None

    def homogeneous_parts(self, a):
        parts = {}
        for k, v in a.items():
            parts.setdefault(self.degree(k), {})[k] = v
        return parts


class OperadElement:
    """Homogeneous element bundled with its arity and degree."""

    __slots__ = ("operad", "value", "arity", "degree")

    def __init__(self, operad, value):
        self.operad = operad
        self.value = fs.clean(value)
        self.arity = operad.arity_of(self.value)
        self.degree = operad.degree_of(self.value)

    def __eq__(self, other):
        return isinstance(other, OperadElement) and self.value == other.value

    def __repr__(self):
        return f"OperadElement(arity={self.arity}, degree={self.degree}, terms={len(self.value)})"


def compose_perm(q, p):
    """(q∘p)[j] = q[p[j]] with 1-based permutation tuples."""
    return tuple(q[x - 1] for x in p)


def block_permutation(perm, i, sizes):
    """Permutation of the composite when the blocks of ``sizes`` are permuted
    by ``perm`` (block j of size sizes[j-1] moves to position perm[j-1])."""
    n = len(sizes)
    inv = [0] * n
    for j, pj in enumerate(perm):
        inv[pj - 1] = j
    starts_new = [0] * n
    pos = 0
    for slot in range(n):
        j = inv[slot]
        starts_new[j] = pos
        pos += sizes[j]
    out = []
    for j in range(n):
        for t in range(sizes[j]):
            out.append(starts_new[j] + t + 1)
    return tuple(out)


# -- Δ := {δ, -} -----------------------------------------------------------

def external_delta(O, a):
    """δ∘₁a − (−1)^{|a|} Σᵢ a∘ᵢδ, computed per homogeneous component."""
    delta = O.delta()
    if delta is None:
        raise MissingDelta(f"{O.name} exposes no δ")
    out = {}
    for deg, part in O.homogeneous_parts(a).items():
        n = O.arity_of(part)
        fs.add_into(out, O.compose(delta, 1, part))
        sgn = -1 if deg % 2 == 0 else 1
        for i in range(1, n + 1):
            fs.add_into(out, O.compose(part, i, delta), sgn)
    return out


# -- verification sweeps --------------------------------------------------

def _pairs(basis_by_arity, max_pairs, rng):
    pairs = []
    for p, A in basis_by_arity.items():
        for q, B in basis_by_arity.items():
            for a in A:
                for b in B:
                    for i in range(1, p + 1):
                        pairs.append((a, i, b))
    if max_pairs is not None and len(pairs) > max_pairs:
        pairs = rng.sample(pairs, max_pairs)
    return pairs


def check_rotational(O, basis_by_arity, rho=None, max_pairs=None, seed=0):
    """ρ² = 0, dρ + ρd = 0 on the listed basis, and ρ(a∘ᵢρb) = ρa∘ᵢρb on pairs.

    ``basis_by_arity`` maps arity -> list of formal sums (usually basis keys
    wrapped with ``fs.single``).
    """
    rho = rho or O.rho
    rep = Report(f"rotational:{O.name}")
    for n, elts in basis_by_arity.items():
        for a in elts:
            ra = rho(a)
            rep.record(fs.is_zero(rho(ra)), law="rho^2=0", a=a)
            rep.record(fs.is_zero(fs.combine((1, O.d(ra)), (1, rho(O.d(a))))), law="d rho + rho d = 0", a=a)
    rng = random.Random(seed)
    for a, i, b in _pairs(basis_by_arity, max_pairs, rng):
        rb = rho(b)
        lhs = rho(O.compose(a, i, rb))
        rhs = O.compose(rho(a), i, rb)
        rep.record(fs.difference(lhs, rhs) == {}, law="rho(a o_i rho b) = rho a o_i rho b", a=a, i=i, b=b)
    return rep.finish()


def check_associativity(O, triples):
    """Sequential and parallel associativity with Koszul signs.

    ``triples`` is an iterable of (a, b, c) formal sums (homogeneous).
    """
    rep = Report(f"associativity:{O.name}")
    for a, b, c in triples:
        p, q = O.arity_of(a), O.arity_of(b)
        db, dc = O.degree_of(b), O.degree_of(c)
        for i in range(1, p + 1):
            ab = O.compose(a, i, b)
            for j in range(1, q + 1):
                lhs = O.compose(ab, i + j - 1, c)
                rhs = O.compose(a, i, O.compose(b, j, c))
                rep.record(fs.difference(lhs, rhs) == {}, shape="sequential", a=a, i=i, b=b, j=j, c=c)
            for k in range(i + 1, p + 1):
                lhs = O.compose(ab, k + q - 1, c)
                rhs = O.compose(O.compose(a, k, c), i, b)
                sgn = -1 if (db * dc) % 2 else 1
                rep.record(fs.difference(lhs, fs.scaled(rhs, sgn)) == {}, shape="parallel", a=a, i=i, b=b, k=k, c=c)
    return rep.finish()


def check_equivariance(O, pairs, perms_a=None, perms_b=None):
    """(a·σ)∘_{σ(i)} b = (a∘ᵢb)·σ' and a∘ᵢ(b·τ) = (a∘ᵢb)·τ'."""
    rep = Report(f"equivariance:{O.name}")
    for a, b in pairs:
        p, q = O.arity_of(a), O.arity_of(b)
        for sigma in (perms_a or itertools.permutations(range(1, p + 1))):
            for i in range(1, p + 1):
                lhs = O.compose(O.act(a, sigma), sigma[i - 1], b)
                sizes = [q if j == i else 1 for j in range(1, p + 1)]
                big = block_permutation(sigma, i, sizes)
                rhs = O.act(O.compose(a, i, b), big)
                rep.record(fs.difference(lhs, rhs) == {}, side="outer", a=a, b=b, sigma=sigma, i=i)
        for tau in (perms_b or itertools.permutations(range(1, q + 1))):
            for i in range(1, p + 1):
                lhs = O.compose(a, i, O.act(b, tau))
                big = tuple(list(range(1, i)) + [i - 1 + t for t in tau] + list(range(i + q, p + q)))
                rhs = O.act(O.compose(a, i, b), big)
                rep.record(fs.difference(lhs, rhs) == {}, side="inner", a=a, b=b, tau=tau, i=i)
    return rep.finish()


def check_derivation(O, pairs, op=None, op_degree=1):
    """op(a∘ᵢb) = op(a)∘ᵢb + (−1)^{k|a|} a∘ᵢop(b) for an operator of degree k."""
    op = op or O.d
    rep = Report(f"derivation:{O.name}")
    for a, b in pairs:
        da = O.degree_of(a)
        sgn = -1 if (op_degree * da) % 2 else 1
        for i in range(1, O.arity_of(a) + 1):
            lhs = op(O.compose(a, i, b))
            rhs = fs.combine((1, O.compose(op(a), i, b)), (sgn, O.compose(a, i, op(b))))
            rep.record(fs.difference(lhs, rhs) == {}, a=a, i=i, b=b)
    return rep.finish()


# -- θ ---------------------------------------------------------------------

class ThetaOperad(DgOperad):
    """θ(O) = Σ⁻¹O with twist gluings a ∘̃ᵢ b = a∘ᵢρ(b).

    Degrees drop by one; the differential is −d so that θ⁻¹ = ρ is a chain
    map.  The rotation of θ(O) is ρ itself, making it an operad in mixed
    complexes.
    """

    def __init__(self, base):
        self.base = base
        self.name = f"theta({base.name})"

    def arity(self, key):
        return self.base.arity(key)

    def degree(self, key):
        return self.base.degree(key) - 1

    def compose_keys(self, a, i, b):
        return self.base.compose(fs.single(a), i, self.base.rho_key(b))

    def act_key(self, key, perm):
        return self.base.act_key(key, perm)

    def d_key(self, key):
        return fs.scaled(self.base.d_key(key), -1)

    def rho_key(self, key):
        return self.base.rho_key(key)

    def basis(self, n):
        return self.base.basis(n)

    def theta_inverse(self, a):
        """θ⁻¹ : θ(O) → O, a ↦ ρ(a)."""
        return self.base.rho(a)


def theta(O, verify=None, max_pairs=None):
    """Build θ(O).  ``verify`` (arity -> basis) triggers a rotational check."""
    if verify is not None:
        rep = check_rotational(O, verify, max_pairs=max_pairs)
        if not rep.ok:
            raise NotRotational(f"{O.name}: {rep.violations[0]}")
    return ThetaOperad(O)


# -- level-wise cyclic constructions -------------------------------------

class LevelwiseOperad(DgOperad):
    """Keys (p, r): p a key of the base, r the power of the formal variable.

    kind "theta": CCᶿ(O) = θ(O)[v], compositions (p vʳ)∘̃(q vˢ) = (p∘ρq)v^{r+s},
    differential -d + ρ·(v-lowering).
    kind "minus": CC⁻(O) = O[u], (a uʳ)∘(b uˢ) = (a∘b)u^{r+s}, differential d + uΔ.
    Powers beyond ``trunc`` are discarded.
    """

    def __init__(self, base, trunc, kind):
        if trunc < 1:
            raise ValueError("trunc must be >= 1")
        self.base, self.trunc, self.kind = base, trunc, kind
        self.name = f"CC{'θ' if kind == 'theta' else '-'}({base.name})"

    def arity(self, key):
        return self.base.arity(key[0])

    def degree(self, key):
        p, r = key
        if self.kind == "theta":
            return self.base.degree(p) - 1 - 2 * r
        return self.base.degree(p) + 2 * r

    def _lift(self, x, r):
        if r > self.trunc or r < 0:
            return {}
        return {(k, r): v for k, v in x.items()}

    def compose_keys(self, a, i, b):
        (p, r), (q, s) = a, b
        if r + s > self.trunc:
            return {}
        if self.kind == "theta":
            inner = self.base.rho_key(q)
        else:
            inner = fs.single(q)
        return self._lift(self.base.compose(fs.single(p), i, inner), r + s)

    def act_key(self, key, perm):
        return self._lift(self.base.act_key(key[0], perm), key[1])

    def d_key(self, key):
        p, r = key
        if self.kind == "theta":
            out = self._lift(fs.scaled(self.base.d_key(p), -1), r)
            fs.add_into(out, self._lift(self.base.rho_key(p), r - 1))
        else:
            out = self._lift(self.base.d_key(p), r)
            fs.add_into(out, self._lift(self.base.rho_key(p), r + 1))
        return out

    def rho_key(self, key):
        return self._lift(self.base.rho_key(key[0]), key[1])

    def basis(self, n):
        """Lifts of the base basis; formal-sum basis elements lift termwise."""
        out = []
        for r in range(self.trunc + 1):
            for p in self.base.basis(n):
                out.append(self._lift(p, r) if isinstance(p, dict) else (p, r))
        return out


def cc_theta_operad(O, trunc):
    return LevelwiseOperad(O, trunc, "theta")


def cc_minus_operad(O, trunc):
    return LevelwiseOperad(O, trunc, "minus")


def theta_to_kernel(O, x):
    """CCᶿ(O) → (ker Δ, d):  c₀ + c₁v + … ↦ Δ(c₀)."""
    c0 = {p: v for (p, r), v in x.items() if r == 0}
    return O.rho(c0)


def kernel_to_minus(x):
    """(ker Δ, d) → CC⁻(O): inclusion at u⁰."""
    return {(p, 0): v for p, v in x.items()}


def w_identities_check(generators, rotation, target, phi):
    """For each generator g of a mixed-complex operad, compare φ(R g) with
    {δ, φ(g)} in ``target``.

    ``generators`` is a list of formal sums in the source, ``rotation`` the
    source's R (formal sum -> formal sum), ``phi`` a linear map on formal sums.
    """
    rep = Report("W-identities")
    for g in generators:
        lhs = phi(rotation(g))
        img = phi(g)
        if target.delta() is None:
            rhs = {}
        else:
            rhs = external_delta(target, img) if img else {}
        rep.record(fs.difference(lhs, rhs) == {}, generator=g, phi_R=lhs, bracket=rhs)
    return rep.finish()
