"""Hypothesis versions of the structural invariants, one per law."""
from fractions import Fraction

from hypothesis import HealthCheck, given, settings, strategies as st

from gravbench import formal as fs
from gravbench.graphs import (
    Gra, csc_compose, gra_delta, gra_delta_direct, graph, is_invariant, invariants_project,
    sigma_power, vkgra_differential, vkgra_sigma,
)
from gravbench.operad import check_associativity
from gravbench.poly import (
    MultiDiffOp, Polyvector, cyclic_invariants_D, cyclic_sigma_D, divergence, gerst_bracket,
    hkr, hochschild_d, is_cyclic_invariant_D, schouten, wedge,
)
from gravbench.trees import enumerate_M, m_differential, rotation_R
from gravbench.twist import vk_lift, vkgraphs_sigma_filter

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
coeffs = st.integers(-3, 3).filter(bool)


@st.composite
def vkgra_monomials(draw, max_m=3, max_n=4, max_edges=4, tadpoles=True):
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(0, max_n))
    targets = list(range(1, m + 1)) + [-j for j in range(1, n + 1)]
    pairs = [(s, t) for s in range(1, m + 1) for t in targets if tadpoles or s != t]
    edges = draw(st.lists(st.sampled_from(pairs), max_size=max_edges, unique=True))
    v = draw(st.lists(st.integers(0, 1), min_size=m, max_size=m))
    return graph(m, edges, n=n, v=v), n


@st.composite
def gra_elements(draw, m=None):
    """Nonzero and homogeneous: every term has the same number of edges."""
    m = m or draw(st.integers(1, 3))
    pairs = [(s, t) for s in range(1, m + 1) for t in range(1, m + 1) if s != t]
    e = draw(st.integers(0, min(2, len(pairs))))
    x = {}
    for _ in range(draw(st.integers(1, 2))):
        edges = draw(st.lists(st.sampled_from(pairs), min_size=e, max_size=e, unique=True)) if e else []
        fs.add_into(x, graph(m, edges), draw(coeffs))
    return x or graph(m, [])


@st.composite
def polyvectors(draw, d=3, k=None, maxdeg=2):
    k = draw(st.integers(0, d)) if k is None else k
    terms = {}
    for _ in range(draw(st.integers(1, 3))):
        x = tuple(draw(st.lists(st.integers(0, maxdeg), min_size=d, max_size=d)))
        xi = tuple(sorted(draw(st.permutations(range(d)))[:k]))
        fs.add_term(terms, (x, xi), Fraction(draw(coeffs)))
    return Polyvector(d, terms)


@st.composite
def operators(draw, d=2, n=None):
    n = draw(st.integers(1, 3)) if n is None else n
    idx = st.lists(st.integers(0, 2), min_size=d, max_size=d).filter(any).map(tuple)
    terms = {}
    for _ in range(draw(st.integers(1, 2))):
        x = tuple(draw(st.lists(st.integers(0, 1), min_size=d, max_size=d)))
        I = tuple(draw(idx) for _ in range(n))
        terms[(x, I)] = draw(coeffs)
    return MultiDiffOp(d, n, terms)


# -- graphs --------------------------------------------------------------------

@SETTINGS
@given(vkgra_monomials())
def test_sigma_has_order_n_plus_one(gn):
    x, n = gn
    assert sigma_power(x, n + 1) == x


@SETTINGS
@given(vkgra_monomials())
def test_sigma_commutes_with_d(gn):
    x, _ = gn
    assert vkgra_sigma(vkgra_differential(x)) == vkgra_differential(vkgra_sigma(x))
    assert vkgra_differential(vkgra_differential(x)) == {}


@SETTINGS
@given(vkgra_monomials(), gra_elements(), st.data())
def test_csc_equivariance(gn, g, data):
    x, _ = gn
    if not x:
        return
    i = data.draw(st.integers(1, next(iter(x)).m))
    assert vkgra_sigma(csc_compose(x, i, g)) == csc_compose(vkgra_sigma(x), i, g)


@SETTINGS
@given(vkgra_monomials(max_edges=3))
def test_projector_is_idempotent_onto_invariants(gn):
    p = invariants_project(gn[0])
    assert is_invariant(p) and invariants_project(p) == p


@SETTINGS
@given(gra_elements())
def test_delta_two_routes_and_square(x):
    d = gra_delta(x)
    assert d == gra_delta_direct(x)
    assert gra_delta(d) == {}


@SETTINGS
@given(gra_elements(m=2), gra_elements(), gra_elements())
def test_gra_associativity(a, b, c):
    assert check_associativity(Gra, [(a, b, c)]).ok


# -- trees ---------------------------------------------------------------------

@SETTINGS
@given(st.integers(1, 3).flatmap(lambda n: st.sampled_from(enumerate_M(n))))
def test_tree_mixed_identities(t):
    x = fs.single(t)
    assert m_differential(m_differential(x)) == {}
    assert rotation_R(rotation_R(x)) == {}
    assert fs.combine((1, m_differential(rotation_R(x))), (1, rotation_R(m_differential(x)))) == {}


# -- polyvectors and operators ---------------------------------------------------------

@SETTINGS
@given(polyvectors(), polyvectors())
def test_bv_relation(X, Y):
    for Xa in X.parts().values():
        for Yb in Y.parts().values():
            a = Xa.degree()
            lhs = divergence(wedge(Xa, Yb)) - wedge(divergence(Xa), Yb) - wedge(Xa, divergence(Yb)).scaled((-1) ** a)
            assert lhs == schouten(Xa, Yb)
            assert schouten(Xa, Yb) == schouten(Yb, Xa).scaled((-1) ** (a * Yb.degree()))


@SETTINGS
@given(polyvectors(d=2), polyvectors(d=2), polyvectors(d=2))
def test_schouten_jacobi(X, Y, Z):
    for Xa in X.parts().values():
        for Yb in Y.parts().values():
            a, b = Xa.degree(), Yb.degree()
            lhs = schouten(Xa, schouten(Yb, Z))
            rhs = (schouten(schouten(Xa, Yb), Z).scaled((-1) ** (a + 1))
                   + schouten(Yb, schouten(Xa, Z)).scaled((-1) ** (a + b + a * b + 1)))
            assert lhs == rhs


@SETTINGS
@given(polyvectors(d=2, maxdeg=3))
def test_hkr_cocycle(X):
    for part in X.parts().values():
        assert hochschild_d(hkr(part)).is_zero()


@SETTINGS
@given(operators())
def test_hochschild_square_and_sigma_order(D):
    assert hochschild_d(hochschild_d(D)).is_zero()
    cur = D
    for _ in range(D.n + 1):
        cur = cyclic_sigma_D(cur)
    assert cur == D


@SETTINGS
@given(operators(n=1), operators(n=2))
def test_bracket_preserves_invariants(D, E):
    a, b = cyclic_invariants_D(D), cyclic_invariants_D(E)
    assert is_cyclic_invariant_D(gerst_bracket(a, b))
    assert is_cyclic_invariant_D(hochschild_d(a))


# -- twisted filter ---------------------------------------------------------------------

def _type_one(x):
    return next(iter(x)).m if x else 0


@SETTINGS
@given(vkgra_monomials(max_n=2), vkgra_monomials(max_n=2), st.data())
def test_vk_filter_linear_idempotent(g1, g2, data):
    x = vk_lift(g1[0], data.draw(st.integers(0, _type_one(g1[0]))))
    y = vk_lift(g2[0], data.draw(st.integers(0, _type_one(g2[0]))))
    F = vkgraphs_sigma_filter
    assert F(F(x)) == F(x)
    assert F(fs.combine((2, x), (-1, y))) == fs.combine((2, F(x)), (-1, F(y)))
