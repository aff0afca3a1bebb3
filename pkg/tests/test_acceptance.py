"""Acceptance criteria 1-14.  Each criterion is a seeded function returning
a JSON-able report with an "ok" flag; the tests print one line per criterion
and criterion 14 reruns everything and compares the serialized reports."""
import json
from fractions import Fraction
from math import factorial

import pytest

from conftest import ACCEPTANCE_LINES
from gravbench import formal as fs
from gravbench.exactla import kernel_basis, rank
from gravbench.ger import GER
from gravbench.graphs import (
    MU, Gra, TadpoleResidue, csc_compose, gra_basis, gra_compose, gra_delta, gra_delta_direct,
    graph, has_tadpole, sigma_power, vkgra_differential, vkgra_sigma,
)
from gravbench.mixed import cc_minus
from gravbench.operad import (
    cc_minus_operad, cc_theta_operad, check_associativity, check_rotational, theta_to_kernel, kernel_to_minus,
)
from gravbench.poly import (
    MU_D, MultiDiffOp, Polyvector, check_dpoly_sigma_closed, cyclic_sigma_D, divergence, gerst_bracket,
    gra_act, hkr, hochschild_d, schouten, vkgra_act, wedge,
)
from gravbench.samples import random_gra_monomial, random_vkgra_monomial, rng_for
from gravbench.trees import M, enumerate_M, m_circ_homology_dims, m_homology_dims, m_mixed_complex
from gravbench.twist import (
    ger_to_graphs_check, has_isolated_internal, tw_operad, vk_cyclic_project, vk_lift,
    vkgraphs_sigma_filter,
)

SEED = 20240601
GRAV = {2: 1, 3: 3, 4: 12}


def _emit(k, rep):
    status = "PASS" if rep["ok"] else "FAIL"
    detail = ", ".join(f"{a}={json.dumps(b, separators=(',', ':'))}" for a, b in rep.items() if a != "ok")
    line = f"criterion {k:2d}: {status}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


# -- 1-3: Ger, Grav, HC⁻ ------------------------------------------------------

def crit1(seed):
    rows = {}
    ok = True
    for n in (2, 3, 4):
        R = GER.rotation_matrix(n)
        by_rank = GER.dim(n) - rank(R)          # integer elimination
        by_kernel = len(kernel_basis(R))        # rational RREF, second route
        rows[str(n)] = [by_rank, by_kernel, factorial(n) // 2]
        ok &= by_rank == by_kernel == factorial(n) // 2 == GRAV[n]
    return {"ok": ok, "dims": rows}


def crit2(seed):
    rows = {}
    for n in (2, 3, 4):
        R = GER.rotation_matrix(n)
        rows[str(n)] = [rank(R), len(kernel_basis(R))]
    return {"ok": all(a == b for a, b in rows.values()), "rank_vs_ker": rows}


def crit3(seed):
    rows = {}
    ok = True
    for n in (2, 3, 4):
        A = GER.mixed_complex(n)
        t4, t5 = cc_minus(A, 4).total_homology(), cc_minus(A, 5).total_homology()
        rows[str(n)] = [t4, t5]
        ok &= t4 == t5 == GRAV[n]
    return {"ok": ok, "hc_minus": rows}


# -- 4-5: trees ---------------------------------------------------------------------

def crit4(seed):
    circ = {str(n): sum(m_circ_homology_dims(n).values()) for n in (2, 3, 4)}
    full = {str(n): sum(m_homology_dims(n).values()) for n in (2, 3, 4)}
    ok = all(circ[str(n)] == GRAV[n] for n in (2, 3, 4))
    ok &= all(full[str(n)] == factorial(n) for n in (2, 3, 4))
    return {"ok": ok, "H_Mcirc": circ, "H_M": full}


def crit5(seed):
    basis = {n: [fs.single(k) for k in enumerate_M(n)] for n in (1, 2, 3)}
    rep = check_rotational(M, basis)
    for n in (1, 2, 3, 4):
        m_mixed_complex(n)  # raises unless d² = 0, R² = 0, dR + Rd = 0
    return {"ok": rep.ok, "rotational_checked": rep.checked, "violations": len(rep.violations),
            "mixed_arities": "1..4"}


# -- 6-7: graphs ------------------------------------------------------------------------

def _generators(m, n):
    out = []
    targets = list(range(1, m + 1)) + [-j for j in range(1, n + 1)]
    for s in range(1, m + 1):
        for t in targets:
            out.append(graph(m, [(s, t)], n=n))
        v = [0] * m
        v[s - 1] = 1
        out.append(graph(m, n=n, v=v))
    return out


def crit6(seed):
    rng = rng_for(seed, "c6")
    gens = [(x, n) for m in (1, 2, 3) for n in range(0, 5) for x in _generators(m, n)]
    order_gen = sum(sigma_power(x, n + 1) == x for x, n in gens)
    samples = []
    while len(samples) < 150:
        m, n = rng.randint(1, 3), rng.randint(0, 4)
        x = random_vkgra_monomial(rng, m, n, 4, max_v=1)
        if x:
            samples.append((x, n))
    order = sum(sigma_power(x, n + 1) == x for x, n in samples)
    commute = sum(vkgra_sigma(vkgra_differential(x)) == vkgra_differential(vkgra_sigma(x)) for x, _ in samples)
    equiv = 0
    for x, _ in samples:
        m = next(iter(x)).m
        g = random_gra_monomial(rng, rng.randint(1, 2), 2) or MU
        i = rng.randint(1, m)
        equiv += vkgra_sigma(csc_compose(x, i, g)) == csc_compose(vkgra_sigma(x), i, g)
    ok = order_gen == len(gens) and order == commute == equiv == len(samples)
    return {"ok": ok, "generators": len(gens), "samples": len(samples), "order": order,
            "d_commutes": commute, "csc_equivariant": equiv}


def crit7(seed):
    checked = residue = bad = routes = 0
    for n in (1, 2, 3):
        for k in gra_basis(n, 3):
            x = fs.single(k)
            checked += 1
            try:
                d1 = gra_delta(x)
                d2 = gra_delta(d1)
            except TadpoleResidue:
                residue += 1
                continue
            bad += d2 != {} or any(has_tadpole(t) for t in d1)
            routes += d1 == gra_delta_direct(x)
    return {"ok": residue == bad == 0 and routes == checked, "graphs": checked,
            "tadpole_residue": residue, "delta_sq_nonzero": bad, "direct_route_agrees": routes}


# -- 8-11: polyvectors and operators -------------------------------------------------------

def _poly(rng, d, k=None, maxdeg=2, nterms=2, u=0):
    k = rng.randint(0, d) if k is None else k
    t = {}
    for _ in range(nterms):
        x = [0] * d
        for _ in range(rng.randint(0, maxdeg)):
            x[rng.randrange(d)] += 1
        fs.add_term(t, (tuple(x), tuple(sorted(rng.sample(range(d), k)))), Fraction(rng.randint(-3, 3)))
    return Polyvector(d, t, u)


def crit8(seed):
    rng = rng_for(seed, "c8")
    G = [k for m in (1, 2, 3) for k in gra_basis(m, 2)]
    checked = bad = tuples = 0
    for a in G:
        for b in G:
            for i in range(1, a.m + 1):
                for _ in range(3):
                    Xs = [_poly(rng, 2) for _ in range(a.m + b.m - 1)]
                    tuples += 1
                    lhs = gra_act(gra_compose({a: 1}, i, {b: 1}), *Xs)
                    inner = gra_act({b: 1}, *Xs[i - 1:i - 1 + b.m])
                    sign = (-1) ** (len(b.edges) * sum(X.degree() for X in Xs[:i - 1]))
                    rhs = gra_act({a: 1}, *(Xs[:i - 1] + [inner] + Xs[i - 1 + b.m:])).scaled(sign)
                    checked += 1
                    bad += lhs != rhs
    return {"ok": bad == 0 and tuples >= 50, "graphs": len(G), "checked": checked, "violations": bad}


def crit9(seed):
    rng = rng_for(seed, "c9")
    equiv = tad = 0
    for _ in range(100):
        m, n = rng.randint(1, 2), rng.randint(1, 3)
        G = random_vkgra_monomial(rng, m, n, 4, max_v=1)
        args = [_poly(rng, 2, u=rng.randint(0, 1)) for _ in range(m)]
        equiv += vkgra_act(vkgra_sigma(G), args) == cyclic_sigma_D(vkgra_act(G, args))
    tp, plain = graph(1, [(1, -1), (1, 1)], n=1), graph(1, [(1, -1)], n=1)
    for _ in range(50):
        X = _poly(rng, 2, rng.randint(1, 2))
        tad += vkgra_act(tp, [X]) == vkgra_act(plain, [divergence(X)])
    return {"ok": equiv == 100 and tad == 50, "equivariant": equiv, "tadpole_is_div": tad}


def crit10(seed):
    rng = rng_for(seed, "c10")
    counts = dict(div_sq=0, seven=0, div_der=0, jacobi=0)
    for _ in range(60):
        X, Y, Z = (_poly(rng, 3, maxdeg=1) for _ in range(3))
        a, b = X.degree(), Y.degree()
        counts["div_sq"] += divergence(divergence(X)).is_zero()
        XY, XZ, YZ = wedge(X, Y), wedge(X, Z), wedge(Y, Z)
        seven = (divergence(wedge(XY, Z)) - wedge(divergence(XY), Z)
                 - wedge(X, divergence(YZ)).scaled((-1) ** a)
                 - wedge(Y, divergence(XZ)).scaled((-1) ** ((a + 1) * b))
                 + wedge(wedge(divergence(X), Y), Z) + wedge(wedge(X, divergence(Y)), Z).scaled((-1) ** a)
                 + wedge(XY, divergence(Z)).scaled((-1) ** (a + b)))
        counts["seven"] += seven.is_zero()
        counts["div_der"] += divergence(schouten(X, Y)) == (
            schouten(divergence(X), Y).scaled(-1) + schouten(X, divergence(Y)).scaled((-1) ** (a + 1)))
        counts["jacobi"] += schouten(X, schouten(Y, Z)) == (
            schouten(schouten(X, Y), Z).scaled((-1) ** (a + 1))
            + schouten(Y, schouten(X, Z)).scaled((-1) ** (a + b + a * b + 1)))
    return dict(ok=all(v == 60 for v in counts.values()), triples=60, **counts)


def _op(rng, d, n):
    t = {}
    for _ in range(2):
        x = [0] * d
        for _ in range(rng.randint(0, 1)):
            x[rng.randrange(d)] += 1
        idx = []
        for _ in range(n):
            e = [0] * d
            for _ in range(rng.randint(1, 2)):
                e[rng.randrange(d)] += 1
            idx.append(tuple(e))
        t[(tuple(x), tuple(idx))] = rng.randint(-2, 2)
    return MultiDiffOp(d, n, t)


def crit11(seed):
    rng = rng_for(seed, "c11")
    mu_ok = all(gerst_bracket(MU_D(d), MU_D(d)).is_zero() for d in (1, 2, 3))
    dsq = sum(hochschild_d(hochschild_d(_op(rng, rng.randint(1, 2), rng.randint(1, 3)))).is_zero()
              for _ in range(60))
    pairs = [(_op(rng, d, rng.randint(1, 2)), _op(rng, d, rng.randint(1, 2)))
             for d in (rng.randint(1, 2) for _ in range(20))]
    rep = check_dpoly_sigma_closed(pairs)
    hk = sum(hochschild_d(hkr(_poly(rng, 2, rng.randint(1, 2)))).is_zero() for _ in range(60))
    return {"ok": mu_ok and dsq == 60 and rep.ok and hk == 60, "mu_mu_zero": mu_ok, "d_sq_zero": dsq,
            "invariant_laws_checked": rep.checked, "invariant_violations": len(rep.violations),
            "hkr_cocycles": hk}


# -- 12-13: functors and twisting ----------------------------------------------------------------

def _lift(x, r):
    return {(k, r): c for k, c in x.items()}


def crit12(seed):
    rng = rng_for(seed, "c12")
    B = [b for n in (1, 2, 3) for b in GER.basis(n)]
    small = [b for n in (1, 2) for b in GER.basis(n)]
    out = {}
    ok = True
    for name, O in (("theta", cc_theta_operad(GER, 2)), ("minus", cc_minus_operad(GER, 2))):
        triples = [(_lift(rng.choice(B), rng.randint(0, 1)), _lift(rng.choice(small), rng.randint(0, 1)),
                    _lift(rng.choice(small), rng.randint(0, 1))) for _ in range(220)]
        rep = check_associativity(O, triples)
        out[name] = rep.checked
        ok &= rep.ok
    Ct, Cm = cc_theta_operad(GER, 2), cc_minus_operad(GER, 2)
    maps = 0
    for _ in range(40):
        x = fs.combine((1, _lift(rng.choice(B[1:3]), 0)), (1, _lift(rng.choice(B[1:3]), 1)))
        y = _lift(rng.choice(B[:3]), rng.randint(0, 1))
        good = theta_to_kernel(GER, Ct.d(x)) == {}
        for i in range(1, Ct.arity_of(x) + 1):
            good &= fs.difference(theta_to_kernel(GER, Ct.compose(x, i, y)),
                                  GER.compose(theta_to_kernel(GER, x), i, theta_to_kernel(GER, y))) == {}
        maps += good
    for a in GER.grav_basis(3):
        for b in GER.grav_basis(2):
            maps += Cm.d(kernel_to_minus(a)) == {} and kernel_to_minus(GER.compose(a, 1, b)) == Cm.compose(
                kernel_to_minus(a), 1, kernel_to_minus(b))
    want = 40 + len(GER.grav_basis(3)) * len(GER.grav_basis(2))
    return {"ok": ok and maps == want, "triples": out, "kernel_maps_ok": maps}


def crit13(seed):
    rng = rng_for(seed, "c13")
    T = tw_operad(Gra, 2)
    d2 = {}
    ok = True
    for n in (1, 2, 3):
        rep = T.check_d_squared([{k: Fraction(1)} for k in T.basis(n)])
        d2[str(n)] = rep.checked
        ok &= rep.ok and rep.checked > 0
    gg = ger_to_graphs_check(3)
    ok &= gg.ok
    F, P = vkgraphs_sigma_filter, vk_cyclic_project
    idem = compat = tested = 0
    for _ in range(150):
        m, n = rng.randint(1, 3), rng.randint(0, 2)
        x = {}
        for _ in range(rng.randint(1, 3)):
            fs.add_into(x, vk_lift(random_vkgra_monomial(rng, m, n, 4, max_v=1), rng.randint(0, m)),
                        rng.randint(-2, 2))
        idem += F(F(x)) == F(x)
        x = {k: c for k, c in x.items() if not has_isolated_internal(k)}
        if x:
            tested += 1
            compat += F(P(x)) == F(P(F(x)))
    ok &= idem == 150 and compat == tested > 0
    return {"ok": ok, "d_sq_checked": d2, "ger_images_cycles": gg.ok, "ranks": gg.ranks,
            "filter_idempotent": idem, "sigma_compatible": compat, "sigma_tested": tested}


CRITERIA = {1: crit1, 2: crit2, 3: crit3, 4: crit4, 5: crit5, 6: crit6, 7: crit7, 8: crit8,
            9: crit9, 10: crit10, 11: crit11, 12: crit12, 13: crit13}
REPORTS = {}


def _serialize(rep):
    return json.dumps(rep, sort_keys=True, default=str)


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    rep = CRITERIA[k](SEED)
    REPORTS[k] = _serialize(rep)
    _emit(k, rep)
    assert rep["ok"], rep


def test_criterion_14_determinism():
    same = 0
    for k, fn in sorted(CRITERIA.items()):
        first = REPORTS.get(k) or _serialize(fn(SEED))
        same += _serialize(fn(SEED)) == first
    rep = {"ok": same == len(CRITERIA), "identical_reruns": same}
    _emit(14, rep)
    assert rep["ok"]
