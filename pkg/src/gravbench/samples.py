"""Seeded random samplers shared by the verification sweeps and the tests."""
import random
from fractions import Fraction

from .graphs import graph

__all__ = ["rng_for", "random_vkgra_monomial", "random_gra_monomial", "random_coeff"]


def rng_for(seed, *salt):
    """Independent deterministic stream per (seed, salt)."""
    return random.Random(f"{seed}:" + ":".join(map(str, salt)))


def random_coeff(rng, lo=-3, hi=3, den=1):
    while True:
        c = Fraction(rng.randint(lo, hi), rng.randint(1, den))
        if c:
            return c


def random_vkgra_monomial(rng, m, n, max_edges, max_v=0, tadpoles=True):
    """One vKGra(m, n) graph (as a single-term formal sum, possibly {})."""
    targets = list(range(1, m + 1)) + [-j for j in range(1, n + 1)]
    pairs = [(s, t) for s in range(1, m + 1) for t in targets if tadpoles or s != t]
    e = rng.randint(0, min(max_edges, len(pairs)))
    edges = rng.sample(pairs, e)
    v = [rng.randint(0, max_v) for _ in range(m)]
    return graph(m, edges, n=n, v=v)


def random_gra_monomial(rng, m, max_edges):
    pairs = [(s, t) for s in range(1, m + 1) for t in range(1, m + 1) if s != t]
    e = rng.randint(0, min(max_edges, len(pairs)))
    return graph(m, rng.sample(pairs, e))
