"""Finite Q-linear combinations of hashable basis objects.

A formal sum is a plain ``dict`` mapping a canonical key to a nonzero
Fraction.  Keeping it a dict keeps the hot loops cheap.
"""
from fractions import Fraction

__all__ = ["add_term", "add_into", "scaled", "combine", "extend", "is_zero",
           "difference", "clean", "single"]


def add_term(acc, key, c):
    if not c:
        return acc
    s = acc.get(key, 0) + c
    if s:
        acc[key] = s
    else:
        del acc[key]
    return acc


def add_into(acc, other, scale=1):
    if not scale:
        return acc
    for k, v in other.items():
        add_term(acc, k, v * scale)
    return acc


def scaled(x, c):
    if not c:
        return {}
    return {k: v * c for k, v in x.items()}


def combine(*pairs):
    """combine((c1, x1), (c2, x2), ...) -> c1 x1 + c2 x2 + ..."""
    acc = {}
    for c, x in pairs:
        add_into(acc, x, c)
    return acc


def extend(fn, x, *args):
    """Linear extension of ``fn(key, *args) -> formal sum``."""
    acc = {}
    for k, v in x.items():
        add_into(acc, fn(k, *args), v)
    return acc


def clean(x):
    return {k: Fraction(v) for k, v in x.items() if v}


def is_zero(x):
    return not any(x.values())


def difference(a, b):
    acc = dict(a)
    add_into(acc, b, -1)
    return acc


def single(key, c=1):
    return {key: Fraction(c)} if c else {}
