"""Independent reference implementations used only by the tests.

Plain ``fractions.Fraction`` arithmetic, written from the definitions
without sharing code with the package: allocation by sorting, allocation
integrals by evaluating the step function piece by piece, and payments by
the zero-out-one-agent recursion.
"""
from fractions import Fraction
from functools import lru_cache
from math import factorial


def q(x):
    """Exact Fraction from an int, str, Fraction or any numerator/denominator pair."""
    if isinstance(x, (int, str, Fraction)):
        return Fraction(x)
    return Fraction(int(x.numerator), int(x.denominator))


def comb_factorial(n, k):
    if k > n:
        return 0
    return factorial(n) // (factorial(k) * factorial(n - k))


def comb_pascal(n, k):
    row = [1]
    for _ in range(n):
        row = [1] + [a + b for a, b in zip(row, row[1:])] + [1]
    return row[k] if k <= n else 0


def allocate(pi, values):
    """Ties share the probabilities of the ranks they occupy."""
    pi = [q(p) for p in pi]
    values = [q(x) for x in values]
    out = [None] * len(values)
    distinct = sorted(set(values), reverse=True)
    start = 0
    for x in distinct:
        members = [i for i, y in enumerate(values) if y == x]
        share = sum(pi[start:start + len(members)], Fraction(0)) / len(members)
        for i in members:
            out[i] = share
        start += len(members)
    return out


def integral(pi, values, i):
    values = [q(x) for x in values]
    own = values[i]
    cuts = sorted({Fraction(0), own} | {x for j, x in enumerate(values) if j != i and x < own})
    total = Fraction(0)
    for lo, hi in zip(cuts, cuts[1:]):
        w = list(values)
        w[i] = (lo + hi) / 2
        total += (hi - lo) * allocate(pi, w)[i]
    return total


def quadrature(pi, values, i, steps=2000):
    """Float midpoint rule; a coarse cross-check of ``integral``."""
    own = float(values[i])
    h = own / steps
    total = 0.0
    for s in range(steps):
        w = [q(x) for x in values]
        w[i] = Fraction((s + 0.5) * h)
        total += float(allocate(pi, w)[i]) * h
    return total


def elementary(pi, values):
    f = allocate(pi, values)
    return [q(x) * f[i] - integral(pi, values, i) for i, x in enumerate(values)]


def recursive_payments(pi, values):
    pi = tuple(q(p) for p in pi)

    @lru_cache(maxsize=None)
    def pay(vals):
        n = len(vals)
        if all(x == 0 for x in vals):
            return (Fraction(0),) * n
        r = elementary(pi, vals)
        out = [None] * n
        zeros = [i for i, x in enumerate(vals) if x == 0]
        for i, x in enumerate(vals):
            if x != 0:
                lowered = list(vals)
                lowered[i] = Fraction(0)
                out[i] = pay(tuple(lowered))[i] + r[i]
        if zeros:
            share = -sum(out[i] for i in range(n) if vals[i] != 0) / len(zeros)
            for i in zeros:
                out[i] = share
        return tuple(out)

    return list(pay(tuple(q(x) for x in values)))
