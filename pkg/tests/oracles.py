"""Exact rational reference recursions, written independently of the package.

Each function transcribes its recursion term by term with ``Fraction``
arithmetic, ``math.comb`` and plain powers; nothing is merged or vectorised.
"""

from fractions import Fraction
from functools import lru_cache
from math import comb


def sparse(n, lam):
    return sum(Fraction(1) / (lam * i * (n - i)) for i in range(1, n))


def exact(n, lam, p):
    lam, p = Fraction(lam), Fraction(p)
    q = 1 - p

    @lru_cache(maxsize=None)
    def f(i, a):
        if i == n:
            return Fraction(0)
        m = n - i
        hit = 1 - q**a
        total = q ** (a * m) * (Fraction(1) / (lam * i * m) + f(i + 1, 1))
        for c in range(1, m):
            total += comb(m, c) * hit**c * q ** (a * (m - c)) * f(i + c, c)
        return total

    return f(1, 1)


def lower(n, lam, p):
    lam, p = Fraction(lam), Fraction(p)
    q = 1 - p

    @lru_cache(maxsize=None)
    def f(i):
        if i == n:
            return Fraction(0)
        m = n - i
        hit = 1 - q**i
        total = q ** (i * m) * (Fraction(1) / (lam * i * m) + f(i + 1))
        for c in range(1, m):
            total += comb(m, c) * hit**c * q ** (i * (m - c)) * f(i + c)
        return total

    return f(1)


def upper(n, lam, p):
    lam, p = Fraction(lam), Fraction(p)
    q = 1 - p

    @lru_cache(maxsize=None)
    def g(a, m):
        if m == 0:
            return Fraction(0)
        hit = 1 - q**a
        total = q ** (a * m) * (Fraction(1) / (lam * a * m) + g(1, m - 1))
        for c in range(1, m):
            total += comb(m, c) * hit**c * q ** (a * (m - c)) * g(c, m - c)
        return total

    return g(1, n - 1)
