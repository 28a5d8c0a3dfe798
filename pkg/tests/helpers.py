"""
Reference oracles shared by the tests. Everything here is brute force and
independent of the code under test.
"""

import math
import random
from fractions import Fraction

import numpy as np

from rootopt.poly import IntPolynomial, LinearPoly, PolyPair, pair_resultant


def random_poly(rng: random.Random, dmax=6, lo=-50, hi=50, dmin=1) -> IntPolynomial:
    d = rng.randint(dmin, dmax)
    cs = [rng.randint(lo, hi) for _ in range(d)]
    lead = 0
    while lead == 0:
        lead = rng.randint(lo, hi)
    return IntPolynomial(cs + [lead])


def random_pair(rng: random.Random, d=4, coef=50) -> PolyPair:
    m2 = rng.randint(1, 5)
    m1 = rng.randint(10, 400)
    while math.gcd(m1, m2) != 1:
        m1 += 1
    f = random_poly(rng, d, -coef, coef, dmin=d)
    g = LinearPoly(m1, m2)
    return PolyPair(f, g, abs(pair_resultant(f, g)) or 1)


def vp(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    k = 0
    while k < cap and x % p == 0:
        x //= p
        k += 1
    return k


def _vp_array(vals: np.ndarray, p: int, cap: int) -> np.ndarray:
    out = np.zeros(vals.shape, dtype=np.int64)
    cur = vals.copy()
    for _ in range(cap):
        hit = cur % p == 0
        out += hit
        cur = np.where(hit, cur // p, 1)
    return out


def enumerate_p1(f: IntPolynomial, p: int, e: int, affine_only=False) -> Fraction:
    """
    Weighted average of min(v_p(F(a, b)), e) over the points of P^1(Z/p^e).
    """
    q = p**e
    d = f.degree
    cs = [c % q for c in f.coeffs]
    # affine points (x : 1)
    x = np.arange(q, dtype=np.int64)
    acc = np.zeros(q, dtype=np.int64)
    for c in reversed(cs):
        acc = (acc * x + c) % q
    total = int(_vp_array(acc, p, e).sum())
    if not affine_only:
        # points (1 : p y); F(1, b) = sum c_i b^(d-i)
        b = p * np.arange(p ** (e - 1), dtype=np.int64) % q
        acc = np.zeros(b.shape, dtype=np.int64)
        # Horner in b from the top power b^d, whose coefficient is c_0
        for i in range(d + 1):
            acc = (acc * b + cs[i]) % q
        total += int(_vp_array(acc, p, e).sum())
    return Fraction(total, p ** (e - 1) * (p + 1))


def brute_roots(f: IntPolynomial, m: int) -> list[int]:
    return [x for x in range(m) if f(x) % m == 0]
