"""
Roots modulo prime powers and expected p-valuations of homogeneous
polynomial values over random coprime pairs (a, b).

All valuations are exact rationals; alpha() converts to floating point
only when summing the weighted terms.
"""

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .poly import IntPolynomial, LinearPoly, derivative

# primes up to this bound are root-searched by plain evaluation
BRUTE_FORCE_LIMIT = 4096
MAX_PRIME = 2**31


class ZeroModP(ValueError):
    """
    f vanishes identically modulo p: every residue is a root.
    """


@dataclass(frozen=True)
class ModularRootSet:
    p: int
    affine: tuple[tuple[int, bool], ...]  # (root, is_simple)
    projective: bool

    @property
    def roots(self) -> list[int]:
        return [r for r, _ in self.affine]

    @property
    def n_p(self) -> int:
        return len(self.affine) + int(self.projective)


@dataclass(frozen=True)
class Valuation:
    p: int
    value: Fraction
    truncated: bool = False


@dataclass(frozen=True)
class LiftReport:
    """
    Roots of f modulo p^k lying above r, for k = 1..e (levels[k-1]).
    """

    p: int
    root: int
    simple: bool
    levels: tuple[tuple[int, ...], ...]

    @property
    def counts(self) -> list[int]:
        return [len(lv) for lv in self.levels]


@lru_cache(maxsize=64)
def primes_up_to(bound: int) -> tuple[int, ...]:
    if bound < 2:
        return ()
    sieve = bytearray([1]) * (bound + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, math.isqrt(bound) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, bound + 1, i)))
    return tuple(i for i, b in enumerate(sieve) if b)


def default_cap(p: int, bound: int = 1000) -> int:
    """
    Largest e with p^e <= bound * p (at least 1).
    """
    e, q = 1, p
    while q * p <= bound * p:
        q *= p
        e += 1
    return e


# --- polynomial arithmetic over F_p (coefficient lists, low degree first)


def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, b, p):
    a = a[:]
    inv = pow(b[-1], -1, p)
    db = len(b) - 1
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] * inv % p
        if c:
            for j in range(db + 1):
                a[i - db + j] = (a[i - db + j] - c * b[j]) % p
    return _trim(a[:db])


def _pmulmod(a, b, m, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _pmod(_trim(out), m, p)


def _ppowmod(base, k, m, p):
    result = [1]
    base = _pmod(base, m, p)
    while k:
        if k & 1:
            result = _pmulmod(result, base, m, p)
        base = _pmulmod(base, base, m, p)
        k >>= 1
    return result


def _pgcd(a, b, p):
    a, b = _trim(a[:]), _trim(b[:])
    while b:
        a, b = b, _pmod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [c * inv % p for c in a]
    return a


def _split_roots(h, p, rng):
    # h: monic, squarefree, product of distinct linear factors
    if len(h) == 1:
        return []
    if len(h) == 2:
        return [(-h[0]) % p]
    while True:
        a = rng.randrange(p)
        t = _ppowmod([a, 1], (p - 1) // 2, h, p) or [0]
        t[0] = (t[0] - 1) % p
        d = _pgcd(h, _trim(t), p)
        if 1 < len(d) < len(h):
            q = _pdiv_exact(h, d, p)
            return _split_roots(d, p, rng) + _split_roots(q, p, rng)


def _pdiv_exact(a, b, p):
    a = a[:]
    db = len(b) - 1
    inv = pow(b[-1], -1, p)
    q = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] * inv % p
        q[i - db] = c
        if c:
            for j in range(db + 1):
                a[i - db + j] = (a[i - db + j] - c * b[j]) % p
    return q


def _affine_roots(cs: list[int], p: int) -> list[int]:
    """
    Roots in [0, p) of a nonzero polynomial over F_p.
    """
    if p <= BRUTE_FORCE_LIMIT:
        out = []
        for x in range(p):
            acc = 0
            for c in reversed(cs):
                acc = (acc * x + c) % p
            if acc == 0:
                out.append(x)
        return out
    f = _trim(cs[:])
    inv = pow(f[-1], -1, p)
    f = [c * inv % p for c in f]
    xp = _ppowmod([0, 1], p, f, p)
    xp = xp + [0] * max(0, 2 - len(xp))
    xp[1] = (xp[1] - 1) % p
    h = _pgcd(f, _trim(xp), p)
    rng = random.Random(p)
    return sorted(_split_roots(h, p, rng))


def roots_mod_p(f: IntPolynomial, p: int) -> ModularRootSet:
    if p > MAX_PRIME:
        raise ValueError("prime too large")
    cs = [c % p for c in f.coeffs]
    if not any(cs):
        raise ZeroModP(f"{f} vanishes modulo {p}")
    df = derivative(f)
    roots = tuple((r, df(r) % p != 0) for r in _affine_roots(cs, p))
    return ModularRootSet(p, roots, f.leading() % p == 0)


def lift_root(f: IntPolynomial, p: int, r: int, e: int) -> LiftReport:
    """
    Hensel-lift a root r of f mod p up to modulus p^e.

    A simple root has one lift per level. A multiple root r_k mod p^k
    either lifts to all of r_k + i p^k (when p^(k+1) | f(r_k)) or dies.
    """
    r %= p
    if f(r) % p:
        raise ValueError(f"{r} is not a root of {f} mod {p}")
    df = derivative(f)
    simple = df(r) % p != 0
    levels = [(r,)]
    if simple:
        inv = pow(df(r), -1, p)
        q = p
        x = r
        for _ in range(1, e):
            q *= p
            # Newton step; the inverse of f'(x) mod p suffices for one digit
            x = (x - f(x) * inv) % q
            levels.append((x,))
        return LiftReport(p, r, True, tuple(levels))
    q = p
    cur = [r]
    for _ in range(1, e):
        nxt = []
        for x in cur:
            if f(x) % (q * p) == 0:
                nxt.extend(x + i * q for i in range(p))
        q *= p
        cur = nxt
        levels.append(tuple(cur))
    return LiftReport(p, r, False, tuple(levels))


def level_weight(p: int, k: int) -> Fraction:
    """
    Probability that a random coprime pair maps to a given point of P^1(Z/p^k).
    """
    return Fraction(1, p ** (k - 1) * (p + 1))


def simple_tail(p: int, k: int = 1) -> Fraction:
    """
    sum_{j >= k} level_weight(p, j): the contribution of a simple root from level k on.
    """
    return Fraction(p * p, p**k * (p * p - 1))


def _root_contrib(f, p, r, cap, tail):
    # returns (contribution, still-lifting-at-cap)
    df = derivative(f)
    if df(r) % p:
        if tail:
            return simple_tail(p), False
        return sum((level_weight(p, k) for k in range(1, cap + 1)), Fraction(0)), False
    if cap == 0:
        return Fraction(0), True
    rep = lift_root(f, p, r, cap)
    val = sum(
        (c * level_weight(p, k) for k, c in enumerate(rep.counts, 1)), Fraction(0)
    )
    q = p**cap
    alive = any(f(x) % (q * p) == 0 for x in rep.levels[-1])
    return val, alive


def _reversed(f: IntPolynomial, d: int) -> IntPolynomial:
    return IntPolynomial([f[d - i] for i in range(d + 1)])


def _valuation(f, p, cap, tail, affine_only, exclude=()):
    cs = [c % p for c in f.coeffs]
    if not any(cs):
        # f = p^c h: the first c levels hold every point
        c = 0
        h = f
        while h.content() % p == 0:
            h = IntPolynomial([x // p for x in h.coeffs])
            c += 1
        full = Fraction(p, p + 1) if affine_only else Fraction(1)
        val, trunc = _valuation(h, p, max(cap - c, 0), tail, affine_only, exclude)
        return min(c, cap) * full + val, trunc
    total = Fraction(0)
    truncated = False
    for x in _affine_roots(cs, p):
        if x in exclude:
            continue
        v, t = _root_contrib(f, p, x, cap, tail)
        total += v
        truncated |= t
    if not affine_only and f.leading() % p == 0:
        v, t = _root_contrib(_reversed(f, f.degree), p, 0, cap, tail)
        total += v
        truncated |= t
    return total, truncated


def expected_valuation(
    f: IntPolynomial,
    p: int,
    cap_e: int | None = None,
    tail: bool = True,
    affine_only: bool = False,
) -> Valuation:
    """
    Expected p-valuation of F(a, b) over uniformly random coprime (a, b).

    Simple roots contribute their exact infinite tail p/(p^2-1) when tail
    is set; otherwise every root is counted only up to level cap_e.
    Multiple roots are lifted to level cap_e and the result is flagged
    truncated if some of them still lift past it.
    """
    if f.is_zero():
        raise ZeroModP("zero polynomial has unbounded valuation")
    if cap_e is None:
        cap_e = default_cap(p)
    if cap_e < 1:
        raise ValueError("cap_e must be >= 1")
    val, trunc = _valuation(f, p, cap_e, tail, affine_only)
    return Valuation(p, val, trunc)


def special_u(f: IntPolynomial, g: LinearPoly, r: int, p: int) -> int:
    """
    The unique u mod p for which r is a multiple root of some f + (ux+v)g mod p.
    """
    gr = g(r) % p
    if gr == 0:
        raise ValueError(f"g({r}) vanishes mod {p}")
    num = f(r) * g.m2 - derivative(f)(r) * gr
    return num * pow(gr * gr, -1, p) % p


def alpha_terms(f: IntPolynomial, B: int) -> list[tuple[int, Fraction]]:
    """
    Per-prime exact terms 1/(p-1) - nu_p(F) for p <= B.
    """
    out = []
    for p in primes_up_to(B):
        e = 1
        while p ** (e + 1) <= B * p:
            e += 1
        nu = expected_valuation(f, p, e).value
        out.append((p, Fraction(1, p - 1) - nu))
    return out


def alpha(f: IntPolynomial, B: int) -> float:
    if B < 2:
        raise ValueError("B must be >= 2")
    return math.fsum(float(t) * math.log(p) for p, t in alpha_terms(f, B))
