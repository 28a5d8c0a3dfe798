"""
Integer polynomials, polynomial pairs, translation/rotation and skewed norms
"""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class IntPolynomial:
    """
    Univariate polynomial with exact integer coefficients c0..cd.
    """

    coeffs: tuple[int, ...]

    def __init__(self, coeffs):
        cs = [int(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        # the zero polynomial gets degree -1
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __getitem__(self, i: int) -> int:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return IntPolynomial([self[i] + other[i] for i in range(n)])

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return IntPolynomial([self[i] - other[i] for i in range(n)])

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        if self.is_zero() or other.is_zero():
            return IntPolynomial([])
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntPolynomial(out)

    def scale(self, k: int) -> "IntPolynomial":
        return IntPolynomial([k * c for c in self.coeffs])

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = math.gcd(g, c)
        return g

    def __str__(self):
        return poly_str(self.coeffs)


@dataclass(frozen=True)
class LinearPoly:
    """
    The rational-side polynomial g(x) = m2*x - m1.
    """

    m1: int
    m2: int

    def __post_init__(self):
        if self.m2 <= 0:
            raise ValueError("m2 must be positive")
        if math.gcd(self.m1, self.m2) != 1:
            raise ValueError("gcd(m1, m2) must be 1")

    def __call__(self, x):
        return self.m2 * x - self.m1

    def as_poly(self) -> IntPolynomial:
        return IntPolynomial([-self.m1, self.m2])


@dataclass(frozen=True)
class PolyPair:
    """
    Algebraic polynomial f and linear g sharing a root m = m1/m2 modulo n.
    """

    f: IntPolynomial
    g: LinearPoly
    n: int

    def __post_init__(self):
        if self.f.degree < 1:
            raise ValueError("f must have degree >= 1")
        if self.n != 0 and pair_resultant(self.f, self.g) % self.n != 0:
            raise ValueError("pair shares no common root mod n")


@dataclass(frozen=True)
class Rotation:
    u: int
    v: int
    w: int = 0


def pair_resultant(f: IntPolynomial, g: LinearPoly) -> int:
    """
    Res(f, g) up to sign: F(m1, m2) for g = m2*x - m1.
    """
    return eval_homogeneous(f, g.m1, g.m2)


def eval_homogeneous(f: IntPolynomial, a: int, b: int, d: int | None = None) -> int:
    """
    F(a, b) = sum c_i a^i b^(d-i), exactly.
    """
    if d is None:
        d = f.degree
    acc = 0
    for i, c in enumerate(f.coeffs):
        acc += c * a**i * b ** (d - i)
    return acc


def derivative(f: IntPolynomial) -> IntPolynomial:
    return IntPolynomial([i * c for i, c in enumerate(f.coeffs)][1:])


def _bareiss_det(mat: list[list[int]]) -> int:
    # fraction-free Gaussian elimination, exact over Z
    a = [row[:] for row in mat]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def resultant(f: IntPolynomial, g: IntPolynomial) -> int:
    """
    Resultant via the determinant of the Sylvester matrix.
    """
    m, n = f.degree, g.degree
    if m < 0 or n < 0:
        return 0
    if m == 0 and n == 0:
        return 1
    size = m + n
    rows = []
    fc = list(reversed(f.coeffs))
    gc = list(reversed(g.coeffs))
    for i in range(n):
        rows.append([0] * i + fc + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + gc + [0] * (size - n - 1 - i))
    return _bareiss_det(rows)


def discriminant(f: IntPolynomial) -> int:
    d = f.degree
    if d < 1:
        raise ValueError("discriminant needs degree >= 1")
    if d == 1:
        return 1
    res = resultant(f, derivative(f))
    sign = -1 if (d * (d - 1) // 2) % 2 else 1
    q, r = divmod(sign * res, f.leading())
    assert r == 0
    return q


def translate(pair: PolyPair, k: int) -> PolyPair:
    """
    f(x) -> f(x + k), g(x) -> m2*x - m1 + k*m2.
    """
    # Taylor shift by repeated synthetic division
    cs = list(pair.f.coeffs)
    d = len(cs) - 1
    for i in range(d):
        for j in range(d - 1, i - 1, -1):
            cs[j] += k * cs[j + 1]
    g = LinearPoly(pair.g.m1 - k * pair.g.m2, pair.g.m2)
    return PolyPair(IntPolynomial(cs), g, pair.n)


def rotate_poly(f: IntPolynomial, g: LinearPoly, u: int, v: int) -> IntPolynomial:
    """
    f + (u*x + v) * g
    """
    cs = list(f.coeffs) + [0] * max(0, 3 - len(f.coeffs))
    cs[0] += -v * g.m1
    cs[1] += v * g.m2 - u * g.m1
    cs[2] += u * g.m2
    return IntPolynomial(cs)


def rotate(pair: PolyPair, rot: Rotation) -> PolyPair:
    if rot.w != 0:
        raise ValueError("only linear rotations (w = 0) are supported")
    return PolyPair(rotate_poly(pair.f, pair.g, rot.u, rot.v), pair.g, pair.n)


def base_expand(n: int, m1: int, d: int, balanced: bool = True) -> IntPolynomial:
    """
    Digits of n in base m1: n = sum c_i m1^i.

    With balanced digits, |c_i| <= m1/2 for i < d; the leading digit
    absorbs whatever is left.
    """
    if m1 < 2:
        raise ValueError("base must be >= 2")
    cs = []
    r = n
    for _ in range(d):
        c = r % m1
        if balanced and 2 * c > m1:
            c -= m1
        cs.append(c)
        r = (r - c) // m1
    if r == 0:
        raise ValueError(f"n too small for degree {d} in base {m1}")
    cs.append(r)
    return IntPolynomial(cs)


def _l2_terms(f: IntPolynomial, d: int) -> dict[int, float]:
    # int_{[-1,1]^2} F(xs, y)^2 = sum_k A_k s^k, odd moments vanish
    terms: dict[int, float] = {}
    cs = f.coeffs
    for i, ci in enumerate(cs):
        if ci == 0:
            continue
        for j, cj in enumerate(cs):
            if cj == 0 or (i + j) % 2:
                continue
            mom = 2.0 / (i + j + 1) * 2.0 / (2 * d - i - j + 1)
            terms[i + j] = terms.get(i + j, 0.0) + float(ci) * float(cj) * mom
    return terms


def skewed_l2(f: IntPolynomial, s: float, d: int | None = None) -> float:
    """
    Logarithmic skewed L2 norm: 1/2 log(s^-d int int F(xs, y)^2 dx dy).

    d defaults to deg f; a larger value treats f as the dehomogenization
    of a form of that degree.
    """
    if s <= 0:
        raise ValueError("skewness must be positive")
    if d is None:
        d = f.degree
    logs = math.log(s)
    # sum in log space keeps huge skews representable
    vals = [
        (math.log(abs(a)) + (k - d) * logs, a)
        for k, a in _l2_terms(f, d).items()
        if a != 0
    ]
    top = max(v for v, _ in vals)
    tot = sum(math.copysign(math.exp(v - top), a) for v, a in vals)
    return 0.5 * (top + math.log(tot))


def skewed_linf(f: IntPolynomial, s: float) -> float:
    if s <= 0:
        raise ValueError("skewness must be positive")
    d = f.degree
    return max(abs(c) * s ** (i - d / 2) for i, c in enumerate(f.coeffs))


def optimal_skew(f: IntPolynomial, d: int | None = None, tol: float = 1e-3) -> float:
    """
    Golden-section search of the skewed L2 norm over log s in [-30 log 2, 30 log 2].
    """
    if f.degree < 1:
        raise ValueError("optimal skew needs degree >= 1")
    if d is None:
        d = f.degree
    exps = {k - d for k, a in _l2_terms(f, d).items() if a != 0}
    if exps == {0}:
        return 1.0

    def obj(t):
        return skewed_l2(f, math.exp(t), d)

    invphi = (math.sqrt(5) - 1) / 2
    lo, hi = -30 * math.log(2), 30 * math.log(2)
    a, b = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
    fa, fb = obj(a), obj(b)
    while hi - lo > tol:
        if fa < fb:
            hi, b, fb = b, a, fa
            a = hi - invphi * (hi - lo)
            fa = obj(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + invphi * (hi - lo)
            fb = obj(b)
    return math.exp((lo + hi) / 2)


def iroot(n: int, k: int) -> int:
    """
    Floor of the k-th root of a nonnegative integer.
    """
    if n < 0:
        raise ValueError("negative radicand")
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def poly_str(f) -> str:
    """
    >>> poly_str([-1, 0, 2, 3])
    '3*x^3+2*x^2-1'
    >>> poly_str([0, 1, -1])
    '-x^2+x'
    """
    f = list(f)
    if not any(f):
        return "0"
    out = ""
    top = max(i for i, c in enumerate(f) if c)
    for i in range(top, -1, -1):
        c = f[i]
        if c == 0:
            continue
        coeff = f"{c:+}"
        var = "" if i == 0 else ("*x" if i == 1 else f"*x^{i}")
        if i == top:
            coeff = coeff.lstrip("+")
        if abs(c) == 1 and var:
            coeff = coeff[:-1]
            var = var[1:]
        out += coeff + var
    return out
