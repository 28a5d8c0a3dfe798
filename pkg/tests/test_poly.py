import math

import mpmath
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from rootopt.poly import (
    IntPolynomial,
    LinearPoly,
    PolyPair,
    Rotation,
    base_expand,
    derivative,
    discriminant,
    eval_homogeneous,
    iroot,
    optimal_skew,
    pair_resultant,
    resultant,
    rotate,
    rotate_poly,
    skewed_l2,
    skewed_linf,
    translate,
)

X = sympy.Symbol("x")
coeffs = st.lists(st.integers(-60, 60), min_size=2, max_size=7).filter(lambda c: c[-1] != 0)


def P(*cs):
    return IntPolynomial(list(cs))


def to_sympy(f):
    return sympy.Poly(list(reversed(f.coeffs)), X)


class TestBasics:
    def test_trailing_zeros_stripped(self):
        f = P(1, 2, 0, 0)
        assert f.coeffs == (1, 2) and f.degree == 1
        assert P(0, 0).degree == -1 and P().is_zero()

    @pytest.mark.parametrize("ab,want", [((1, 2), 5), ((0, 1), 1), ((2, 3), 13)])
    def test_eval_homogeneous(self, ab, want):
        assert eval_homogeneous(P(1, 0, 1), *ab) == want

    def test_derivative(self):
        assert derivative(P(1, 0, 1)) == P(0, 2)
        assert derivative(P(7)).is_zero()
        assert derivative(P(0, 0, 0, 1)) == P(0, 0, 3)

    @pytest.mark.parametrize("f,want", [(P(1, 0, 1), -4), (P(-1, 0, 1), 4), (P(0, -1, 0, 1), 4)])
    def test_discriminant(self, f, want):
        assert discriminant(f) == want

    def test_discriminant_degree_zero(self):
        with pytest.raises(ValueError):
            discriminant(P(5))

    @given(coeffs, coeffs)
    @settings(max_examples=60, deadline=None)
    def test_resultant_root_product(self, a, b):
        # lc(f)^deg g * prod g(alpha) over the complex roots of f
        f, g = IntPolynomial(a), IntPolynomial(b)
        with mpmath.workdps(80):
            roots = mpmath.polyroots(list(reversed(a)), maxsteps=400, extraprec=400)
            val = mpmath.mpf(f.leading()) ** g.degree
            for r in roots:
                val *= mpmath.polyval(list(reversed(b)), r)
            want = int(mpmath.nint(mpmath.re(val)))
        assert resultant(f, g) == want

    @given(coeffs.filter(lambda c: len(c) >= 3))
    @settings(max_examples=60, deadline=None)
    def test_discriminant_matches_sympy(self, a):
        f = IntPolynomial(a)
        assert discriminant(f) == int(sympy.discriminant(to_sympy(f)))


class TestTransforms:
    def test_translate_example(self):
        pair = PolyPair(P(0, 0, 1), LinearPoly(3, 2), 0)
        t = translate(pair, 1)
        assert t.f == P(1, 2, 1)
        assert (t.g.m2, t.g.m1) == (2, 1)

    def test_rotate_examples(self):
        g = LinearPoly(5, 1)
        assert rotate_poly(P(0, 0, 0, 1), g, 0, 1) == P(-5, 1, 0, 1)
        assert rotate_poly(P(0, 0, 0, 1), g, 1, 0) == P(0, -5, 1, 1)
        assert rotate_poly(P(0, 0, 0, 1), g, 0, 0) == P(0, 0, 0, 1)

    def test_rotate_rejects_quadratic(self):
        pair = PolyPair(P(1, 0, 1), LinearPoly(3, 1), 10)
        with pytest.raises(ValueError):
            rotate(pair, Rotation(0, 0, 1))

    @given(coeffs, st.integers(-30, 30), st.integers(1, 9), st.integers(-20, 20))
    @settings(max_examples=80, deadline=None)
    def test_translate_roundtrip_and_resultant(self, a, m1, m2, k):
        if math.gcd(m1, m2) != 1:
            return
        f, g = IntPolynomial(a), LinearPoly(m1, m2)
        pair = PolyPair(f, g, 0)
        t = translate(pair, k)
        back = translate(t, -k)
        assert back.f == f and (back.g.m1, back.g.m2) == (m1, m2)
        assert pair_resultant(t.f, t.g) == pair_resultant(f, g)

    @given(coeffs, st.integers(-30, 30), st.integers(1, 9), st.integers(-99, 99), st.integers(-99, 99))
    @settings(max_examples=80, deadline=None)
    def test_rotation_keeps_common_root(self, a, m1, m2, u, v):
        # needs deg f >= 3 so that the rotation keeps the degree
        if math.gcd(m1, m2) != 1 or len(a) < 4:
            return
        f, g = IntPolynomial(a), LinearPoly(m1, m2)
        fr = rotate_poly(f, g, u, v)
        assert pair_resultant(fr, g) == pair_resultant(f, g)


class TestBaseExpand:
    def test_plain(self):
        assert base_expand(123, 5, 2, balanced=False) == P(3, 4, 4)
        assert base_expand(10, 3, 2) == P(1, 0, 1)

    def test_balanced(self):
        f = base_expand(7, 3, 1)
        assert abs(f[0]) <= 1 and f(3) == 7

    @given(st.integers(10**6, 10**30), st.integers(2, 6), st.booleans())
    @settings(max_examples=80, deadline=None)
    def test_value_at_m(self, n, d, balanced):
        m = iroot(n, d)
        if m < 2:
            return
        f = base_expand(n, m, d, balanced)
        assert f(m) == n
        if balanced:
            assert all(2 * abs(c) <= m for c in f.coeffs[:-1])

    def test_iroot(self):
        assert iroot(10**30, 5) == 10**6
        assert iroot(10**30 - 1, 5) == 10**6 - 1


class TestNorms:
    def test_l2_examples(self):
        assert skewed_l2(P(0, 1), 1) == pytest.approx(0.5 * math.log(4 / 3), abs=1e-12)
        assert skewed_l2(P(1), 1, d=0) == pytest.approx(math.log(2), abs=1e-12)
        assert skewed_l2(P(0, 1), 4) == pytest.approx(0.5 * math.log(16 / 3), abs=1e-12)

    def test_linf_examples(self):
        assert skewed_linf(P(1, 0, 1), 1) == 1
        assert skewed_linf(P(3, 0, 2), 1) == 3
        assert skewed_linf(P(1, 0, 1), 4) == 4

    def test_l2_numeric_integral(self):
        # midpoint rule over [-1, 1]^2 as an independent check
        f, s = P(3, -2, 1), 2.5
        n = 200
        h = 2 / n
        tot = 0.0
        for i in range(n):
            x = -1 + (i + 0.5) * h
            for j in range(n):
                y = -1 + (j + 0.5) * h
                val = sum(c * (x * s) ** k * y ** (2 - k) for k, c in enumerate(f.coeffs)) / s
                tot += val * val * h * h
        assert skewed_l2(f, s) == pytest.approx(0.5 * math.log(tot), abs=1e-4)

    @given(coeffs, st.floats(0.05, 50))
    @settings(max_examples=60, deadline=None)
    def test_l2_sign_symmetry(self, a, s):
        f = IntPolynomial(a)
        g = IntPolynomial([c * (-1) ** i for i, c in enumerate(a)])
        assert skewed_l2(g, s) == pytest.approx(skewed_l2(f, s), rel=1e-12, abs=1e-12)

    def test_optimal_skew_scale_free(self):
        assert optimal_skew(P(0, 1, 0), d=2) == 1.0

    def test_optimal_skew_grid(self):
        f = P(100, 0, 1)
        grid = [2 ** (k / 64) for k in range(-640, 641)]
        best = min(grid, key=lambda s: skewed_l2(f, s))
        assert optimal_skew(f) == pytest.approx(best, rel=0.01)

    def test_optimal_skew_scale_invariant(self):
        f = P(7, -3, 11, 2)
        assert optimal_skew(f.scale(2)) == pytest.approx(optimal_skew(f), rel=1e-6)


class TestPairValidation:
    def test_bad_linear(self):
        with pytest.raises(ValueError):
            LinearPoly(4, 2)
        with pytest.raises(ValueError):
            LinearPoly(3, 0)

    def test_no_common_root(self):
        with pytest.raises(ValueError, match="no common root"):
            PolyPair(P(1, 0, 1), LinearPoly(3, 1), 7)
        PolyPair(P(1, 0, 1), LinearPoly(3, 1), 10)
