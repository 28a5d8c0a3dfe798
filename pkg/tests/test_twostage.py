import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_pair, vp
from rootopt.poly import IntPolynomial, LinearPoly, PolyPair, rotate_poly
from rootopt.rootsieve import fast_sieve
from rootopt.twostage import (
    CandidateClass,
    Sublattice,
    crt_combine,
    default_plan,
    optimize,
    parse_plan,
    stage1_prime,
    stage2_sieve,
    u_first_combine,
)
from rootopt.valuation import alpha


def exhaustive_classes(pair, p, e):
    """
    All classes (u, v) mod p^e scored by affine truncated valuation.
    """
    q = p**e
    out = []
    for u in range(q):
        for v in range(q):
            fr = rotate_poly(pair.f, pair.g, u, v)
            s = sum(vp(fr(x), p, e) for x in range(q))
            out.append((Fraction(s, p ** (e - 1) * (p + 1)), u, v))
    out.sort(key=lambda t: (-t[0], t[1], t[2]))
    return out


class TestPlan:
    def test_parse(self):
        plan = parse_plan("2:4,3:3,5:2,7:1")
        assert plan.entries == ((2, 4), (3, 3), (5, 2), (7, 1))
        assert plan.M == 16 * 27 * 25 * 7

    def test_empty(self):
        assert parse_plan("").M == 1

    @pytest.mark.parametrize("text", ["2:4,2:1", "4:2", "3:1,2:1", "2:0", "2-4", "x:1"])
    def test_bad(self, text):
        with pytest.raises(ValueError):
            parse_plan(text)

    def test_bs_too_small(self):
        with pytest.raises(ValueError):
            parse_plan("2:4", Bs=8)

    def test_default(self):
        assert default_plan(5).entries == ((2, 4), (3, 3), (5, 2), (7, 1))
        assert default_plan(4).M == 8 * 9 * 5


class TestStage1:
    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("p,e", [(2, 2), (2, 3), (3, 2), (5, 1)])
    def test_matches_exhaustive(self, seed, p, e):
        pair = random_pair(random.Random(seed))
        want = exhaustive_classes(pair, p, e)
        for keep in (1, 3, p ** (2 * e)):
            got = stage1_prime(pair, p, e, keep)
            assert [(c.score, c.u, c.v) for c in got] == want[:keep]

    @pytest.mark.parametrize("seed", range(3))
    def test_fixed_u(self, seed):
        pair = random_pair(random.Random(50 + seed))
        p, e = 3, 2
        want = exhaustive_classes(pair, p, e)
        for u in range(p**e):
            got = stage1_prime(pair, p, e, 2, fixed_u=u)
            assert [(c.score, c.u, c.v) for c in got] == [t for t in want if t[1] == u][:2]

    def test_e1_closed_form(self):
        # at e = 1 every root contributes exactly the level-1 weight
        pair = random_pair(random.Random(7))
        for c in stage1_prime(pair, 5, 1, 25):
            fr = rotate_poly(pair.f, pair.g, c.u, c.v)
            n = sum(1 for x in range(5) if fr(x) % 5 == 0)
            assert c.score == Fraction(n, 6)

    def test_keep_positive(self):
        with pytest.raises(ValueError):
            stage1_prime(random_pair(random.Random(1)), 2, 2, 0)


class TestCrt:
    def test_example(self):
        a = CandidateClass(1, 0, 2, 2, Fraction(1))
        b = CandidateClass(2, 1, 3, 1, Fraction(1))
        (s,) = crt_combine([[a], [b]])
        assert s.M == 12 and (s.u0 % 12, s.v0 % 12) == (5, 4)

    def test_identity(self):
        a = CandidateClass(3, 6, 7, 1, Fraction(1))
        (s,) = crt_combine([[a]])
        assert (s.u0 % 7, s.v0 % 7, s.M) == (3, 6, 7)

    def test_cardinality(self):
        xs = [CandidateClass(i, 0, 2, 1, Fraction(i)) for i in range(2)]
        ys = [CandidateClass(i, 0, 3, 1, Fraction(i)) for i in range(3)]
        assert len(crt_combine([xs, ys])) == 6

    def test_centered_and_bounded(self):
        xs = [CandidateClass(i, j, 5, 1, Fraction(0)) for i in range(5) for j in range(5)]
        subs = crt_combine([xs], bound=(1, 2))
        assert all(abs(s.u0) <= 1 and abs(s.v0) <= 2 for s in subs)
        assert len(subs) == 3 * 5

    @given(st.lists(st.tuples(st.integers(0, 15), st.integers(0, 15)), min_size=1, max_size=3),
           st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8)), min_size=1, max_size=3))
    @settings(max_examples=40, deadline=None)
    def test_residues(self, c16, c9):
        xs = [CandidateClass(u, v, 2, 4, Fraction(0)) for u, v in c16]
        ys = [CandidateClass(u, v, 3, 2, Fraction(0)) for u, v in c9]
        for s in crt_combine([xs, ys]):
            assert any(s.u0 % 16 == x.u and s.v0 % 16 == x.v for x in xs)
            assert any(s.u0 % 9 == y.u and s.v0 % 9 == y.v for y in ys)


class TestStage2:
    @pytest.mark.parametrize("seed", range(3))
    def test_restriction_of_fast_sieve(self, seed):
        pair = random_pair(random.Random(200 + seed))
        c2 = stage1_prime(pair, 2, 2, 1)[0]
        c3 = stage1_prime(pair, 3, 1, 1)[0]
        sub = crt_combine([[c2], [c3]])[0]
        M, U, V, B = 12, 30, 30, 30
        s2 = stage2_sieve(pair, sub, U, V, B)
        fs = fast_sieve(pair, U + 2 * M, V + 2 * M, B)
        diffs = {
            fs.raw(sub.u0 + gm * M, sub.v0 + bt * M) - s2.raw(gm, bt)
            for gm in range(-s2.U, s2.U + 1)
            for bt in range(-s2.V, s2.V + 1)
        }
        assert len(diffs) == 1

    def test_full_power_prime_skipped(self):
        # M = 2^7 covers every level of 2 at B = 200, so 2 adds nothing
        pair = random_pair(random.Random(3))
        sub = Sublattice(0, 0, 128)
        g = stage2_sieve(pair, sub, 128, 128, 200)
        assert g.outer_iterations == 45

    def test_origin_cell_is_stage1_poly(self):
        pair = random_pair(random.Random(4))
        sub = Sublattice(0, 0, 1)
        g = stage2_sieve(pair, sub, 0, 0, 30)
        assert g.raw(0, 0) == fast_sieve(pair, 0, 0, 30).raw(0, 0)


class TestOptimize:
    def test_trivial_plan_is_fast_sieve(self):
        pair = random_pair(random.Random(5))
        plan = parse_plan("", B=30, U=3, V=20, topk=5, size_factor=None)
        got = optimize(pair, plan)
        assert got and all(abs(c.rotation.u) <= 3 and abs(c.rotation.v) <= 20 for c in got)
        for c in got:
            fr = rotate_poly(pair.f, pair.g, c.rotation.u, c.rotation.v)
            assert c.alpha == alpha(fr, 30)
        assert [c.alpha for c in got] == sorted(c.alpha for c in got)

    def test_not_worse_than_unrotated(self):
        # keeping every cell puts (0, 0) among the candidates
        pair = random_pair(random.Random(12))
        plan = parse_plan("", B=30, U=1, V=5, topk=33, size_factor=None)
        got = optimize(pair, plan)
        assert len(got) == 33
        assert got[0].alpha <= alpha(pair.f, 30)

    def test_candidates_on_sublattices(self):
        pair = random_pair(random.Random(6), 5)
        plan = parse_plan("2:2,3:1", B=30, U=40, V=200, keep=2, topk=4, size_factor=None)
        subs = crt_combine(
            [stage1_prime(pair, p, e, plan.keep) for p, e in plan.entries], bound=(plan.U, plan.V)
        )
        got = optimize(pair, plan)
        for c in got:
            assert any(
                (c.rotation.u - s.u0) % 12 == 0 and (c.rotation.v - s.v0) % 12 == 0 for s in subs
            )

    def test_threads_agree(self):
        pair = random_pair(random.Random(8), 5)
        plan = parse_plan("2:2,3:1", B=30, U=40, V=200, keep=2, topk=4, size_factor=None)
        assert optimize(pair, plan) == optimize(pair, plan, threads=4)

    def test_u_first(self):
        pair = random_pair(random.Random(9), 5)
        plan = parse_plan("2:3,3:2,5:1", B=30, U=10, V=500)
        subs = u_first_combine(pair, plan)
        assert len({s.u0 for s in subs}) == len(subs)
        assert all(abs(s.u0) <= 10 and abs(s.v0) <= 500 for s in subs)
        for s in subs[:5]:
            for p, e in plan.entries:
                best = stage1_prime(pair, p, e, 1, fixed_u=s.u0 % p**e)[0]
                assert (s.v0 - best.v) % p**e == 0

    def test_size_guard(self):
        f = IntPolynomial([1, 0, 0, 1])
        pair = PolyPair(f, LinearPoly(1000, 1), 0)
        plan = parse_plan("", B=20, U=2, V=2, size_factor=1.0)
        got = optimize(pair, plan)
        # any rotation by x - 1000 inflates the coefficients past the guard
        assert {(c.rotation.u, c.rotation.v) for c in got} <= {(0, 0)}
