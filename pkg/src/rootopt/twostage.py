"""
Two-stage root optimization: good rotation classes modulo small prime
powers (Stage 1), combined by CRT into sublattices that are then root
sieved (Stage 2).
"""

import heapq
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .poly import (
    PolyPair,
    Rotation,
    derivative,
    optimal_skew,
    rotate_poly,
    skewed_l2,
    skewed_linf,
)
from .rootsieve import SieveGrid, sieve_lattice, top_k
from .valuation import alpha, level_weight, primes_up_to

logger = logging.getLogger("twostage")


@dataclass(frozen=True)
class PrimePowerPlan:
    entries: tuple[tuple[int, int], ...]
    B: int = 200
    U: int = 1024
    V: int = 65536
    Bs: int | None = None
    keep: int = 4
    topk: int = 16
    max_sublattices: int = 64
    size_factor: float | None = 2.0
    # M may exceed U by this factor before we complain
    m_ratio: float = 128.0

    def __post_init__(self):
        ps = [p for p, _ in self.entries]
        if ps != sorted(set(ps)):
            raise ValueError("plan primes must be distinct and ascending")
        for p, e in self.entries:
            if p not in primes_up_to(max(p, 2)) or e < 1:
                raise ValueError(f"bad plan entry {p}:{e}")
        if self.Bs is not None and self.entries and self.Bs < max(p**e for p, e in self.entries):
            raise ValueError("Stage-1 bound smaller than a planned prime power")
        if self.keep < 1 or self.topk < 1:
            raise ValueError("keep and topk must be positive")
        pe = [p**e for p, e in self.entries]
        # later powers should not be much larger than earlier ones
        if any(b > 2 * a for a, b in zip(pe, pe[1:])):
            logger.warning("plan prime powers are not nonincreasing: %s", pe)
        if self.M > self.m_ratio * max(self.U, 1):
            logger.warning("M=%d much larger than U=%d", self.M, self.U)

    @property
    def M(self) -> int:
        return math.prod(p**e for p, e in self.entries)


def parse_plan(text: str, **kw) -> PrimePowerPlan:
    """
    "2:4,3:3,5:2,7:1" -> PrimePowerPlan
    """
    entries = []
    text = text.strip()
    if text:
        for item in text.split(","):
            try:
                p, e = item.split(":")
                entries.append((int(p), int(e)))
            except ValueError:
                raise ValueError(f"malformed plan entry {item!r}") from None
    return PrimePowerPlan(tuple(entries), **kw)


def default_plan(degree: int, **kw) -> PrimePowerPlan:
    if degree >= 5:
        return parse_plan("2:4,3:3,5:2,7:1", **kw)
    return parse_plan("2:3,3:2,5:1", **kw)


@dataclass(frozen=True)
class CandidateClass:
    u: int
    v: int
    p: int
    e: int
    score: Fraction


@dataclass(frozen=True)
class Sublattice:
    u0: int
    v0: int
    M: int
    score: float = 0.0


def _weights(p, e, metric):
    # weight of one root mod p^k, k = 1..e
    if metric == "valuation":
        return [None] + [level_weight(p, k) for k in range(1, e + 1)]
    if metric == "roots":
        return [None] + [Fraction(int(k == e)) for k in range(1, e + 1)]
    raise ValueError(f"unknown metric {metric!r}")


def stage1_prime(
    pair: PolyPair,
    p: int,
    e: int,
    keep: int,
    metric: str = "valuation",
    fixed_u: int | None = None,
) -> list[CandidateClass]:
    """
    Best `keep` rotation classes (u, v) mod p^e by truncated affine p-valuation,
    optionally only among classes with u = fixed_u (mod p^e).

    Depth-first over the p^2-ary lifting tree with branch-and-bound: a
    node's multiple roots can each have at most p^(j-k) descendants at
    level j, which bounds every leaf below it.
    """
    if keep < 1:
        raise ValueError("keep must be >= 1")
    f, g = pair.f, pair.g
    w = _weights(p, e, metric)
    simple_w = sum(w[1:], Fraction(0))
    mod = p ** (e + 1)
    fc = [c % mod for c in f.coeffs]

    def fuv(u, v, x):
        acc = 0
        for c in reversed(fc):
            acc = acc * x + c
        return acc + (u * x + v) * g(x)

    def upper(score, nroots, k):
        return score + nroots * sum((p ** (j - k) * w[j] for j in range(k + 1, e + 1)), Fraction(0))

    best: list[Fraction] = []  # min-heap of the best `keep` scores so far
    found: list[tuple[Fraction, int, int]] = []

    def threshold():
        return best[0] if len(best) >= keep else None

    def emit(score, u, v, k):
        # every class mod p^e above (u, v) mod p^k has this score
        t = threshold()
        if t is not None and score < t:
            return
        n = p ** (e - k)
        q = p**k
        arange = range(n) if fixed_u is None else (fixed_u % p**e // q,)
        for a, b in itertools.islice(itertools.product(arange, range(n)), keep):
            found.append((score, u + a * q, v + b * q))
            if len(best) < keep:
                heapq.heappush(best, score)
            elif score > best[0]:
                heapq.heapreplace(best, score)

    def visit(u, v, k, score, roots):
        if not roots or k == e:
            emit(score, u, v, k)
            return
        t = threshold()
        if t is not None and upper(score, len(roots), k) < t:
            return
        q = p**k
        kids: dict[tuple[int, int], list[int]] = {}
        for r in roots:
            t_r = fuv(u, v, r) // q % p
            gr = g(r) % p
            for i in range(p):
                for j in range(p):
                    if ((i * r + j) * gr + t_r) % p == 0:
                        kids.setdefault((i, j), []).append(r)
        order = []
        for i in ui(k):
            for j in range(p):
                rs = kids.get((i, j), [])
                s = score + p * len(rs) * w[k + 1]
                nr = [r + l * q for r in rs for l in range(p)]
                order.append((upper(s, len(nr), k + 1), i, j, s, nr))
        order.sort(key=lambda o: (-o[0], o[1], o[2]))
        for _, i, j, s, nr in order:
            visit(u + i * q, v + j * q, k + 1, s, nr)

    def ui(k):
        # admissible u digits at level k
        return range(p) if fixed_u is None else (fixed_u // p**k % p,)

    df = derivative(f)
    level1 = []
    for u in ui(0):
        for v in range(p):
            score = Fraction(0)
            mult = []
            for x in range(p):
                if fuv(u, v, x) % p:
                    continue
                # derivative of f + (u x + v) g at x
                d = df(x) + u * g(x) + (u * x + v) * g.m2
                if d % p:
                    score += simple_w
                else:
                    score += w[1]
                    mult.append(x)
            level1.append((upper(score, len(mult), 1), u, v, score, mult))
    level1.sort(key=lambda o: (-o[0], o[1], o[2]))
    for _, u, v, score, mult in level1:
        visit(u, v, 1, score, mult)

    found.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [CandidateClass(u, v, p, e, s) for s, u, v in found[:keep]]


def _crt(residues, moduli):
    x, m = 0, 1
    for r, q in zip(residues, moduli):
        if math.gcd(m, q) != 1:
            raise ValueError("moduli must be pairwise coprime")
        t = (r - x) * pow(m, -1, q) % q
        x += m * t
        m *= q
    return x % m, m


def _center(x, m):
    return x - m if 2 * x > m else x


def crt_combine(
    candidates: list[list[CandidateClass]],
    bound: tuple[int, int] | None = None,
    limit: int | None = None,
) -> list[Sublattice]:
    """
    Every combination of per-prime classes as a sublattice (u0, v0) mod M,
    best summed weighted score first.

    u0, v0 are the representatives of least absolute value; with
    bound = (U, V) combinations with no point in the box are dropped.
    """
    if not candidates:
        return [Sublattice(0, 0, 1)]
    out = []
    for combo in itertools.product(*candidates):
        moduli = [c.p**c.e for c in combo]
        u0, M = _crt([c.u for c in combo], moduli)
        v0, _ = _crt([c.v for c in combo], moduli)
        u0, v0 = _center(u0, M), _center(v0, M)
        if bound is not None and (abs(u0) > bound[0] or abs(v0) > bound[1]):
            continue
        score = math.fsum(float(c.score) * math.log(c.p) for c in combo)
        out.append(Sublattice(u0, v0, M, score))
    out.sort(key=lambda s: (-s.score, s.u0, s.v0))
    if limit is not None:
        out = out[:limit]
    return out


def u_first_combine(
    pair: PolyPair, plan: "PrimePowerPlan", limit: int | None = None
) -> list[Sublattice]:
    """
    One sublattice per u in [-U, U] (mod M), with the best v class of each
    planned prime for that u.

    Used when M is much larger than U: then few combinations of the
    independently chosen per-prime classes have any point in the box.
    """
    best = {}
    for p, e in plan.entries:
        q = p**e
        for r in range(min(q, 2 * plan.U + 1)):
            r = (r - plan.U) % q
            best[p, r] = stage1_prime(pair, p, e, 1, fixed_u=r)[0]
    M = plan.M
    us = sorted({_center(u % M, M) for u in range(-plan.U, plan.U + 1)}, key=lambda u: (abs(u), u))
    out = []
    for u in us:
        combo = [best[p, u % p**e] for p, e in plan.entries]
        v0, _ = _crt([c.v for c in combo], [p**e for p, e in plan.entries])
        v0 = _center(v0, M)
        if abs(v0) > plan.V:
            continue
        score = math.fsum(float(c.score) * math.log(c.p) for c in combo)
        out.append(Sublattice(u, v0, M, score))
    out.sort(key=lambda s: (-s.score, abs(s.u0), s.u0, s.v0))
    return out[:limit] if limit is not None else out


def stage2_sieve(
    pair: PolyPair,
    sub: Sublattice,
    U: int,
    V: int,
    B: int,
    block_bytes: int | None = None,
) -> SieveGrid:
    """
    Root sieve on the points (u0 + gamma M, v0 + beta M).

    Primes dividing M only contribute at levels above their exponent in M;
    everything below is the same for the whole sublattice and is left out.
    """
    if sub.M < 1:
        raise ValueError("sublattice modulus must be positive")
    # |u0| <= M/2, so ceil(U/M) steps reach every point of [-U, U]
    grid = SieveGrid(-(-U // sub.M), -(-V // sub.M))
    return sieve_lattice(pair, grid, sub.u0, sub.v0, sub.M, B, block_bytes)


@dataclass(frozen=True)
class Candidate:
    rotation: Rotation
    alpha: float
    lognorm: float
    score_millinats: int


def _sieve_one(pair, sub, plan, block_bytes):
    grid = stage2_sieve(pair, sub, plan.U, plan.V, plan.B, block_bytes)
    out = []
    for gm, bt, score in top_k(grid, plan.topk):
        u, v = sub.u0 + gm * sub.M, sub.v0 + bt * sub.M
        if abs(u) <= plan.U and abs(v) <= plan.V:
            out.append((u, v, score))
    return out


def optimize(
    pair: PolyPair,
    plan: PrimePowerPlan,
    report_B: int | None = None,
    threads: int = 1,
    block_bytes: int | None = None,
    trial: int | None = None,
) -> list[Candidate]:
    """
    Stage 1 per planned prime power, CRT, Stage 2 on the best sublattices,
    then exact alpha and skewed norm for the survivors.

    With trial set, each sublattice is first sieved on a short interval
    and only the `trial` best go on to the full Stage 2.
    """
    report_B = report_B or plan.B
    per_prime = [stage1_prime(pair, p, e, plan.keep) for p, e in plan.entries]
    subs = crt_combine(per_prime, bound=(plan.U, plan.V), limit=plan.max_sublattices)
    if len(subs) < plan.max_sublattices and plan.M > plan.U:
        logger.info("only %d combined sublattices reach the box; using u-first", len(subs))
        subs = u_first_combine(pair, plan, plan.max_sublattices)
    logger.info("%d sublattices with M=%d", len(subs), plan.M)

    if trial is not None and len(subs) > trial:
        short = PrimePowerPlan((), B=plan.B, U=0, V=2 * subs[0].M, topk=1)

        def best_short(sub):
            res = _sieve_one(pair, sub, short, block_bytes)
            return res[0][2] if res else 0

        ranked = sorted(subs, key=lambda s: (best_short(s), -s.score, s.u0, s.v0))
        subs = ranked[:trial]

    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        results = list(ex.map(lambda s: _sieve_one(pair, s, plan, block_bytes), subs))

    seen: dict[tuple[int, int], int] = {}
    for res in results:
        for u, v, score in res:
            if (u, v) not in seen or score < seen[(u, v)]:
                seen[(u, v)] = score

    f = pair.f
    s0 = optimal_skew(f)
    linf0 = skewed_linf(f, s0)
    out = []
    for (u, v), score in sorted(seen.items()):
        fr = rotate_poly(f, pair.g, u, v)
        if plan.size_factor is not None and skewed_linf(fr, s0) > plan.size_factor * linf0:
            continue
        out.append(
            Candidate(
                Rotation(u, v),
                alpha(fr, report_B),
                skewed_l2(fr, optimal_skew(fr)),
                score,
            )
        )
    out.sort(key=lambda c: (c.alpha, c.lognorm, c.rotation.u, c.rotation.v))
    return out
