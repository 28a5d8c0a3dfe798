"""
Dickman rho, the Canfield-Erdos-Pomerance estimate and the rho-integral
rating of a polynomial pair over a skewed sieving region.
"""

import math
import threading
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial.legendre import leggauss

from .poly import PolyPair

RHO_CUTOFF = 20.0

_lock = threading.Lock()
# _pieces[k-1] is the Chebyshev series of rho on [k, k+1] in t = 2(u-k)-1
_pieces: list[np.ndarray] = []


def _build_piece(k: int, prev, deg: int = 64) -> np.ndarray:
    # rho is analytic on [k, k+1] (its singularities sit at smaller
    # integers), so a fixed degree is ample; the rounding tail is chopped
    t = C.chebpts2(deg + 1)
    s = k + (t + 1) / 2
    if prev is None:
        before = np.ones_like(s)
    else:
        # rho(s - 1) from the previous piece, whose variable is then t too
        before = C.chebval(t, prev)
    h = C.chebfit(t, before / s, deg)
    start = 1.0 if prev is None else float(C.chebval(1.0, prev))
    # du = dt/2
    out = -C.chebint(h, lbnd=-1) / 2
    out[0] += start
    keep = np.nonzero(np.abs(out) > 1e-17 * np.max(np.abs(out)))[0]
    return out[: keep[-1] + 1]


def _ensure(kmax: int):
    if len(_pieces) >= kmax:
        return
    with _lock:
        while len(_pieces) < kmax:
            k = len(_pieces) + 1
            prev = _pieces[-1] if _pieces else None
            _pieces.append(_build_piece(k, prev))


def dickman_rho(u):
    """
    rho(u) for scalar or array u >= 0; exactly 1 on [0, 1], 0 beyond u = 20.
    """
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("dickman_rho needs u >= 0")
    out = np.zeros_like(arr)
    out[arr <= 1] = 1.0
    mid = (arr > 1) & (arr <= RHO_CUTOFF)
    if np.any(mid):
        _ensure(int(RHO_CUTOFF))
        um = arr[mid]
        ks = np.minimum(np.floor(um), RHO_CUTOFF - 1).astype(int)
        vals = np.empty_like(um)
        for k in np.unique(ks):
            sel = ks == k
            vals[sel] = C.chebval(2 * (um[sel] - k) - 1, _pieces[k - 1])
        out[mid] = np.maximum(vals, 0.0)
    if np.ndim(u) == 0:
        return float(out)
    return out


def cep_estimate(x: float, u: float) -> float:
    """
    Psi(x, x^(1/u)) ~ x u^-u, with the o(1) in the exponent dropped.
    """
    if x < 1 or u < 1:
        raise ValueError("need x >= 1 and u >= 1")
    return x * u ** (-u)


@dataclass(frozen=True)
class SieveRegion:
    """
    |a| <= U sqrt(s), 0 < b <= U / sqrt(s); area 2U^2.
    """

    U: float
    s: float = 1.0

    def __post_init__(self):
        if self.U <= 0 or self.s <= 0:
            raise ValueError("U and s must be positive")

    @property
    def area(self) -> float:
        return 2 * self.U * self.U


def _real_roots(coeffs) -> np.ndarray:
    # coeffs low to high
    c = np.trim_zeros(np.array([float(x) for x in reversed(coeffs)]), "f")
    if len(c) < 2:
        return np.empty(0)
    r = np.roots(c)
    return np.real(r[np.abs(np.imag(r)) <= 1e-7 * np.maximum(1.0, np.abs(r))])


def _levels(B: float) -> list[float]:
    # the first derivative of rho jumps at u = 1, the second at u = 2
    return [B, B * B]


def _a_cuts(fc, d, b, levels):
    """
    Zeros of F(., b) and the a with |F(a, b)| = t for t in levels.
    """
    cb = [c * b ** (d - i) for i, c in enumerate(fc)]
    zeros = list(_real_roots(cb))
    out = []
    for t in levels:
        for sgn in (1.0, -1.0):
            cs = list(cb)
            cs[0] -= sgn * t
            out.extend(_real_roots(cs))
    return zeros, out


def _b_cuts(fc, d, amax, levels) -> list[float]:
    """
    b where the a-integrand changes shape: a level curve |F| = t turns
    over (a/b at a critical point of f) or meets the edge a = +-amax.
    """
    out = []
    df = [i * c for i, c in enumerate(fc)][1:]
    for xc in _real_roots(df):
        fx = abs(sum(c * xc**i for i, c in enumerate(fc)))
        if fx > 0:
            out.extend((t / fx) ** (1 / d) for t in levels)
    for a in (amax, -amax):
        # F(a, b) as a polynomial in b
        cb = [0.0] * (d + 1)
        for i, c in enumerate(fc):
            cb[d - i] = c * a**i
        for t in levels:
            for sgn in (1.0, -1.0):
                cs = list(cb)
                cs[0] -= sgn * t
                out.extend(_real_roots(cs))
    return out


def _segment_rule(lo, hi, zeros, xg, wg):
    """
    Nodes and weights on [lo, hi]. Near a zero a0 of F the integrand is a
    smooth function of log|a - a0|, so when the distance to a0 varies a lot
    over the piece we integrate in that variable instead.
    """
    h = (hi - lo) / 2
    plain = ((lo + hi) / 2 + h * xg, h * wg)
    if not zeros:
        return plain
    z = np.asarray(zeros)
    a0 = z[np.argmin(np.abs(z - (lo + hi) / 2))]
    if lo < a0 < hi:
        return plain
    near, far = sorted((abs(lo - a0), abs(hi - a0)))
    if far < 2 * near:
        return plain
    # drops a sliver of relative width 1e-15 where the integrand is <= 1
    near = max(near, far * 1e-15)
    t0, t1 = math.log(near), math.log(far)
    ht = (t1 - t0) / 2
    et = np.exp((t0 + t1) / 2 + ht * xg)
    sgn = 1.0 if lo >= a0 else -1.0
    return a0 + sgn * et, ht * wg * et


def rate_pair(
    pair: PolyPair,
    region: SieveRegion,
    B: float,
    simplified: bool = False,
    nodes: int = 32,
) -> float:
    """
    Gauss-Legendre value of the rho-product integral over the region.

    rho(log|F| / log B) is only piecewise smooth: it has kinks on the
    curves |F| = B^k and log-type behaviour next to F = 0. The a-integral
    is split at both, with a log substitution next to the zeros; the
    b-integral is split where those curves turn over or leave the box.
    Every piece gets `nodes` points. In simplified mode only the
    algebraic side is integrated and the coprimality factor 6/pi^2 is
    dropped.
    """
    if B <= 1:
        raise ValueError("smoothness bound must exceed 1")
    xg, wg = leggauss(nodes)
    amax = region.U * math.sqrt(region.s)
    bmax = region.U / math.sqrt(region.s)
    d = pair.f.degree
    fc = [float(c) for c in pair.f.coeffs]
    gc = [-float(pair.g.m1), float(pair.g.m2)]  # G(a, b) = m2 a - m1 b
    levels = _levels(B)
    logB = math.log(B)

    bcut = _b_cuts(fc, d, amax, levels)
    if not simplified:
        bcut += _b_cuts(gc, 1, amax, levels)
    bedges = np.unique([0.0, bmax] + [b for b in bcut if 0 < b < bmax])

    total = 0.0
    for b0, b1 in zip(bedges[:-1], bedges[1:]):
        hb = (b1 - b0) / 2
        for b, wbj in zip((b0 + b1) / 2 + hb * xg, hb * wg):
            zeros, acut = _a_cuts(fc, d, b, levels)
            if not simplified:
                gz, gcut = _a_cuts(gc, 1, b, levels)
                zeros, acut = zeros + gz, acut + gcut
            zs = sorted(zeros)
            # one zero per piece at most, so each piece has one singular end
            halves = [(x + y) / 2 for x, y in zip(zs, zs[1:])]
            inner = [a for a in zeros + acut + halves if -amax < a < amax]
            edges = np.unique([-amax, amax] + inner)
            rules = [_segment_rule(lo, hi, zeros, xg, wg) for lo, hi in zip(edges[:-1], edges[1:])]
            a = np.concatenate([r[0] for r in rules])
            wa = np.concatenate([r[1] for r in rules])
            F = np.zeros_like(a)
            for i, c in enumerate(fc):
                F += c * a**i * b ** (d - i)
            # |F| < 1 only near the zero set; floor keeps the log finite
            val = dickman_rho(np.log(np.maximum(np.abs(F), 1.0)) / logB)
            if not simplified:
                G = gc[1] * a + gc[0] * b
                val = val * dickman_rho(np.log(np.maximum(np.abs(G), 1.0)) / logB)
            total += wbj * float(np.dot(wa, val))
    if not simplified:
        total *= 6 / math.pi**2
    return total
