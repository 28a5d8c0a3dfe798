"""
Root sieve kernels over rotations f + (u x + v) g.

Grids hold minus the weighted affine p-valuation contribution of every
rotation in the box, in fixed point. Sieving accumulates in micro-nats
(int32) and the public cells are 16-bit milli-nats, so per-update rounding
never drifts by more than a few micro-nats.
"""

import logging
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .poly import PolyPair, derivative, rotate_poly
from .valuation import level_weight, lift_root, primes_up_to, simple_tail

logger = logging.getLogger("rootsieve")

CELL_UNIT = 1e-3  # nats per cell unit
ACC_PER_CELL = 1000  # accumulator units per cell unit
DEFAULT_BLOCK_BYTES = 256 * 1024
GRID_MAGIC = b"RSGRID1"


@dataclass
class SieveGrid:
    """
    Scores of rotations (u, v) in [-U, U] x [-V, V], row-major in u.

    For sublattice sieves the axes are (gamma, beta) instead.
    """

    U: int
    V: int
    acc: np.ndarray = None
    outer_iterations: int = 0
    cell_updates: int = 0

    def __post_init__(self):
        if self.U < 0 or self.V < 0:
            raise ValueError("grid bounds must be nonnegative")
        if self.acc is None:
            self.acc = np.zeros((2 * self.U + 1, 2 * self.V + 1), dtype=np.int32)

    @property
    def shape(self):
        return self.acc.shape

    @property
    def cells(self) -> np.ndarray:
        c = np.rint(self.acc / ACC_PER_CELL)
        return np.clip(c, -32768, 32767).astype(np.int16)

    def cell(self, u: int, v: int) -> int:
        return int(self.cells[u + self.U, v + self.V])

    def raw(self, u: int, v: int) -> int:
        return int(self.acc[u + self.U, v + self.V])

    def add_coset(self, a: int, b: int, q: int, inc: int, rows=None) -> int:
        """
        Add inc to every cell with u = a, v = b (mod q); returns cells touched.
        """
        r0, r1 = (0, self.acc.shape[0]) if rows is None else rows
        i0 = r0 + (a + self.U - r0) % q
        j0 = (b + self.V) % q
        if i0 >= r1 or j0 >= self.acc.shape[1]:
            return 0
        view = self.acc[i0:r1:q, j0::q]
        view += inc
        return view.size


def write_grid(fd, grid: SieveGrid):
    """
    Binary dump: magic, <q U, <q V, <d nats per unit, then int16 cells row-major.
    """
    fd.write(GRID_MAGIC)
    fd.write(struct.pack("<qqd", grid.U, grid.V, CELL_UNIT))
    fd.write(grid.cells.astype("<i2").tobytes())


def read_grid(fd) -> tuple[int, int, float, np.ndarray]:
    if fd.read(len(GRID_MAGIC)) != GRID_MAGIC:
        raise ValueError("not a RSGRID1 file")
    U, V, unit = struct.unpack("<qqd", fd.read(24))
    cells = np.frombuffer(fd.read(), dtype="<i2").reshape(2 * U + 1, 2 * V + 1)
    return U, V, unit, cells


def max_exponent(p: int, B: int) -> int:
    e, q = 0, 1
    while q * p <= B:
        q *= p
        e += 1
    return e


def _micro(x: float) -> int:
    return int(round(x * 1e3 * ACC_PER_CELL))


def simple_increment(p: int, k: int = 1) -> int:
    return _micro(math.log(p) * float(simple_tail(p, k)))


def level_increment(p: int, k: int) -> int:
    return _micro(math.log(p) * float(level_weight(p, k)))


def direct_score(pair: PolyPair, u: int, v: int, B: int) -> float:
    """
    Per-rotation reference for a grid cell, in nats (negative is good).

    Affine roots only, skipping the root of g mod p; simple roots get the
    full tail, multiple roots are counted up to p^e <= B.
    """
    f = rotate_poly(pair.f, pair.g, u, v)
    total = 0.0
    for p in primes_up_to(B):
        E = max_exponent(p, B)
        df = derivative(f)
        nu = Fraction(0)
        for x in range(p):
            if f(x) % p or pair.g(x) % p == 0:
                continue
            if df(x) % p:
                nu += simple_tail(p)
            else:
                rep = lift_root(f, p, x, E)
                nu += sum(
                    (c * level_weight(p, k) for k, c in enumerate(rep.counts, 1)),
                    Fraction(0),
                )
        total += float(nu) * math.log(p)
    return -total


def murphy_sieve(pair: PolyPair, U: int, V: int, B: int) -> SieveGrid:
    """
    Reference root sieve over every prime power p^e <= B.

    Level e adds the weight of one point of P^1(Z/p^e) per root; at the
    top level a simple root adds its whole remaining tail, so totals match
    direct_score.
    """
    if B < 2:
        raise ValueError("B must be >= 2")
    grid = SieveGrid(U, V)
    f, g = pair.f, pair.g
    df = derivative(f)
    nrows = 2 * U + 1
    for p in primes_up_to(B):
        E = max_exponent(p, B)
        for e in range(1, E + 1):
            grid.outer_iterations += 1
            q = p**e
            inc_mult = -level_increment(p, e)
            inc_top = -simple_increment(p, e)
            if nrows >= q:
                us = range(q)
            else:
                us = sorted({u % q for u in range(-U, U + 1)})
            for x in range(q):
                gx = g(x)
                if gx % p == 0:
                    continue
                c = -f(x) * pow(gx, -1, q) % q
                # derivative of the rotation at x mod p, up to the u*g(x) term
                dbase = (df(x) + c * g.m2) % p
                for u in us:
                    v = (c - u * x) % q
                    inc = inc_mult
                    if e == E and (dbase + u * gx) % p:
                        inc = inc_top
                    grid.cell_updates += grid.add_coset(u, v, q, inc)
    return grid


@dataclass
class MultipleRootNode:
    """
    Rotation class (u, v) mod p^k with multiple roots of f_{u,v} mod p^k.
    """

    u: int
    v: int
    k: int
    roots: list[int] = field(default_factory=list)


class _Lattice:
    """
    Maps rotation classes mod p^k to (gamma, beta) cosets of the grid.
    """

    def __init__(self, u0, v0, M, grid: SieveGrid):
        self.u0, self.v0, self.M = u0, v0, M
        self.grid = grid
        self.nrows, self.ncols = grid.shape

    def exponent(self, p):
        e, m = 0, self.M
        while m % p == 0:
            m //= p
            e += 1
        return e, m

    def coset(self, p, eM, Mrest, u, v, k):
        # None when the class misses the sublattice or the grid
        q = p ** (k - eM)
        pe = p**eM
        du, dv = u - self.u0, v - self.v0
        if du % pe or dv % pe:
            return None
        inv = pow(Mrest, -1, q) if q > 1 else 0
        a = (du // pe) * inv % q
        b = (dv // pe) * inv % q
        if (a + self.grid.U) % q >= self.nrows or (b + self.grid.V) % q >= self.ncols:
            return None
        return a, b, q


def _prime_updates(f, g, df, p, B, lat: _Lattice, x):
    """
    Coset updates (a, b, q, inc) contributed by residue x for prime p.
    """
    E = max_exponent(p, B)
    eM, Mrest = lat.exponent(p)
    if eM >= E:
        return []
    gx = g(x) % p
    if gx == 0:
        return []
    out = []
    fx = f(x)
    c = -fx * pow(gx, -1, p) % p
    ut = (fx * g.m2 - df(x) * gx) * pow(gx * gx, -1, p) % p
    inc_simple = -simple_increment(p)
    if eM == 0:
        rows = lat.nrows
        if rows >= p:
            us = range(p)
        else:
            Mi = lat.M % p
            us = sorted({(lat.u0 + gm * Mi) % p for gm in range(-lat.grid.U, lat.grid.U + 1)})
        for u in us:
            v = (c - u * x) % p
            cs = lat.coset(p, 0, Mrest, u, v, 1)
            if cs is None:
                continue
            if u != ut:
                out.append((*cs, inc_simple))
            else:
                out.append((*cs, -level_increment(p, 1)))
                if E > 1:
                    node = MultipleRootNode(u, v, 1, [x])
                    lift_and_sieve(f, g, p, E, eM, Mrest, lat, node, out)
    else:
        u, v = lat.u0 % p, lat.v0 % p
        if u != ut or (c - u * x) % p != v:
            # simple root or no root: same for every point of the sublattice
            return []
        node = MultipleRootNode(u, v, 1, [x])
        lift_and_sieve(f, g, p, E, eM, Mrest, lat, node, out)
    return out


def lift_and_sieve(f, g, p, E, eM, Mrest, lat, node, out):
    """
    Depth-first expansion of a multiple-root node up to level E.

    Each root r of node gives one line of children (i, j) mod p where
    (i r + j) g(r) + f_{u,v}(r) / p^k = 0; every child on it gets the p
    lifted roots r + l p^k. Simple roots never reach this point.
    """
    k = node.k
    q = p**k
    qn = q * p
    children: dict[tuple[int, int], list[int]] = {}
    for r in node.roots:
        gr = g(r)
        t = (f(r) + (node.u * r + node.v) * gr) // q % p
        ginv = pow(gr, -1, p)
        base = -t * ginv % p
        for i in range(p):
            j = (base - i * r) % p
            children.setdefault((i, j), []).append(r)
    inc = -level_increment(p, k + 1)
    for (i, j), rs in sorted(children.items()):
        u2, v2 = node.u + i * q, node.v + j * q
        if k + 1 <= eM:
            # still inside the class fixed by the sublattice
            if (u2 - lat.u0) % qn or (v2 - lat.v0) % qn:
                continue
        else:
            cs = lat.coset(p, eM, Mrest, u2, v2, k + 1)
            if cs is None:
                continue
            out.append((*cs, inc * p * len(rs)))
        if k + 1 < E:
            roots = [r + l * q for r in rs for l in range(p)]
            lift_and_sieve(f, g, p, E, eM, Mrest, lat, MultipleRootNode(u2, v2, k + 1, roots), out)
    # children are dropped here: the subtree has been sieved




def sieve_lattice(
    pair: PolyPair,
    grid: SieveGrid,
    u0: int,
    v0: int,
    M: int,
    B: int,
    block_bytes: int | None = None,
) -> SieveGrid:
    """
    Faster root sieve of the points (u0 + gamma M, v0 + beta M) into grid.
    """
    if B < 2:
        raise ValueError("B must be >= 2")
    if M < 1:
        raise ValueError("M must be positive")
    f, g = pair.f, pair.g
    df = derivative(f)
    lat = _Lattice(u0, v0, M, grid)
    primes = [p for p in primes_up_to(B) if lat.exponent(p)[0] < max_exponent(p, B)]
    grid.outer_iterations += len(primes)
    if block_bytes is None:
        for p in primes:
            for x in range(p):
                for a, b, q, inc in _prime_updates(f, g, df, p, B, lat, x):
                    grid.cell_updates += grid.add_coset(a, b, q, inc)
        return grid
    row_bytes = grid.acc.shape[1] * grid.acc.itemsize
    step = max(1, block_bytes // row_bytes)
    blocks = [(r, min(r + step, grid.acc.shape[0])) for r in range(0, grid.acc.shape[0], step)]
    for x in range(max(primes, default=0)):
        todo = [u for p in primes if p > x for u in _prime_updates(f, g, df, p, B, lat, x)]
        for rows in blocks:
            for a, b, q, inc in todo:
                grid.cell_updates += grid.add_coset(a, b, q, inc, rows)
    return grid


def fast_sieve(
    pair: PolyPair, U: int, V: int, B: int, block_bytes: int | None = None
) -> SieveGrid:
    """
    Root sieve over (u, v) in [-U, U] x [-V, V], lifting only multiple roots.
    """
    return sieve_lattice(pair, SieveGrid(U, V), 0, 0, 1, B, block_bytes)


def top_k(grid: SieveGrid, k: int) -> list[tuple[int, int, int]]:
    """
    The k lowest cells as (u, v, score), ties by (|u|, |v|, u, v).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    cells = grid.cells.astype(np.int64)
    us = np.arange(-grid.U, grid.U + 1)[:, None] + np.zeros_like(cells)
    vs = np.arange(-grid.V, grid.V + 1)[None, :] + np.zeros_like(cells)
    flat = [a.ravel() for a in (cells, us, vs)]
    order = np.lexsort((flat[2], flat[1], np.abs(flat[2]), np.abs(flat[1]), flat[0]))
    return [(int(flat[1][i]), int(flat[2][i]), int(flat[0][i])) for i in order[:k]]
