"""
Command-line front end.
"""

import argparse
import json
import logging
import sys

from . import poly, rootsieve, smoothness, twostage, valuation
from .polyfile import parse_poly_file

logger = logging.getLogger("rootopt")


def _load(path):
    try:
        with open(path, encoding="utf-8") as fd:
            return parse_poly_file(fd.read())
    except OSError as e:
        raise ValueError(f"cannot read {path}: {e.strerror}") from None


def _emit_candidates(rows, as_json, out):
    keys = ("u", "v", "alpha", "lognorm", "score_millinats")
    if as_json:
        for r in rows:
            out.write(json.dumps(dict(zip(keys, r))) + "\n")
        return
    table = [keys] + [
        (str(u), str(v), f"{a:.4f}", f"{ln:.4f}", str(s)) for u, v, a, ln, s in rows
    ]
    widths = [max(len(r[i]) for r in table) for i in range(len(keys))]
    for r in table:
        out.write("  ".join(c.rjust(w) for c, w in zip(r, widths)) + "\n")


def cmd_alpha(args, out):
    pf = _load(args.polyfile)
    a = valuation.alpha(pf.pair.f, args.B)
    if args.json:
        out.write(json.dumps({"alpha": a, "B": args.B}) + "\n")
    else:
        out.write(f"{a:.6f}\n")


def cmd_norm(args, out):
    pf = _load(args.polyfile)
    s = poly.optimal_skew(pf.pair.f)
    ln = poly.skewed_l2(pf.pair.f, s)
    if args.json:
        out.write(json.dumps({"lognorm": ln, "skew": s}) + "\n")
    else:
        out.write(f"lognorm {ln:.6f}\nskew {s:.6f}\n")


def cmd_rho(args, out):
    r = smoothness.dickman_rho(args.u)
    if args.json:
        out.write(json.dumps({"u": args.u, "rho": r}) + "\n")
    else:
        out.write(f"{r:.6f}\n")


def cmd_rate(args, out):
    pf = _load(args.polyfile)
    region = smoothness.SieveRegion(args.U, pf.skew)
    r = smoothness.rate_pair(pf.pair, region, args.smooth_bound, simplified=args.simplified)
    if args.json:
        out.write(json.dumps({"rating": r}) + "\n")
    else:
        out.write(f"{r:.6e}\n")


def _rescore(pair, u, v, B):
    fr = poly.rotate_poly(pair.f, pair.g, u, v)
    return valuation.alpha(fr, B), poly.skewed_l2(fr, poly.optimal_skew(fr))


def cmd_sieve(args, out):
    pf = _load(args.polyfile)
    grid = rootsieve.fast_sieve(pf.pair, args.U, args.V, args.B, args.block)
    if args.dump:
        with open(args.dump, "wb") as fd:
            rootsieve.write_grid(fd, grid)
    rows = []
    for u, v, score in rootsieve.top_k(grid, args.topk):
        a, ln = _rescore(pf.pair, u, v, args.B)
        rows.append((u, v, a, ln, score))
    _emit_candidates(rows, args.json, out)


def cmd_optimize(args, out):
    pf = _load(args.polyfile)
    kw = dict(
        B=args.B,
        U=args.U,
        V=args.V,
        Bs=args.bs,
        keep=args.keep,
        topk=args.topk,
        max_sublattices=args.max_sublattices,
        size_factor=args.size_factor or None,
    )
    if args.stage1 is None:
        plan = twostage.default_plan(pf.pair.f.degree, **kw)
    else:
        plan = twostage.parse_plan(args.stage1, **kw)
    cands = twostage.optimize(
        pf.pair, plan, threads=args.threads, block_bytes=args.block, trial=args.trial
    )
    rows = [
        (c.rotation.u, c.rotation.v, c.alpha, c.lognorm, c.score_millinats)
        for c in cands[: args.topk]
    ]
    _emit_candidates(rows, args.json, out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rootopt", description="Root optimization of NFS polynomials")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_file(name, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("polyfile")
        sp.add_argument("--json", action="store_true")
        return sp

    sp = with_file("alpha", "alpha value of f")
    sp.add_argument("-B", type=int, default=2000, help="prime bound")
    sp.set_defaults(func=cmd_alpha)

    sp = with_file("norm", "skewed L2 norm and optimal skew")
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("rho", help="Dickman rho")
    sp.add_argument("-u", type=float, required=True)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_rho)

    sp = with_file("rate", "rho-integral rating over the skewed region")
    sp.add_argument("-U", type=float, default=1e6, help="region half-size")
    sp.add_argument("--smooth-bound", type=float, default=1e7)
    sp.add_argument("--simplified", action="store_true", help="algebraic side only")
    sp.set_defaults(func=cmd_rate)

    def sieve_flags(sp, U, V):
        sp.add_argument("-U", type=int, default=U)
        sp.add_argument("-V", type=int, default=V)
        sp.add_argument("-B", type=int, default=200, help="sieve/report prime bound")
        sp.add_argument("--topk", type=int, default=16)
        sp.add_argument("--block", type=int, default=None, help="block size in bytes")

    sp = with_file("sieve", "root sieve of the rotation box")
    sieve_flags(sp, 16, 256)
    sp.add_argument("--dump", help="write the grid in RSGRID1 format")
    sp.set_defaults(func=cmd_sieve)

    sp = with_file("optimize", "two-stage root optimization")
    sieve_flags(sp, 1024, 65536)
    sp.add_argument("--bs", type=int, default=None, help="Stage-1 bound")
    sp.add_argument("--stage1", default=None, help='plan "p:e,p:e,..."')
    sp.add_argument("--keep", type=int, default=4)
    sp.add_argument("--max-sublattices", type=int, default=64)
    sp.add_argument("--size-factor", type=float, default=2.0, help="0 disables the size guard")
    sp.add_argument("--trial", type=int, default=None, help="test-sieve sublattices, keep N")
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=cmd_optimize)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args, out)
    except ValueError as e:
        print(f"rootopt: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
