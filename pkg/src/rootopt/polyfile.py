"""
Polynomial files: "key: value" lines with n, c0..c6, Y0, Y1 and optional skew.

g(x) = Y1*x + Y0, i.e. m2 = Y1 and m1 = -Y0.
"""

import math
import re
from dataclasses import dataclass

from .poly import IntPolynomial, LinearPoly, PolyPair, optimal_skew, pair_resultant

_KEY = re.compile(r"^(n|c\d+|Y\d+|skew|name)$")


class PolyFileError(ValueError):
    pass


@dataclass(frozen=True)
class PolyFile:
    pair: PolyPair
    skew: float
    name: str | None = None


def _int(key, text):
    try:
        return int(text)
    except ValueError:
        raise PolyFileError(f"malformed integer for {key}: {text!r}") from None


def parse_poly_file(text: str) -> PolyFile:
    fields: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise PolyFileError(f"line {lineno}: expected 'key: value'")
        key, value = (s.strip() for s in line.split(":", 1))
        if not _KEY.match(key):
            # other keys (type, lpb, ...) belong to other tools
            continue
        fields[key] = value

    for key in ("n", "Y0", "Y1"):
        if key not in fields:
            raise PolyFileError(f"missing {key}")
    cidx = [int(k[1:]) for k in fields if k.startswith("c")]
    if not cidx:
        raise PolyFileError("no coefficients c0..cd")
    n = _int("n", fields["n"])
    coeffs = [_int(f"c{i}", fields.get(f"c{i}", "0")) for i in range(max(cidx) + 1)]
    if any(k.startswith("Y") and k not in ("Y0", "Y1") for k in fields):
        raise PolyFileError("only linear g (Y0, Y1) is supported")
    y0, y1 = _int("Y0", fields["Y0"]), _int("Y1", fields["Y1"])
    if y1 <= 0:
        raise PolyFileError("Y1 must be positive")
    if math.gcd(y0, y1) != 1:
        raise PolyFileError("gcd(Y0, Y1) must be 1")
    f = IntPolynomial(coeffs)
    g = LinearPoly(-y0, y1)
    if f.degree < 1:
        raise PolyFileError("f must have degree >= 1")
    res = pair_resultant(f, g)
    if res == 0:
        raise PolyFileError("f and g share a factor")
    if n == 0 or res % n:
        raise PolyFileError("pair shares no common root mod n")
    pair = PolyPair(f, g, n)
    if "skew" in fields:
        try:
            skew = float(fields["skew"])
        except ValueError:
            raise PolyFileError(f"malformed skew {fields['skew']!r}") from None
        if not skew > 0:
            raise PolyFileError("skew must be positive")
    else:
        skew = optimal_skew(f)
    return PolyFile(pair, skew, fields.get("name"))


def format_poly_file(pf: PolyFile) -> str:
    lines = []
    if pf.name:
        lines.append(f"name: {pf.name}")
    lines.append(f"n: {pf.pair.n}")
    lines.append(f"skew: {pf.skew!r}")
    for i, c in enumerate(pf.pair.f.coeffs):
        lines.append(f"c{i}: {c}")
    lines.append(f"Y0: {-pf.pair.g.m1}")
    lines.append(f"Y1: {pf.pair.g.m2}")
    return "\n".join(lines) + "\n"
