"""Searching for simple rationals inside intervals with exact algebraic endpoints.

The height of p/q is max(|p|, q).  Within an open interval there is a unique
rational of least height (the Stern-Brocot simplest fraction), except that
-1, 0 and 1 all have height 1; ties are broken by value.
"""
from __future__ import annotations


from math import ceil, floor, gcd
from typing import Iterable, Optional, Union

from .exact import QuadSum, Rational, sign_quadsum

Bound = Union[Rational, QuadSum, None]


def height(r: Rational) -> int:
    return int(max(abs(r.numerator), r.denominator))


def rational_key(r: Rational) -> tuple[int, Rational]:
    return height(r), r


def _simplest_nonneg(lo: Rational, hi: Optional[Rational]) -> Rational:
    # simplest rational in the open interval (lo, hi), 0 <= lo < hi
    n = floor(lo)
    if hi is None or n + 1 < hi:
        return Rational(n + 1)
    inner_lo = 1 / (hi - n)
    inner_hi = None if lo == n else 1 / (lo - n)
    return n + 1 / _simplest_nonneg(inner_lo, inner_hi)


def least_rational(lo: Optional[Rational], hi: Optional[Rational]) -> Rational:
    """Least rational by (height, value) in the open interval (lo, hi).

    ``None`` stands for an infinite endpoint.
    """
    if lo is not None and hi is not None and not lo < hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    if (lo is None or lo < 0) and (hi is None or hi > 0):
        return Rational(-1) if lo is None or lo < -1 else Rational(0)
    if lo is not None and lo >= 0:
        return _simplest_nonneg(lo, hi)
    # hi <= 0
    return -_simplest_nonneg(-hi, None if lo is None else -lo)


def _as_exact(b: Bound) -> Bound:
    if isinstance(b, QuadSum) and b.is_rational():
        return b.p
    return b


def _cmp_bound_rational(b: QuadSum | Rational, r: Rational) -> int:
    if not isinstance(b, QuadSum):
        return (b > r) - (b < r)
    return sign_quadsum(b - QuadSum(r))


def bound_lt(a: Bound, b: Bound) -> bool:
    """a < b for finite bounds (exact)."""
    if not isinstance(a, QuadSum) and not isinstance(b, QuadSum):
        return a < b
    qa = a if isinstance(a, QuadSum) else QuadSum(a)
    qb = b if isinstance(b, QuadSum) else QuadSum(b)
    return sign_quadsum(qb - qa) > 0


def _enclosure(b: Bound, depth: int, upper: bool) -> Optional[Rational]:
    if b is None or not isinstance(b, QuadSum):
        return b
    lo, hi = b.enclose(depth)
    return hi if upper else lo


def _least_single(lo: Bound, hi: Bound) -> Rational:
    lo, hi = _as_exact(lo), _as_exact(hi)
    if not isinstance(lo, QuadSum) and not isinstance(hi, QuadSum):
        return least_rational(lo, hi)
    depth = 16
    while True:
        outer = (_enclosure(lo, depth, False), _enclosure(hi, depth, True))
        inner = (_enclosure(lo, depth, True), _enclosure(hi, depth, False))
        if inner[0] is None or inner[1] is None or inner[0] < inner[1]:
            a = least_rational(*outer)
            if a == least_rational(*inner):
                return a
        depth *= 2


def least_rational_between(lo: Bound, hi: Bound, forbid: Iterable[Rational] = ()) -> Rational:
    """Least rational by (height, value) in (lo, hi) outside ``forbid``.

    Endpoints may be rationals, exact algebraic :class:`QuadSum` values, or
    ``None`` (infinite).  The interval must be nonempty.
    """
    cuts = sorted(
        f for f in set(forbid)
        if (lo is None or _cmp_bound_rational(lo, f) < 0)
        and (hi is None or _cmp_bound_rational(hi, f) > 0)
    )
    edges: list[Bound] = [lo, *cuts, hi]
    best: Optional[Rational] = None
    for a, b in zip(edges, edges[1:]):
        cand = _least_single(a, b)
        if best is None or rational_key(cand) < rational_key(best):
            best = cand
    assert best is not None
    return best


def rationals_up_to_height(lo: Bound, hi: Bound, cap: int) -> list[Rational]:
    """All rationals of height <= cap in the closed hull of an outer enclosure.

    Returned in (height, value) order; callers filter exactly afterwards.
    """
    lo_r = _enclosure(lo, 40, False)
    hi_r = _enclosure(hi, 40, True)
    lo_r = Rational(-cap) if lo_r is None else max(lo_r, Rational(-cap))
    hi_r = Rational(cap) if hi_r is None else min(hi_r, Rational(cap))
    out = []
    if lo_r > hi_r:
        return out
    for q in range(1, cap + 1):
        p_lo = max(ceil(lo_r * q), -cap)
        p_hi = min(floor(hi_r * q), cap)
        for p in range(p_lo, p_hi + 1):
            if gcd(p, q) == 1:
                out.append(Rational(p, q))
    out.sort(key=rational_key)
    return out


def rationals_of_height(h: int) -> list[Rational]:
    """Rationals of height exactly h, ascending."""
    out = {Rational(p, q) for q in range(1, h + 1) for p in (-h, h) if gcd(p, q) == 1}
    out.update(Rational(p, h) for p in range(-h, h + 1) if gcd(p, h) == 1)
    return sorted(out)
