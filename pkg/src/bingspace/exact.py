"""Exact arithmetic on Q + sqrt(3)Q, cut endpoints q + sqrt(2) and their mixed order.

Rationals are ``gmpy2.mpq`` values (aliased ``Rational``).  Every number the construction
touches lives in Q(sqrt2, sqrt3), so signs can always be decided exactly:
zero is detected from basis coordinates and a nonzero sign is resolved by
refining rational enclosures of sqrt2, sqrt3 and sqrt6.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from fractions import Fraction
from functools import total_ordering
from math import floor
from typing import Union

from gmpy2 import mpq as Rational

RationalLike = Union[int, Rational, Fraction, str]


class Order(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1


def Q(value: RationalLike, den: int | None = None) -> Rational:
    """Coerce to a Rational.  Accepts ints, Rationals, Fractions and ``"p/q"`` strings."""
    if den is not None:
        return Rational(value, den)
    if isinstance(value, Rational):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; use p/q strings")
    return Rational(value)


def fmt_rational(r: Rational) -> str:
    """Canonical ``p/q`` text (q > 0, always written)."""
    return f"{r.numerator}/{r.denominator}"


def parse_rational(text: str) -> Rational:
    if not isinstance(text, str):
        raise ValueError(f"rational must be a string, got {text!r}")
    t = text.strip()
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", t):
        raise ValueError(f"bad rational {text!r}")
    try:
        return Rational(t)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad rational {text!r}") from exc


# --- rational enclosures of sqrt2, sqrt3, sqrt6 -----------------------------
#
# Bisection on [1,2], [1,2], [2,3].  After k halvings the enclosure is
# [a/2^k, (a+1)/2^k] with a an integer; we keep only the integers.

class _Bisection:
    def __init__(self, radicand: int, lo: int):
        self.radicand = radicand
        self.lows = [lo]

    def low(self, depth: int) -> int:
        lows = self.lows
        while len(lows) <= depth:
            k = len(lows)
            mid = 2 * lows[-1] + 1
            # mid / 2^k <= sqrt(n)  <=>  mid^2 <= n * 4^k
            lows.append(mid if mid * mid <= self.radicand << (2 * k) else mid - 1)
        return lows[depth]


_SQRT2 = _Bisection(2, 1)
_SQRT3 = _Bisection(3, 1)
_SQRT6 = _Bisection(6, 2)

_FIX = 128
_S2_FIX = _SQRT2.low(_FIX)
_S3_FIX = _SQRT3.low(_FIX)


def _scaled_bounds(coef: int, low: int) -> tuple[int, int]:
    # coef * [low, low+1]
    if coef >= 0:
        return coef * low, coef * (low + 1)
    return coef * (low + 1), coef * low


@dataclass(frozen=True)
class QuadSum:
    """p + q*sqrt2 + r*sqrt3 + s*sqrt6 with rational coordinates."""

    p: Rational = Rational(0)
    q: Rational = Rational(0)
    r: Rational = Rational(0)
    s: Rational = Rational(0)

    def __add__(self, other: QuadSum) -> QuadSum:
        return QuadSum(self.p + other.p, self.q + other.q, self.r + other.r, self.s + other.s)

    def __sub__(self, other: QuadSum) -> QuadSum:
        return QuadSum(self.p - other.p, self.q - other.q, self.r - other.r, self.s - other.s)

    def __neg__(self) -> QuadSum:
        return QuadSum(-self.p, -self.q, -self.r, -self.s)

    def scale(self, k: RationalLike) -> QuadSum:
        k = Q(k)
        return QuadSum(self.p * k, self.q * k, self.r * k, self.s * k)

    def is_rational(self) -> bool:
        return self.q == 0 and self.r == 0 and self.s == 0

    def is_zero(self) -> bool:
        return self.p == 0 and self.is_rational()

    def _integral(self) -> tuple[int, int, int, int, int]:
        den = 1
        for c in (self.p, self.q, self.r, self.s):
            den = den * c.denominator // _gcd(den, c.denominator)
        return (int(self.p * den), int(self.q * den), int(self.r * den),
                int(self.s * den), den)

    def enclose(self, depth: int) -> tuple[Rational, Rational]:
        """Closed rational interval containing the value, width O(2^-depth)."""
        lo, hi, scale = self._enclose_int(depth)
        return Rational(lo, scale), Rational(hi, scale)

    def _enclose_int(self, depth: int) -> tuple[int, int, int]:
        P, Qc, R, S, den = self._integral()
        lo = hi = P << depth
        for coef, rad in ((Qc, _SQRT2), (R, _SQRT3), (S, _SQRT6)):
            if coef:
                a, b = _scaled_bounds(coef, rad.low(depth))
                lo += a
                hi += b
        return lo, hi, den << depth

    def sign(self) -> int:
        return sign_quadsum(self)

    def floor(self) -> int:
        """Exact floor of the real value."""
        if self.is_rational():
            return floor(self.p)
        depth = 16
        while True:
            lo, hi, scale = self._enclose_int(depth)
            a, b = lo // scale, hi // scale
            # hi itself may be an integer boundary only if the value equals it,
            # which is impossible for an irrational value; so require a == b.
            if a == b:
                return a
            depth *= 2

    def approx(self) -> float:
        lo, hi = self.enclose(60)
        return float((lo + hi) / 2)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


_F2, _F3, _F6 = 2 ** 0.5, 3 ** 0.5, 6 ** 0.5


def _float_sign(w: QuadSum) -> int:
    # Each float term carries relative error below 2^-50, so the sum is off by
    # far less than 1e-12 of the absolute term total; 0 means "undecided".
    try:
        terms = (float(w.p), float(w.q) * _F2, float(w.r) * _F3, float(w.s) * _F6)
    except OverflowError:
        return 0
    total = terms[0] + terms[1] + terms[2] + terms[3]
    bound = 1e-12 * (abs(terms[0]) + abs(terms[1]) + abs(terms[2]) + abs(terms[3])) + 1e-250
    if total > bound:
        return 1
    if total < -bound:
        return -1
    return 0


def _term_bounds(c: Rational, rad: _Bisection | None, depth: int) -> tuple[int, int]:
    # integer lo <= c * radical * 2^depth <= hi
    n, d = c.numerator, c.denominator
    if rad is None:
        a = b = n << depth
    else:
        low = rad.low(depth)
        a, b = (n * low, n * (low + 1)) if n >= 0 else (n * (low + 1), n * low)
    return a // d, -((-b) // d)


def _sign_terms(terms: tuple[tuple[Rational, _Bisection | None], ...]) -> int:
    # nonzero value assumed; refine fixed-point enclosures until the sign shows
    depth = 64
    while True:
        lo = hi = 0
        for c, rad in terms:
            if c:
                a, b = _term_bounds(c, rad, depth)
                lo += a
                hi += b
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        depth *= 2


def sign_quadsum(w: QuadSum) -> int:
    """Exact sign of p + q*sqrt2 + r*sqrt3 + s*sqrt6."""
    if w.is_rational():
        return (w.p > 0) - (w.p < 0)
    # nonzero: {1, sqrt2, sqrt3, sqrt6} is a Q-basis, so refinement terminates
    fast = _float_sign(w)
    if fast:
        return fast
    return _sign_terms(((w.p, None), (w.q, _SQRT2), (w.r, _SQRT3), (w.s, _SQRT6)))


def _sign_a_plus_b_sqrt3(a: Rational, b: Rational) -> int:
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0 or sa == sb:
        return sa or sb
    if sa == 0:
        return sb
    # opposite signs: compare a^2 with 3 b^2
    d = a * a - 3 * b * b
    return sa if d > 0 else sb


@total_ordering
@dataclass(frozen=True)
class QF3Value:
    """r0 + r1*sqrt3, an element of X = Q + sqrt(3)Q."""

    r0: Rational = Rational(0)
    r1: Rational = Rational(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "r0", Q(self.r0))
        object.__setattr__(self, "r1", Q(self.r1))

    def fixed(self) -> tuple[int, int]:
        """(F, E) with |value * 2^128 - F| <= E, cached."""
        got = self.__dict__.get("_fixed")
        if got is None:
            n, d = self.r1.numerator, self.r1.denominator
            F = (self.r0.numerator << _FIX) // self.r0.denominator + (n * _S3_FIX) // d
            got = (F, abs(n) // d + 3)
            object.__setattr__(self, "_fixed", got)
        return got

    def __add__(self, other: QF3Value) -> QF3Value:
        return QF3Value(self.r0 + other.r0, self.r1 + other.r1)

    def __sub__(self, other: QF3Value) -> QF3Value:
        return QF3Value(self.r0 - other.r0, self.r1 - other.r1)

    def __neg__(self) -> QF3Value:
        return QF3Value(-self.r0, -self.r1)

    def scale(self, k: RationalLike) -> QF3Value:
        k = Q(k)
        return QF3Value(self.r0 * k, self.r1 * k)

    def __mul__(self, other: QF3Value) -> QF3Value:
        return QF3Value(self.r0 * other.r0 + 3 * self.r1 * other.r1,
                        self.r0 * other.r1 + self.r1 * other.r0)

    def __lt__(self, other: object) -> bool:
        if isinstance(other, QF3Value):
            return qf3_compare(self, other) is Order.LT
        if isinstance(other, Cut):
            return cut_compare_qf3(other, self) is Order.GT
        return NotImplemented

    def is_rational(self) -> bool:
        return self.r1 == 0

    def as_quadsum(self) -> QuadSum:
        return QuadSum(self.r0, Rational(0), self.r1, Rational(0))

    def sign(self) -> int:
        return _sign_a_plus_b_sqrt3(self.r0, self.r1)

    def __abs__(self) -> QF3Value:
        return -self if self.sign() < 0 else self

    def approx(self) -> float:
        return self.as_quadsum().approx()

    def to_json(self) -> dict:
        return {"r0": fmt_rational(self.r0), "r1": fmt_rational(self.r1)}

    @classmethod
    def from_json(cls, data: dict) -> QF3Value:
        return cls(parse_rational(data["r0"]), parse_rational(data["r1"]))

    def __repr__(self) -> str:
        return f"QF3({self.r0}{'+' if self.r1 >= 0 else '-'}{abs(self.r1)}√3)"


def qf3(r0: RationalLike = 0, r1: RationalLike = 0) -> QF3Value:
    return QF3Value(Q(r0), Q(r1))


def qf3_compare(a: QF3Value, b: QF3Value) -> Order:
    (fa, ea), (fb, eb) = a.fixed(), b.fixed()
    if fa - fb > ea + eb:
        return Order.GT
    if fb - fa > ea + eb:
        return Order.LT
    return Order(_sign_a_plus_b_sqrt3(a.r0 - b.r0, a.r1 - b.r1))


def qf3_conjugate(v: QF3Value) -> QF3Value:
    return QF3Value(v.r0, -v.r1)


@total_ordering
@dataclass(frozen=True)
class Cut:
    """The irrational number q + sqrt2; never an element of X."""

    q: Rational

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", Q(self.q))

    def __lt__(self, other: object) -> bool:
        if isinstance(other, Cut):
            return self.q < other.q
        if isinstance(other, QF3Value):
            return cut_compare_qf3(self, other) is Order.LT
        return NotImplemented

    def as_quadsum(self) -> QuadSum:
        return QuadSum(self.q, Rational(1))

    def to_json(self) -> dict:
        return {"q": fmt_rational(self.q)}

    @classmethod
    def from_json(cls, data: dict) -> Cut:
        return cls(parse_rational(data["q"]))


def cut_compare_qf3(c: Cut, v: QF3Value) -> Order:
    """Strict order of q+sqrt2 against r0+r1*sqrt3 (never EQ)."""
    s = sign_quadsum(QuadSum(c.q - v.r0, Rational(1), -v.r1, Rational(0)))
    return Order(s)


def value_minus_cut(v: QF3Value, q: Rational) -> QuadSum:
    """v - (q + sqrt2)."""
    return QuadSum(v.r0 - q, Rational(-1), v.r1, Rational(0))


def below_cut(v: QF3Value, q: Rational) -> bool:
    """v < q + sqrt2."""
    fv, ev = v.fixed()
    fc = (q.numerator << _FIX) // q.denominator + _S2_FIX
    if fv < fc - ev - 2:
        return True
    if fv > fc + ev + 2:
        return False
    # never zero: sqrt2 is not in Q + sqrt3 Q
    return _sign_terms(((v.r0, None), (-q, None), (v.r1, _SQRT3), (Rational(-1), _SQRT2))) < 0
