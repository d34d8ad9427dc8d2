"""Points of the Bing space, their projections and basic neighbourhoods.

A point z = (x, y) with y >= 0 projects to z- = x - sqrt3*y and
z+ = x + sqrt3*y on the base line.  The basic neighbourhood N(z, eps) is z
together with the base points lying within eps of z- or z+.
"""
from __future__ import annotations

from dataclasses import dataclass

from math import isqrt
from typing import Iterable, Optional

from .exact import (Rational, QF3Value, Q, RationalLike, fmt_rational, parse_rational,
                    qf3_compare, Order)
from .rationals import height as rational_height


@dataclass(frozen=True, order=False)
class Point:
    x: Rational
    y: Rational

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", Q(self.x))
        object.__setattr__(self, "y", Q(self.y))
        if self.y < 0:
            raise ValueError(f"point below the base line: y={self.y}")

    @property
    def is_base(self) -> bool:
        return self.y == 0

    @property
    def minus(self) -> QF3Value:
        return QF3Value(self.x, -self.y)

    @property
    def plus(self) -> QF3Value:
        return QF3Value(self.x, self.y)

    def projections(self) -> tuple[QF3Value, QF3Value]:
        return self.minus, self.plus

    @property
    def height(self) -> int:
        return max(rational_height(self.x), rational_height(self.y))

    def key(self) -> tuple[int, Rational, Rational]:
        """Sort key of the height-lexicographic well-order."""
        return self.height, self.x, self.y

    def to_json(self) -> dict:
        return {"x": fmt_rational(self.x), "y": fmt_rational(self.y)}

    @classmethod
    def from_json(cls, data: dict) -> Point:
        return cls(parse_rational(data["x"]), parse_rational(data["y"]))

    @classmethod
    def parse(cls, text: str) -> Point:
        """Parse the command-line form ``"x;y"``."""
        parts = text.split(";")
        if len(parts) != 2:
            raise ValueError(f"expected 'x;y', got {text!r}")
        return cls(parse_rational(parts[0]), parse_rational(parts[1]))

    def __str__(self) -> str:
        return f"{fmt_rational(self.x)};{fmt_rational(self.y)}"

    def __repr__(self) -> str:
        return f"Point({self.x}, {self.y})"


def point(x: RationalLike, y: RationalLike = 0) -> Point:
    return Point(Q(x), Q(y))


def proj_minus(z: Point) -> QF3Value:
    return z.minus


def proj_plus(z: Point) -> QF3Value:
    return z.plus


def point_from_projections(s: QF3Value, t: QF3Value) -> Optional[Point]:
    """The point whose projections are (s, t), or None if there is none."""
    if qf3_compare(s, t) is Order.GT:
        raise ValueError("projections out of order: s > t")
    if s.r0 != t.r0 or s.r1 != -t.r1:
        return None
    return Point(s.r0, t.r1)


@dataclass(frozen=True)
class BasicNbhd:
    center: Point
    radius: Rational

    def __post_init__(self) -> None:
        object.__setattr__(self, "radius", Q(self.radius))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def to_json(self) -> dict:
        return {"center": self.center.to_json(), "radius": fmt_rational(self.radius)}

    @classmethod
    def from_json(cls, data: dict) -> BasicNbhd:
        return cls(Point.from_json(data["center"]), parse_rational(data["radius"]))


def _within(v: QF3Value, c: QF3Value, eps: Rational, strict: bool) -> bool:
    d = abs(v - c)
    order = qf3_compare(d, QF3Value(eps))
    return order is Order.LT or (not strict and order is Order.EQ)


def nbhd_contains(N: BasicNbhd, w: Point) -> bool:
    if w == N.center:
        return True
    if not w.is_base:
        return False
    v = w.minus
    return any(_within(v, c, N.radius, strict=True) for c in N.center.projections())


def nbhd_closure_contains(N: BasicNbhd, b: Point) -> bool:
    if b == N.center:
        return True
    return any(_within(p, c, N.radius, strict=False)
               for c in N.center.projections() for p in b.projections())


def ritter_regular_nbhd_contains(N: BasicNbhd, b: Point) -> bool:
    """Membership of b in the interior of the closure of N."""
    if b == N.center:
        return True
    centers = N.center.projections()
    return all(any(_within(p, c, N.radius, strict=True) for c in centers)
               for p in b.projections())


def affine_map(a: RationalLike, b: RationalLike, z: Point) -> Point:
    a, b = Q(a), Q(b)
    if a <= 0:
        raise ValueError("affine scale must be positive")
    return Point(a * z.x + b, a * z.y)


def affine_nbhd(a: RationalLike, b: RationalLike, N: BasicNbhd) -> BasicNbhd:
    return BasicNbhd(affine_map(a, b, N.center), Q(a) * N.radius)


@dataclass(frozen=True)
class ThetaWitness:
    theta_discrete: bool
    min_gap: Optional[QF3Value]   # least distance between projections of distinct points
    radius: Optional[Rational]    # rational radius <= min_gap/3


def _dyadic_below(v: QF3Value) -> Rational:
    # largest 2^-k (k >= 0) not exceeding the positive value v, or v if rational
    if v.is_rational():
        return v.r0
    r = Rational(1)
    while qf3_compare(QF3Value(r), v) is Order.GT:
        r /= 2
    if r == 1:
        while qf3_compare(QF3Value(2 * r), v) is not Order.GT:
            r *= 2
    return r


def theta_discrete_finite(D: Iterable[Point]) -> ThetaWitness:
    """Finite sets are theta-discrete; return the separation witness."""
    pts = list(dict.fromkeys(D))
    gap: Optional[QF3Value] = None
    for i, z in enumerate(pts):
        for w in pts[i + 1:]:
            for p in z.projections():
                for c in w.projections():
                    d = abs(p - c)
                    if gap is None or qf3_compare(d, gap) is Order.LT:
                        gap = d
    if gap is None:
        return ThetaWitness(True, None, None)
    return ThetaWitness(True, gap, _dyadic_below(gap.scale(Rational(1, 3))))


def closure_hits(N: BasicNbhd, D: Iterable[Point]) -> list[Point]:
    return [d for d in D if nbhd_closure_contains(N, d)]


def theta_radius_at(D: Iterable[Point], x: Point) -> Rational:
    """A radius r such that the closure of N(x, r) meets D in at most one point."""
    pts = list(D)
    r = theta_discrete_finite(pts).radius or Rational(1)
    while len(closure_hits(BasicNbhd(x, r), pts)) > 1:
        r /= 2
    return r


def example1_family(k: int) -> Point:
    if k < 1:
        raise ValueError("k must be >= 1")
    return Point(Rational(0), Rational(1, k))


def example1_audit(eps: RationalLike) -> int:
    """Least K with sqrt3/K <= eps, i.e. 3 <= eps^2 K^2."""
    eps = Q(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    t = 3 / (eps * eps)
    k = isqrt(t.numerator // t.denominator)
    while k < 1 or k * k * t.denominator < t.numerator:
        k += 1
    return k


def integer_window(lo: int, hi: int) -> list[Point]:
    return [Point(Rational(n), Rational(0)) for n in range(lo, hi + 1)]
