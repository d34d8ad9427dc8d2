import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given

from bingspace.covers import (Cell, CellBijection, CutInterval, DiamondCell, LazyPartition,
                              admissible_cover, check_admissible, convex_refine,
                              diamond_contains, diamond_of, enumerate_x, interval_cell,
                              lattice_partition, separator)
from bingspace.exact import QF3Value, Rational
from bingspace.topology import Point, point

from conftest import SQ2, SQ3, mpf, random_point, rationals


def xval(v: QF3Value):
    return mpf(v.r0) + mpf(v.r1) * SQ3


def brute_separator(m1, m2):
    lo, hi = xval(m1) - SQ2, xval(m2) - SQ2
    for d in range(0, 80):
        g = mpmath.mpf(2) ** -d
        k = int(mpmath.floor(lo / g)) + 1
        if k * g < hi:
            return Fraction(k, 2 ** d)
    raise AssertionError


@given(rationals(20, 9), rationals(5, 5), rationals(20, 9), rationals(5, 5))
def test_separator_least_denominator(a0, a1, b0, b1):
    m1, m2 = QF3Value(a0, a1), QF3Value(b0, b1)
    assume(m1 != m2)
    if xval(m1) > xval(m2):
        m1, m2 = m2, m1
    q = separator(m1, m2)
    assert Fraction(int(q.numerator), int(q.denominator)) == brute_separator(m1, m2)


def test_separator_rejects_bad_order():
    with pytest.raises(ValueError):
        separator(QF3Value(1), QF3Value(0))


def test_cut_interval_and_cell_json():
    iv = CutInterval(Rational(0), Rational(1, 2))
    assert iv.contains(QF3Value(Rational(3, 2)))          # 1.5 in (1.414, 1.914)
    assert not iv.contains(QF3Value(Rational(1)))
    with pytest.raises(ValueError):
        CutInterval(Rational(1), Rational(1))
    c = Cell((iv, CutInterval(Rational(2), Rational(3))))
    assert c.is_double and Cell.from_json(c.to_json()) == c
    bad = c.to_json()
    bad["id"] = "0,1"
    with pytest.raises(ValueError):
        Cell.from_json(bad)
    with pytest.raises(ValueError):
        Cell((CutInterval(Rational(2), Rational(3)), iv))


def random_sets(r, size):
    pts = set()
    while len(pts) < size:
        pts.add(random_point(r, 8, r.random() < 0.5))
    pts = sorted(pts, key=Point.key)
    return pts[: size // 2], pts[size // 2:]


def test_partition_is_admissible_on_random_sets():
    r = random.Random(7)
    for trial in range(40):
        A, B = random_sets(r, r.randint(1, 8))
        merged = [z for z in A if not z.is_base][:1]
        eps = Rational(1, 2 ** r.randint(0, 5))
        window = [QF3Value(Rational(r.randint(-80, 80), 8), Rational(r.randint(-8, 8), 4))
                  for _ in range(20)]
        P = admissible_cover(A, B, merged, eps)
        rep = check_admissible(P, A, B, merged, eps, window=window)
        assert rep.ok, rep.failures()
        for z in merged:
            c = P.cell_of(z.minus)
            assert c.is_double and c == P.cell_of(z.plus)
        # each marked cell holds exactly its marks; cells are small
        for v in window:
            c = P.cell_of(v)
            assert c.contains(v)
            assert all(p.width < eps for p in c.parts)


def test_chained_refinement_with_ladder():
    r = random.Random(11)
    for trial in range(10):
        A, B = random_sets(r, 6)
        merged = [z for z in A if not z.is_base][:1]
        prev = admissible_cover(A, B, merged, 1)
        for k in range(1, 6):
            more = [random_point(r, 8, True) for _ in range(2)]
            A2 = list(dict.fromkeys(A + more))
            P = admissible_cover(A2, B, merged, Rational(1, 2 ** k), prev)
            rep = check_admissible(P, A2, B, merged, Rational(1, 2 ** k), prev)
            assert rep.ok, rep.failures()
            for c in P.materialized():
                assert c.within(P.parent_of[c])
            prev, A = P, A2


def test_checker_detects_broken_cover():
    A = [point(0), point("1/10")]
    P = LazyPartition(1)          # knows no marks, so both points share a cell
    rep = check_admissible(P, A, [], [], 1)
    assert not rep["3"].ok
    z = point(0, 1)
    P2 = LazyPartition(1, [z])
    rep2 = check_admissible(P2, [z], [], [z], 1)
    assert not rep2["2"].ok


def test_lattice_partition_cells():
    P = lattice_partition(Rational(1, 4))
    c = P.cell_of(QF3Value(Rational(3, 2)))
    assert c == interval_cell(0, Rational(1, 4))
    kids = [P.child(None, i) for i in range(5)]
    assert kids[0] == interval_cell(0, Rational(1, 4))
    assert kids[1] == interval_cell(Rational(-1, 4), 0)
    with pytest.raises(ValueError):
        LazyPartition(0)


def test_enumerate_x_order_and_uniqueness():
    vals = enumerate_x(300)
    assert len(set(vals)) == 300
    hts = [max(abs(v.r0.numerator), v.r0.denominator, abs(v.r1.numerator), v.r1.denominator)
           for v in vals]
    assert hts == sorted(hts)
    assert vals[:3] == [QF3Value(-1, -1), QF3Value(-1, 0), QF3Value(-1, 1)]


def test_convex_refine_properties():
    r = random.Random(3)
    vals = enumerate_x(200)
    for trial in range(20):
        allowed = []
        for v in vals:
            w = Rational(1, r.randint(1, 16))
            allowed.append((v - QF3Value(w), v + QF3Value(w)))
        out = convex_refine(vals, allowed)
        ivs = sorted(out)
        for a, b in zip(ivs, ivs[1:]):
            assert a.hi <= b.lo
        for i, v in enumerate(vals):
            hits = [iv for iv in out if iv.contains(v)]
            assert len(hits) == 1
        # each chosen interval sits inside the allowed interval of its first value
        for iv in out:
            first = next(i for i, v in enumerate(vals) if iv.contains(v))
            lo, hi = allowed[first]
            assert xval(lo) <= mpf(iv.lo) + SQ2 and mpf(iv.hi) + SQ2 <= xval(hi)


def test_convex_refine_rejects_bad_cover():
    with pytest.raises(ValueError):
        convex_refine([QF3Value(0)], [(QF3Value(1), QF3Value(2))])


def test_diamond_membership():
    P = LazyPartition(1, [point(0, 1)])
    z = point(0, 1)
    D = diamond_of(P, z)
    assert diamond_contains(D, z)
    base = DiamondCell.of(P.cell_of(QF3Value(0)), P.cell_of(QF3Value(0)))
    assert diamond_contains(base, point(0))
    assert not diamond_contains(base, z)


def test_cell_bijection_inverse_and_overrides():
    P = lattice_partition(Rational(1, 2))
    a, b = P.child(None, 0), P.child(None, 3)
    phi = CellBijection(P, {a: b})
    assert phi(a) == b and phi.inverse(b) == a
    for i in range(30):
        c = P.child(None, i)
        assert phi.inverse(phi(c)) == c
        assert phi(phi.inverse(c)) == c
    assert len({phi(P.child(None, i)) for i in range(30)}) == 30
    with pytest.raises(ValueError):
        CellBijection(P, {a: b, P.child(None, 1): b})
