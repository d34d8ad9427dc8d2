
import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bingspace.exact import QF3Value, Rational
from bingspace.topology import (BasicNbhd, Point, affine_map, affine_nbhd, closure_hits,
                                example1_audit, example1_family, integer_window,
                                nbhd_closure_contains, nbhd_contains, point,
                                point_from_projections, ritter_regular_nbhd_contains,
                                theta_discrete_finite, theta_radius_at)

from conftest import SQ3, mpf, points, rationals


def proj(z):
    return mpf(z.x) - SQ3 * mpf(z.y), mpf(z.x) + SQ3 * mpf(z.y)


def test_point_basics():
    z = point("1/2", "3/4")
    assert not z.is_base and point(2).is_base
    assert z.minus == QF3Value(Rational(1, 2), Rational(-3, 4))
    assert z.plus == QF3Value(Rational(1, 2), Rational(3, 4))
    assert z.height == 4
    assert Point.parse("1/2;3/4") == z and str(z) == "1/2;3/4"
    assert Point.from_json(z.to_json()) == z
    with pytest.raises(ValueError):
        point(0, -1)
    with pytest.raises(ValueError):
        Point.parse("1/2")


@given(points())
def test_projection_reconstruction(z):
    assert point_from_projections(z.minus, z.plus) == z
    lo, hi = proj(z)
    assert abs(mpf(z.minus.r0) + mpf(z.minus.r1) * SQ3 - lo) < mpmath.mpf(10) ** -50
    assert abs(mpf(z.plus.r0) + mpf(z.plus.r1) * SQ3 - hi) < mpmath.mpf(10) ** -50


def test_point_from_non_conjugate_pair():
    assert point_from_projections(QF3Value(0, 0), QF3Value(1, 0)) is None
    with pytest.raises(ValueError):
        point_from_projections(QF3Value(1, 0), QF3Value(0, 0))


def oracle_within(v, c, eps, strict):
    d = abs(v - c)
    return d < eps if strict else d <= eps


@given(points(), points(), st.builds(Rational, st.integers(1, 20), st.integers(1, 8)))
def test_membership_predicates_match_oracle(z, w, eps):
    e = mpf(eps)
    zc = proj(z)
    wp = proj(w)
    N = BasicNbhd(z, eps)
    # random data stays far from exact ties except rational ones, which are exact
    in_n = w == z or (w.is_base and any(oracle_within(wp[0], c, e, True) for c in zc))
    in_cl = w == z or any(oracle_within(p, c, e, False) for p in wp for c in zc)
    in_ritter = w == z or all(any(oracle_within(p, c, e, True) for c in zc) for p in wp)
    tie = any(abs(abs(p - c) - e) < mpmath.mpf(10) ** -40 for p in wp for c in zc)
    if not tie:
        assert nbhd_contains(N, w) == in_n
        assert nbhd_closure_contains(N, w) == in_cl
        assert ritter_regular_nbhd_contains(N, w) == in_ritter


def test_membership_examples():
    N = BasicNbhd(point(0, 1), Rational(1, 2))
    assert nbhd_contains(N, point(0, 1))
    assert not nbhd_contains(N, point(0, 2))
    # sqrt3 - 1/2 < 1.3 < sqrt3 + 1/2
    assert nbhd_contains(N, point("13/10"))
    assert not nbhd_contains(N, point(0))
    # closure: boundary counts
    M = BasicNbhd(point(0), Rational(1))
    assert nbhd_closure_contains(M, point(1))
    assert not nbhd_contains(M, point(1))
    assert not nbhd_closure_contains(M, point(5, 1))
    # the gap to (-1, 0) equals the radius exactly
    assert nbhd_closure_contains(M, point(-1))


def test_radius_must_be_positive():
    with pytest.raises(ValueError):
        BasicNbhd(point(0), Rational(0))


@given(points(), points(), st.builds(Rational, st.integers(1, 9), st.integers(1, 9)),
       rationals(), st.builds(Rational, st.integers(1, 9), st.integers(1, 5)))
def test_affine_invariance(z, w, a, b, eps):
    N = BasicNbhd(z, eps)
    M = affine_nbhd(a, b, N)
    w2 = affine_map(a, b, w)
    assert M.radius == a * eps
    assert nbhd_contains(N, w) == nbhd_contains(M, w2)
    assert nbhd_closure_contains(N, w) == nbhd_closure_contains(M, w2)
    assert ritter_regular_nbhd_contains(N, w) == ritter_regular_nbhd_contains(M, w2)


def test_affine_scale_must_be_positive():
    with pytest.raises(ValueError):
        affine_map(0, 1, point(0))


def test_example1_audit_values():
    assert example1_audit(Rational(1, 2)) == 4
    assert example1_audit(2) == 1
    assert example1_audit(1) == 2
    for t in range(0, 11):
        eps = Rational(1, 2 ** t)
        K = example1_audit(eps)
        assert 3 <= eps * eps * K * K
        assert K == 1 or 3 > eps * eps * (K - 1) ** 2
    assert example1_family(3) == point(0, Rational(1, 3))


def test_example1_family_is_not_theta_discrete_at_origin():
    fam = [example1_family(k) for k in range(1, 65)]
    for t in range(0, 5):
        eps = Rational(1, 2 ** t)
        hits = closure_hits(BasicNbhd(point(0), eps), fam)
        assert len(hits) >= 2


def test_integer_window_theta_witness():
    window = integer_window(-5, 5)
    wit = theta_discrete_finite(window)
    assert wit.theta_discrete
    assert wit.min_gap == QF3Value(1)
    assert wit.radius == Rational(1, 3)
    for z in window:
        assert closure_hits(BasicNbhd(z, wit.radius), window) == [z]
    assert theta_radius_at(window, point(0)) == Rational(1, 3)


def test_theta_witness_with_irrational_gap():
    D = [point(0), point(0, 1)]
    wit = theta_discrete_finite(D)
    assert wit.min_gap == QF3Value(0, 1)
    # dyadic radius below sqrt3/3
    assert wit.radius == Rational(1, 2)
    assert closure_hits(BasicNbhd(point(0), wit.radius), D) == [point(0)]
