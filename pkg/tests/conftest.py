import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import strategies as st

from bingspace.exact import Rational
from bingspace.topology import Point

mpmath.mp.dps = 80


def mpf(r) -> mpmath.mpf:
    r = Fraction(int(r.numerator), int(r.denominator))
    return mpmath.mpf(r.numerator) / r.denominator


SQ2, SQ3, SQ6 = mpmath.sqrt(2), mpmath.sqrt(3), mpmath.sqrt(6)


def rationals(max_num: int = 50, max_den: int = 20):
    return st.builds(lambda p, q: Rational(p, q),
                     st.integers(-max_num, max_num), st.integers(1, max_den))


def nonneg_rationals(max_num: int = 50, max_den: int = 20):
    return st.builds(lambda p, q: Rational(p, q),
                     st.integers(0, max_num), st.integers(1, max_den))


def points(max_num: int = 20, max_den: int = 8):
    return st.builds(Point, rationals(max_num, max_den), nonneg_rationals(max_num, max_den))


def random_rational(rng: random.Random, h: int) -> Rational:
    return Rational(rng.randint(-h, h), rng.randint(1, h))


def random_point(rng: random.Random, h: int, base: bool) -> Point:
    y = Rational(0) if base else Rational(rng.randint(1, h), rng.randint(1, h))
    return Point(random_rational(rng, h), y)


def random_bijection(rng: random.Random, size: int, h: int = 8,
                     force_mixed: bool = False) -> list[tuple[Point, Point]]:
    """Random finite bijection; ``force_mixed`` adds one base->non-base and one
    non-base->base pair."""
    pairs: list[tuple[Point, Point]] = []
    used_a: set[Point] = set()
    used_b: set[Point] = set()
    kinds = []
    if force_mixed:
        kinds = [(False, True), (True, False)]
    while len(kinds) < size:
        kinds.append((rng.random() < 0.5, rng.random() < 0.5))
    for a_base, b_base in kinds:
        while True:
            a = random_point(rng, h, a_base)
            b = random_point(rng, h, b_base)
            if a not in used_a and b not in used_b:
                break
        used_a.add(a)
        used_b.add(b)
        pairs.append((a, b))
    return pairs


@pytest.fixture
def rng():
    return random.Random(20240917)


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(name: str, ok: bool, elapsed: float, budget: float, detail: str = "") -> None:
    """Print one PASS/FAIL line and keep it for the terminal summary."""
    passed = ok and elapsed < budget
    line = f"{'PASS' if passed else 'FAIL'} {name} ({elapsed:.2f}s, budget {budget:g}s){' ' + detail if detail else ''}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
