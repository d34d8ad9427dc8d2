"""Disjoint clopen covers of X = Q + sqrt(3)Q by cells with cut endpoints.

Every endpoint is a cut q + sqrt2 and is stored by its rational offset q, so
comparing endpoints is rational arithmetic and only membership of an element
of X needs an algebraic sign.

A :class:`LazyPartition` is a rule plus caches.  Without a parent it is the
lattice of width ``mu`` split around marked values; with a parent, each part
of each parent cell is cut into a geometric ladder accumulating at its right
end, so every parent cell owns infinitely many children.  Marked values are
then separated so that no cell holds two of them, and the two projections of
each merged point are glued into one two-part cell.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from functools import cmp_to_key
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .exact import (_SQRT2, Rational, Cut, Order, QF3Value, QuadSum, Q, RationalLike, below_cut,
                    fmt_rational, parse_rational, qf3_compare, value_minus_cut)
from .topology import Point

SQRT2 = QuadSum(Rational(0), Rational(1))


@dataclass(frozen=True, order=True)
class CutInterval:
    """{t in X : lo + sqrt2 < t < hi + sqrt2}, stored by the offsets lo < hi."""

    lo: Rational
    hi: Rational

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"empty cut interval ({self.lo}, {self.hi})")
        object.__setattr__(self, "_hash", hash((self.lo, self.hi)))

    def __hash__(self) -> int:
        return self._hash

    @property
    def width(self) -> Rational:
        return self.hi - self.lo

    def contains(self, v: QF3Value) -> bool:
        return not below_cut(v, self.lo) and below_cut(v, self.hi)

    def within(self, other: CutInterval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def meets(self, other: CutInterval) -> bool:
        return self.lo < other.hi and other.lo < self.hi

    def to_json(self) -> dict:
        return {"lo": fmt_rational(self.lo), "hi": fmt_rational(self.hi)}

    @classmethod
    def from_json(cls, data: dict) -> CutInterval:
        return cls(parse_rational(data["lo"]), parse_rational(data["hi"]))

    @property
    def cuts(self) -> tuple[Cut, Cut]:
        return Cut(self.lo), Cut(self.hi)


@dataclass(frozen=True, order=True)
class Cell:
    """One order-convex part, or two disjoint parts for a merged cell."""

    parts: tuple[CutInterval, ...]

    def __post_init__(self) -> None:
        if len(self.parts) not in (1, 2):
            raise ValueError("a cell has one or two parts")
        if len(self.parts) == 2 and self.parts[0].hi > self.parts[1].lo:
            raise ValueError("parts must be disjoint and sorted")
        object.__setattr__(self, "_hash", hash(self.parts))

    def __hash__(self) -> int:
        return self._hash

    @property
    def is_double(self) -> bool:
        return len(self.parts) == 2

    def contains(self, v: QF3Value) -> bool:
        return any(p.contains(v) for p in self.parts)

    def part_containing(self, v: QF3Value) -> Optional[CutInterval]:
        for p in self.parts:
            if p.contains(v):
                return p
        return None

    def within(self, other: Cell) -> bool:
        return all(any(p.within(o) for o in other.parts) for p in self.parts)

    def meets(self, other: Cell) -> bool:
        return any(p.meets(o) for p in self.parts for o in other.parts)

    @property
    def diameter(self) -> Rational:
        """Diameter for convex cells; for a double cell, the largest part width."""
        return max(p.width for p in self.parts)

    @property
    def id(self) -> str:
        return "|".join(f"{fmt_rational(p.lo)},{fmt_rational(p.hi)}" for p in self.parts)

    def to_json(self) -> dict:
        return {"id": self.id, "parts": [p.to_json() for p in self.parts]}

    @classmethod
    def from_json(cls, data: dict) -> Cell:
        cell = cls(tuple(CutInterval.from_json(p) for p in data["parts"]))
        if "id" in data and data["id"] != cell.id:
            raise ValueError(f"cell id {data['id']!r} does not match its parts")
        return cell

    def __repr__(self) -> str:
        return f"Cell({self.id})"


def interval_cell(lo: RationalLike, hi: RationalLike) -> Cell:
    return Cell((CutInterval(Q(lo), Q(hi)),))


_qf3_key = cmp_to_key(lambda a, b: int(qf3_compare(a, b)))


def _zigzag() -> Iterator[int]:
    yield 0
    for k in itertools.count(1):
        yield -k
        yield k


def separator(m1: QF3Value, m2: QF3Value) -> Rational:
    """Dyadic offset q of least denominator (then leftmost) with m1 < q+sqrt2 < m2."""
    if qf3_compare(m1, m2) is not Order.LT:
        raise ValueError("separator needs m1 < m2")
    d = 0
    while True:
        g = Rational(1, 1 << d)
        # smallest multiple of g strictly above m1 - sqrt2 (never equal: irrational)
        k = value_minus_cut(m1, Rational(0)).scale(1 / g).floor() + 1
        q = k * g
        if below_cut(m2, q) is False:
            return q
        d += 1


class LazyPartition:
    """A disjoint clopen cover of X, materialised on demand.

    ``marks`` are the projection values of ``A`` and ``B``; ``merged`` points
    get one two-part cell holding both of their projections.
    """

    def __init__(self, eps: RationalLike, A: Iterable[Point] = (), B: Iterable[Point] = (),
                 merged: Iterable[Point] = (), parent: Optional[LazyPartition] = None,
                 lattice: Optional[RationalLike] = None):
        self.eps = Q(eps)
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        self.parent = parent
        self.mu = Q(lattice) if lattice is not None else self.eps / 2
        if self.mu <= 0:
            raise ValueError("lattice width must be positive")
        self.A = tuple(dict.fromkeys(A))
        self.B = tuple(dict.fromkeys(B))
        self.merged = tuple(dict.fromkeys(merged))
        values = {v for z in (*self.A, *self.B) for v in z.projections()}
        for z in self.merged:
            if z.is_base:
                raise ValueError(f"merged point {z} lies on the base line")
            values.update(z.projections())
        self.marks: list[QF3Value] = sorted(values, key=_qf3_key)
        self._partner: dict[QF3Value, QF3Value] = {}
        for z in self.merged:
            self._partner[z.minus] = z.plus
            self._partner[z.plus] = z.minus
        self._pieces: dict[CutInterval, list[CutInterval]] = {}
        self._cell_of: dict[QF3Value, Cell] = {}
        self.parent_of: dict[Cell, Optional[Cell]] = {}
        self._children: dict[Optional[Cell], tuple[list[Cell], Iterator[Cell]]] = {}

    # -- atomic pieces ---------------------------------------------------
    def _marks_in(self, iv: CutInterval, pool: Optional[list[QF3Value]] = None) -> list[QF3Value]:
        marks = self.marks if pool is None else pool
        lo = _first_not_below(marks, iv.lo)
        hi = _first_not_below(marks, iv.hi)
        return marks[lo:hi]

    def pieces(self, iv: CutInterval, pool: Optional[list[QF3Value]] = None) -> list[CutInterval]:
        """Split a base interval so that each piece holds at most one mark.

        ``pool`` may name a sorted superset of the marks inside ``iv``.
        """
        cached = self._pieces.get(iv)
        if cached is None:
            inside = self._marks_in(iv, pool)
            seps = [separator(a, b) for a, b in zip(inside, inside[1:])]
            edges = [iv.lo, *seps, iv.hi]
            cached = [CutInterval(a, b) for a, b in zip(edges, edges[1:])]
            self._pieces[iv] = cached
        return cached

    def _uniform(self, iv: CutInterval) -> list[CutInterval]:
        m = 1
        while iv.width / m >= self.eps:
            m *= 2
        if m == 1:
            return [iv]
        step = iv.width / m
        return [CutInterval(iv.lo + i * step, iv.lo + (i + 1) * step) for i in range(m)]

    @staticmethod
    def ladder_rung(part: CutInterval, j: int) -> CutInterval:
        w = part.width
        return CutInterval(part.hi - w / (1 << j), part.hi - w / (1 << (j + 1)))

    def _base_interval(self, v: QF3Value, part: Optional[CutInterval]) -> CutInterval:
        if part is None:
            k = value_minus_cut(v, Rational(0)).scale(1 / self.mu).floor()
            return CutInterval(k * self.mu, (k + 1) * self.mu)
        j = 0
        w = part.width
        while not below_cut(v, part.hi - w / (1 << (j + 1))):
            j += 1
        rung = self.ladder_rung(part, j)
        for sub in self._uniform(rung):
            if below_cut(v, sub.hi):
                return sub
        raise AssertionError("value escaped its ladder rung")

    def _piece_of(self, v: QF3Value, part: Optional[CutInterval]) -> CutInterval:
        for piece in self.pieces(self._base_interval(v, part)):
            if below_cut(v, piece.hi):
                return piece
        raise AssertionError("value escaped its base interval")

    def _parent_part(self, v: QF3Value) -> tuple[Optional[Cell], Optional[CutInterval]]:
        if self.parent is None:
            return None, None
        P = self.parent.cell_of(v)
        part = P.part_containing(v)
        assert part is not None
        return P, part

    def _cell_from_piece(self, piece: CutInterval, P: Optional[Cell],
                         pool: Optional[list[QF3Value]] = None) -> Cell:
        marks = self._marks_in(piece, pool)
        if marks and marks[0] in self._partner:
            other_v = self._partner[marks[0]]
            P2, part2 = self._parent_part(other_v)
            if P2 != P:
                raise AssertionError(
                    f"merged projections {marks[0]} and {other_v} lie in different parent cells")
            other = self._piece_of(other_v, part2)
            cell = Cell(tuple(sorted((piece, other))))
        else:
            cell = Cell((piece,))
        self.parent_of.setdefault(cell, P)
        return cell

    # -- public queries ----------------------------------------------------
    def cell_of(self, v: QF3Value) -> Cell:
        """The unique cell containing v."""
        cell = self._cell_of.get(v)
        if cell is None:
            P, part = self._parent_part(v)
            cell = self._cell_from_piece(self._piece_of(v, part), P)
            self._cell_of[v] = cell
        return cell

    def _child_stream(self, P: Optional[Cell]) -> Iterator[Cell]:
        seen: set[Cell] = set()
        pool: Optional[list[QF3Value]] = None
        if P is None:
            if self.parent is not None:
                raise ValueError("a refining partition has no root children")
            bases: Iterator[CutInterval] = (CutInterval(k * self.mu, (k + 1) * self.mu)
                                            for k in _zigzag())
        else:
            pool = [m for part in P.parts for m in self._marks_in(part)]
            bases = (sub for j in itertools.count() for part in P.parts
                     for sub in self._uniform(self.ladder_rung(part, j)))
        for base in bases:
            for piece in self.pieces(base, pool):
                cell = self._cell_from_piece(piece, P, pool)
                if cell not in seen:
                    seen.add(cell)
                    yield cell

    def child(self, P: Optional[Cell], index: int) -> Cell:
        """The index-th child of P in canonical order (P=None: the root lattice)."""
        entry = self._children.get(P)
        if entry is None:
            entry = self._children[P] = ([], self._child_stream(P))
        got, stream = entry
        if index < len(got):
            return got[index]
        while len(got) <= index:
            got.append(next(stream))
        return got[index]

    def children(self, P: Optional[Cell]) -> Iterator[Cell]:
        for i in itertools.count():
            yield self.child(P, i)

    def materialized(self) -> list[Cell]:
        """Cells built so far, in order of construction."""
        return list(self.parent_of)

    def marked_cells(self) -> list[Cell]:
        return sorted({self.cell_of(v) for v in self.marks})

    def describe(self) -> dict:
        return {
            "eps": fmt_rational(self.eps),
            "lattice": fmt_rational(self.mu) if self.parent is None else None,
            "ladder": None if self.parent is None else "rungs hi-(hi-lo)/2^j, j>=0, per parent part",
            "cells": [c.to_json() for c in self.marked_cells()],
        }


def _first_not_below_cuts(los: list[Rational], v: QF3Value) -> int:
    # index of the first cut q + sqrt2 with q in ``los`` (ascending) above v
    lo, hi = 0, len(los)
    while lo < hi:
        mid = (lo + hi) // 2
        if below_cut(v, los[mid]):
            hi = mid
        else:
            lo = mid + 1
    return lo


def _first_not_below(marks: list[QF3Value], q: Rational) -> int:
    # index of the first mark > q + sqrt2 (marks sorted ascending)
    lo, hi = 0, len(marks)
    while lo < hi:
        mid = (lo + hi) // 2
        if below_cut(marks[mid], q):
            lo = mid + 1
        else:
            hi = mid
    return lo


# --- refining an open cover by disjoint order-convex intervals -------------

def _ceil_offset(bound: QF3Value | Cut, g: Rational) -> Rational:
    # least multiple of g with q + sqrt2 >= bound
    if isinstance(bound, Cut):
        t = bound.q / g
        return -((-t.numerator) // t.denominator) * g
    return -(value_minus_cut(bound, Rational(0)).scale(-1 / g).floor()) * g


def _floor_offset(bound: QF3Value | Cut, g: Rational) -> Rational:
    # greatest multiple of g with q + sqrt2 <= bound
    if isinstance(bound, Cut):
        t = bound.q / g
        return (t.numerator // t.denominator) * g
    return value_minus_cut(bound, Rational(0)).scale(1 / g).floor() * g


def convex_refine(values: Sequence[QF3Value], allowed: Sequence[tuple[QF3Value, QF3Value]],
                  count: Optional[int] = None) -> list[CutInterval]:
    """Greedy disjoint refinement of an open cover of the enumerated values.

    ``allowed[i]`` is an open interval (lo, hi) of X containing ``values[i]``.
    Step k takes the least index n_k not yet covered and chooses the widest
    interval with dyadic cut endpoints of least denominator that contains
    values[n_k], fits inside allowed[n_k] and avoids the earlier intervals.
    Stops after ``count`` intervals or when every value is covered.
    """
    if len(values) != len(allowed):
        raise ValueError("one allowed interval per value")
    for v, (lo, hi) in zip(values, allowed):
        if not (qf3_compare(lo, v) is Order.LT and qf3_compare(v, hi) is Order.LT):
            raise ValueError(f"value {v} lies outside its allowed interval")
    chosen: list[CutInterval] = []   # sorted by lo; pairwise disjoint
    out: list[CutInterval] = []
    cursor = 0
    while count is None or len(out) < count:
        while cursor < len(values) and _locate(chosen, values[cursor])[1]:
            cursor += 1
        if cursor == len(values):
            break
        v = values[cursor]
        lo_v, hi_v = allowed[cursor]
        idx, _ = _locate(chosen, v)
        left: list[QF3Value | Cut] = [lo_v]
        right: list[QF3Value | Cut] = [hi_v]
        if idx > 0:
            left.append(Cut(chosen[idx - 1].hi))
        if idx < len(chosen):
            right.append(Cut(chosen[idx].lo))
        d = 0
        while True:
            g = Rational(1, 1 << d)
            q1 = max(_ceil_offset(b, g) for b in left)
            q2 = min(_floor_offset(b, g) for b in right)
            if q1 < q2 and not below_cut(v, q1) and below_cut(v, q2):
                break
            d += 1
        iv = CutInterval(q1, q2)
        chosen.insert(idx, iv)
        out.append(iv)
    return out


def _locate(chosen: list[CutInterval], v: QF3Value) -> tuple[int, bool]:
    # (insertion index, covered?) for v among sorted disjoint intervals
    lo, hi = 0, len(chosen)
    while lo < hi:
        mid = (lo + hi) // 2
        if below_cut(v, chosen[mid].hi):
            hi = mid
        else:
            lo = mid + 1
    if lo < len(chosen) and not below_cut(v, chosen[lo].lo):
        return lo, True
    return lo, False


def enumerate_x(count: int) -> list[QF3Value]:
    """The first ``count`` elements of X ordered by max height of (r0, r1), then lex."""
    from .rationals import rationals_of_height
    out: list[QF3Value] = []
    levels: list[list[Rational]] = []
    h = 0
    while len(out) < count:
        h += 1
        levels.append(rationals_of_height(h))
        lower = sorted(r for lvl in levels[:-1] for r in lvl)
        allh = sorted(lower + levels[-1])
        new = sorted({(a, b) for a in levels[-1] for b in allh}
                     | {(a, b) for a in lower for b in levels[-1]})
        out.extend(QF3Value(a, b) for a, b in new)
    return out[:count]


# --- admissible covers ------------------------------------------------------

def admissible_cover(A: Iterable[Point], B: Iterable[Point], checked: Iterable[Point],
                     eps: RationalLike, parent: Optional[LazyPartition] = None) -> LazyPartition:
    """An (A, B; eps)-admissible cover, refining ``parent`` when given."""
    A, B, checked = list(A), list(B), list(checked)
    if Q(eps) <= 0:
        raise ValueError("eps must be positive")
    members = set(A) | set(B)
    for z in checked:
        if z not in members:
            raise ValueError(f"checked point {z} is not in A or B")
    return LazyPartition(eps, A, B, checked, parent)


@dataclass
class ConditionResult:
    ok: bool = True
    counterexample: Optional[str] = None

    def fail(self, msg: str) -> None:
        if self.ok:
            self.ok = False
            self.counterexample = msg


@dataclass
class Report:
    conditions: dict[str, ConditionResult] = field(default_factory=dict)

    def __getitem__(self, key: str) -> ConditionResult:
        return self.conditions.setdefault(key, ConditionResult())

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.conditions.values())

    def failures(self) -> dict[str, str]:
        return {k: c.counterexample or "" for k, c in self.conditions.items() if not c.ok}

    def to_json(self) -> dict:
        return {k: ("pass" if c.ok else f"FAIL: {c.counterexample}")
                for k, c in sorted(self.conditions.items())}


def check_admissible(P: LazyPartition, A: Iterable[Point], B: Iterable[Point],
                     checked: Iterable[Point], eps: RationalLike,
                     parent: Optional[LazyPartition] = None,
                     window: Sequence[QF3Value] = (), ladder_depth: int = 6) -> Report:
    """Exact check of the admissibility conditions on the materialised cells.

    Cells are materialised for every marked value, for every value in
    ``window`` and for the first ``ladder_depth`` children of each parent
    cell touched, then conditions (1)-(3) are checked on all of them; with a
    parent, refinement (11) and the ladder witness for (12) are checked too.
    """
    eps = Q(eps)
    A, B, checked = list(A), list(B), list(checked)
    rep = Report()
    for key in ("1", "2", "3"):
        rep[key]
    marks = {v for z in (*A, *B) for v in z.projections()}
    checked_vals = {v for z in checked for v in z.projections()}
    sorted_marks = sorted(marks, key=_qf3_key)
    probe = sorted_marks + list(window)
    for v in probe:
        P.cell_of(v)
    if parent is not None:
        rep["11"], rep["12"]
        touched = dict.fromkeys(P.parent_of[c] for c in P.materialized())
        for Pc in (c for c in touched if c is not None):
            kids = [P.child(Pc, i) for i in range(ladder_depth)]
            if len(set(kids)) < ladder_depth:
                rep["12"].fail(f"parent {Pc.id} has fewer than {ladder_depth} children")
    cells = P.materialized()

    # (1) disjoint clopen cover: parts sorted by left cut never overlap, and
    # each probe lies in the part found by bisection
    parts = sorted((part, c) for c in cells for part in c.parts)
    for (p1, c1), (p2, c2) in zip(parts, parts[1:]):
        if p2.lo < p1.hi:
            rep["1"].fail(f"cells {c1.id} and {c2.id} overlap")
    los = [part.lo for part, _ in parts]
    for v in probe:
        i = _first_not_below_cuts(los, v) - 1
        if i < 0 or not parts[i][0].contains(v):
            rep["1"].fail(f"value {v} lies in no materialised cell")

    def marks_in(part: CutInterval) -> list[QF3Value]:
        return sorted_marks[_first_not_below(sorted_marks, part.lo):
                            _first_not_below(sorted_marks, part.hi)]

    # (2) merged cells for checked points
    for z in checked:
        c = P.cell_of(z.minus)
        if c != P.cell_of(z.plus) or not c.is_double:
            rep["2"].fail(f"projections of {z} are not in one two-part cell")
            continue
        lo_part, hi_part = c.part_containing(z.minus), c.part_containing(z.plus)
        if lo_part is None or hi_part is None or lo_part == hi_part:
            rep["2"].fail(f"cell {c.id} does not split {z} across its parts")
            continue
        for part, v in ((lo_part, z.minus), (hi_part, z.plus)):
            if part.width >= eps:
                rep["2"].fail(f"part {part} of {c.id} has diameter >= {eps}")
            if marks_in(part) != [v]:
                rep["2"].fail(f"part {part} of {c.id} holds marks {marks_in(part)}")

    # (3) every other cell is convex, small and holds at most one mark
    for c in cells:
        if any(c.contains(v) for v in checked_vals):
            continue
        if c.is_double:
            rep["3"].fail(f"cell {c.id} is not order-convex")
        elif c.diameter >= eps:
            rep["3"].fail(f"cell {c.id} has diameter {c.diameter} >= {eps}")
        elif len(marks_in(c.parts[0])) > 1:
            rep["3"].fail(f"cell {c.id} holds {len(marks_in(c.parts[0]))} marks")

    # (11) refinement, decided independently of the recorded parent link
    if parent is not None:
        # the recorded parent must be a cell of the (disjoint) parent cover
        for c in cells:
            U = P.parent_of[c]
            if U is None or U not in parent.parent_of:
                rep["11"].fail(f"cell {c.id} has no parent cell")
            elif not c.within(U):
                rep["11"].fail(f"cell {c.id} is not inside parent cell {U.id}")
    return rep


def _inner_value(part: CutInterval) -> QF3Value:
    """A rational element of X strictly inside the part."""
    # midpoint plus a rational lower bound on sqrt2 accurate to a quarter width
    depth = 2
    while Rational(1, 1 << depth) >= part.width / 4:
        depth += 1
    return QF3Value((part.lo + part.hi) / 2 + Rational(_SQRT2.low(depth), 1 << depth))


def lattice_partition(mu: RationalLike) -> LazyPartition:
    mu = Q(mu)
    return LazyPartition(2 * mu, lattice=mu)


# --- diamonds and cell bijections -------------------------------------------

@dataclass(frozen=True)
class DiamondCell:
    """U <> V: points whose projections lie in U u V and meet both U and V."""

    u: Cell
    v: Cell

    @classmethod
    def of(cls, u: Cell, v: Cell) -> DiamondCell:
        return cls(u, v) if u <= v else cls(v, u)

    def to_json(self) -> dict:
        return {"u": self.u.id, "v": self.v.id}


def diamond_of(P: LazyPartition, z: Point) -> DiamondCell:
    return DiamondCell.of(P.cell_of(z.minus), P.cell_of(z.plus))


def diamond_contains(D: DiamondCell, z: Point) -> bool:
    lo, hi = z.minus, z.plus
    in_u = (D.u.contains(lo), D.u.contains(hi))
    in_v = (in_u if D.v == D.u else (D.v.contains(lo), D.v.contains(hi)))
    covered = all(a or b for a, b in zip(in_u, in_v))
    return covered and any(in_u) and any(in_v)


class CellBijection:
    """A bijection of the cells of a partition.

    Finitely many ``overrides`` are fixed explicitly.  Every other cell S with
    parent U is sent to the i-th non-override child of prev(U), where i is the
    position of S among the non-override children of U.  Without a parent the
    same pairing runs over the root lattice.
    """

    def __init__(self, partition: LazyPartition, overrides: dict[Cell, Cell],
                 prev: Optional[CellBijection] = None):
        self.partition = partition
        self.overrides = dict(overrides)
        self.inverse_overrides = {t: s for s, t in self.overrides.items()}
        if len(self.inverse_overrides) != len(self.overrides):
            raise ValueError("overrides are not injective")
        self.prev = prev
        self._fwd: dict[Cell, Cell] = {}
        self._bwd: dict[Cell, Cell] = {}
        self._free: dict[tuple[bool, Optional[Cell]], tuple[list[Cell], Iterator[Cell]]] = {}

    def _prev(self, U: Optional[Cell], inverse: bool) -> Optional[Cell]:
        if U is None or self.prev is None:
            return U
        return self.prev.inverse(U) if inverse else self.prev(U)

    def _free_child(self, target_side: bool, P: Optional[Cell], index: int) -> Cell:
        excluded = self.inverse_overrides if target_side else self.overrides
        key = (target_side, P)
        if key not in self._free:
            stream = (c for c in self.partition.children(P) if c not in excluded)
            self._free[key] = ([], stream)
        got, stream = self._free[key]
        while len(got) <= index:
            got.append(next(stream))
        return got[index]

    def _free_index(self, target_side: bool, P: Optional[Cell], cell: Cell) -> int:
        for i in itertools.count():
            if self._free_child(target_side, P, i) == cell:
                return i
        raise AssertionError  # pragma: no cover

    def _parent(self, cell: Cell) -> Optional[Cell]:
        try:
            return self.partition.parent_of[cell]
        except KeyError:
            raise KeyError(f"cell {cell.id} is not materialised in this partition") from None

    def __call__(self, cell: Cell) -> Cell:
        out = self._fwd.get(cell)
        if out is None:
            if cell in self.overrides:
                out = self.overrides[cell]
            else:
                U = self._parent(cell)
                i = self._free_index(False, U, cell)
                out = self._free_child(True, self._prev(U, inverse=False), i)
            self._fwd[cell] = out
            self._bwd[out] = cell
        return out

    def inverse(self, cell: Cell) -> Cell:
        out = self._bwd.get(cell)
        if out is None:
            if cell in self.inverse_overrides:
                out = self.inverse_overrides[cell]
            else:
                W = self._parent(cell)
                i = self._free_index(True, W, cell)
                out = self._free_child(False, self._prev(W, inverse=True), i)
            self._bwd[cell] = out
            self._fwd[out] = cell
        return out

    def overrides_json(self) -> list[dict]:
        return [{"from": s.id, "to": t.id} for s, t in sorted(self.overrides.items())]


def phi_diamond(phi: Callable[[Cell], Cell], D: DiamondCell) -> DiamondCell:
    return DiamondCell.of(phi(D.u), phi(D.v))
