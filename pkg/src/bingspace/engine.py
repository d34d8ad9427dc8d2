"""The back-and-forth construction extending a finite bijection of Bing-space points.

Stage n holds finite sets A_n, B_n, a bijection f_n: A_n -> B_n, an
admissible cover U_n of X with mesh 2^-n and a bijection phi_n of its cells.
Each step enrols the least point missing from A (forth) and the least point
missing from B (back), choosing partners inside the diamond that phi sends
the new point's diamond to, so that f_n(x) always lies in phi_n<>(U_n<>(x)).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .covers import (Cell, CellBijection, CutInterval, DiamondCell, LazyPartition, Report,
                     check_admissible, diamond_contains, diamond_of, phi_diamond)
from .exact import _SQRT2, Rational, QF3Value, QuadSum, Q, RationalLike, sign_quadsum
from .rationals import (least_rational_between, rational_key,
                        rationals_of_height, rationals_up_to_height)
from .topology import BasicNbhd, Point, nbhd_closure_contains, nbhd_contains


class EngineError(RuntimeError):
    pass


class VerificationError(EngineError):
    def __init__(self, n: int, report: Report):
        self.n = n
        self.report = report
        super().__init__(f"stage {n} failed verification: {report.failures()}")


class StageLimitError(EngineError):
    pass


# --- the well-order on B ----------------------------------------------------

class WellOrder:
    """Points ordered by height, ties broken lexicographically on (x, y).

    Every initial segment is finite.  The enumeration is generated level by
    level and cached, so ``index`` is only practical for small heights.
    """

    def __init__(self) -> None:
        self._points: list[Point] = []
        self._index: dict[Point, int] = {}
        self._levels: list[list[Rational]] = []

    def _grow(self) -> None:
        h = len(self._levels) + 1
        lower = [r for lvl in self._levels for r in lvl]
        new = rationals_of_height(h)
        self._levels.append(new)
        lower_y = [r for r in lower if r >= 0]
        upto_y = lower_y + [r for r in new if r >= 0]
        pairs = {(x, y) for x in new for y in upto_y}
        pairs.update((x, y) for x in lower for y in new if y >= 0)
        for x, y in sorted(pairs):
            self._index[Point(x, y)] = len(self._points)
            self._points.append(Point(x, y))

    def point(self, i: int) -> Point:
        while len(self._points) <= i:
            self._grow()
        return self._points[i]

    def index(self, z: Point) -> int:
        if z.height > 48:
            raise ValueError(f"index of a point of height {z.height} is impractical")
        while len(self._levels) < z.height:
            self._grow()
        return self._index[z]

    def __iter__(self) -> Iterator[Point]:
        for i in itertools.count():
            yield self.point(i)

    def first_missing(self, taken: Iterable[Point]) -> Point:
        """min of B minus a finite set."""
        taken = set(taken)
        for z in self:
            if z not in taken:
                return z
        raise AssertionError  # pragma: no cover


WELL_ORDER = WellOrder()


# --- candidate search -------------------------------------------------------

def _cut(q: Rational) -> QuadSum:
    return QuadSum(q, Rational(1))


def _regions(D: DiamondCell) -> list[tuple[CutInterval, CutInterval]]:
    # ordered part pairs (I, J), I left of or equal to J, for z- in I and z+ in J
    if D.u == D.v:
        parts = D.u.parts
        return [(I, J) for I in parts for J in parts if I <= J]
    pairs = [(I, J) for I in D.u.parts for J in D.v.parts]
    pairs += [(J, I) for I, J in pairs]
    return sorted((I, J) for I, J in pairs if I < J)


def _qmax(a: QuadSum, b: QuadSum) -> QuadSum:
    return a if sign_quadsum(a - b) >= 0 else b


def _qmin(a: QuadSum, b: QuadSum) -> QuadSum:
    return a if sign_quadsum(a - b) <= 0 else b


def _boxes(I: CutInterval, J: CutInterval) -> tuple[tuple[QuadSum, QuadSum], tuple[QuadSum, QuadSum]]:
    half = Rational(1, 2)
    xbox = ((_cut(I.lo) + _cut(J.lo)).scale(half), (_cut(I.hi) + _cut(J.hi)).scale(half))
    # (J - I)/(2 sqrt3) = (J - I) * sqrt3 / 6 ; the sqrt2 offsets cancel
    ylo = QuadSum(r=max(Rational(0), J.lo - I.hi) / 6)
    yhi = QuadSum(r=(J.hi - I.lo) / 6)
    return xbox, (ylo, yhi)


def _canonical_in_region(I: CutInterval, J: CutInterval, forbid: set[Point]) -> Point:
    _, (ylo, yhi) = _boxes(I, J)
    third = (yhi - ylo).scale(Rational(1, 3))
    y = least_rational_between(ylo + third, yhi - third)
    s3y = QuadSum(r=y)
    lo = _qmax(_cut(I.lo) + s3y, _cut(J.lo) - s3y)
    hi = _qmin(_cut(I.hi) + s3y, _cut(J.hi) - s3y)
    x = least_rational_between(lo, hi, (p.x for p in forbid if p.y == y))
    return Point(x, y)


def candidate_in_diamond(D: DiamondCell, forbid: Iterable[Point], want_base: bool,
                         cap: int = 64, pair_budget: int = 200_000) -> Point:
    """A point of D outside ``forbid`` on (want_base) or off the base line.

    Base candidates are always the least in the well-order.  Off the base
    line, the well-order least point is found exhaustively among points of
    height <= ``cap``; beyond that a canonical point is built by taking the
    simplest admissible y from the middle third of its range and then the
    simplest admissible x.
    """
    forbid = set(forbid)
    if want_base:
        if D.u != D.v:
            raise EngineError("a diamond of two distinct cells holds no base point")
        taken = [p.x for p in forbid if p.is_base]
        best = min((least_rational_between(_cut(part.lo), _cut(part.hi), taken)
                    for part in D.u.parts), key=rational_key)
        return Point(best, Rational(0))

    regions = _regions(D)
    boxes = [_boxes(I, J) for I, J in regions]
    h = 2
    while h <= cap:
        found: list[Point] = []
        for (xlo, xhi), (ylo, yhi) in boxes:
            xs = rationals_up_to_height(xlo, xhi, h)
            ys = [y for y in rationals_up_to_height(ylo, yhi, h) if y > 0]
            if len(xs) * len(ys) > pair_budget:
                continue
            for z in sorted((Point(x, y) for x in xs for y in ys), key=Point.key):
                if z not in forbid and diamond_contains(D, z):
                    found.append(z)
                    break
        if found:
            return min(found, key=Point.key)
        h *= 2
    cands = [_canonical_in_region(I, J, forbid) for I, J in regions]
    best = min(cands, key=Point.key)
    if not diamond_contains(D, best):
        raise EngineError(f"canonical candidate {best} escaped diamond {D}")
    return best


# --- stages -----------------------------------------------------------------

@dataclass(frozen=True)
class EngineConfig:
    search_cap: int = 64
    verify: bool = True

    def to_json(self) -> dict:
        return {"search_cap": self.search_cap, "mesh": "2^-n"}


@dataclass(frozen=True)
class Context:
    """Data fixed at stage 0: f0 and its checked / hatted points."""

    f0: tuple[tuple[Point, Point], ...]
    check_A: frozenset[Point]   # a in A0 off the base line with f0(a) on it
    hat_A: frozenset[Point]     # a in A0 on the base line with f0(a) off it
    check_B: frozenset[Point]
    hat_B: frozenset[Point]
    config: EngineConfig


@dataclass(frozen=True)
class Chosen:
    a: Point
    b: Point
    b_prime: Point
    a_prime: Point

    def to_json(self) -> dict:
        return {"a": self.a.to_json(), "b": self.b.to_json(),
                "b_prime": self.b_prime.to_json(), "a_prime": self.a_prime.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> Chosen:
        return cls(*(Point.from_json(data[k]) for k in ("a", "b", "b_prime", "a_prime")))


@dataclass
class Stage:
    n: int
    A: tuple[Point, ...]
    B: tuple[Point, ...]
    f: dict[Point, Point]
    merged: frozenset[Point]
    partition: LazyPartition
    phi: CellBijection
    context: Context
    chosen: Optional[Chosen] = None
    report: Optional[Report] = None

    @property
    def eps(self) -> Rational:
        return Rational(1, 1 << self.n)

    @property
    def f_inverse(self) -> dict[Point, Point]:
        return {b: a for a, b in self.f.items()}

    def classification(self) -> dict[str, list[Point]]:
        ctx = self.context
        fixed_A = ctx.check_A | ctx.hat_A
        fixed_B = ctx.check_B | ctx.hat_B
        return {
            "check_A": [a for a in self.A if a in ctx.check_A],
            "hat_A": [a for a in self.A if a in ctx.hat_A],
            "dot_A": [a for a in self.A if a.is_base and a not in fixed_A],
            "ddot_A": [a for a in self.A if not a.is_base and a not in fixed_A],
            "check_B": [b for b in self.B if b in ctx.check_B],
            "hat_B": [b for b in self.B if b in ctx.hat_B],
            "dot_B": [b for b in self.B if b.is_base and b not in fixed_B],
            "ddot_B": [b for b in self.B if not b.is_base and b not in fixed_B],
        }


def merged_closure(f: Mapping[Point, Point], seeds: Iterable[Point]) -> frozenset[Point]:
    """Points whose projections share one cell: the seeds, closed under f
    along pairs with both ends off the base line."""
    merged = set(seeds)
    off = [(a, b) for a, b in f.items() if not a.is_base and not b.is_base]
    changed = True
    while changed:
        changed = False
        for a, b in off:
            if (a in merged) != (b in merged):
                merged.update((a, b))
                changed = True
    return frozenset(merged)


def build_overrides(partition: LazyPartition, f: Mapping[Point, Point],
                    merged: frozenset[Point], prev: Optional[CellBijection]) -> dict[Cell, Cell]:
    """The constrained part of phi_n: cells of enrolled points go to the cells of their images."""
    cell = partition.cell_of
    out: dict[Cell, Cell] = {}

    def put(s: Cell, t: Cell) -> None:
        if out.setdefault(s, t) != t:
            raise EngineError(f"cell {s.id} is constrained to two targets")

    for x, fx in f.items():
        if x.is_base or x in merged:
            # single cell (point, or glued projections) -> cell of f(x)
            put(cell(x.minus), cell(fx.minus))
            continue
        if fx.is_base or fx in merged:
            raise EngineError(f"pair {x} -> {fx} mixes split and glued projections")
        c1, c2 = cell(x.minus), cell(fx.minus)
        d1, d2 = cell(x.plus), cell(fx.plus)
        if prev is not None and partition.parent_of[c2] != prev(partition.parent_of[c1]):
            c2, d2 = d2, c2
        put(c1, c2)
        put(d1, d2)
    return out


def _make_stage(n: int, A: tuple[Point, ...], B: tuple[Point, ...], f: dict[Point, Point],
                context: Context, parent: Optional[Stage], chosen: Optional[Chosen]) -> Stage:
    merged = merged_closure(f, context.check_A | context.check_B)
    partition = LazyPartition(Rational(1, 1 << n), A, B, merged,
                              parent=None if parent is None else parent.partition)
    prev_phi = None if parent is None else parent.phi
    phi = CellBijection(partition, build_overrides(partition, f, merged, prev_phi), prev_phi)
    return Stage(n, A, B, f, merged, partition, phi, context, chosen)


def init(f0: Iterable[tuple[Point, Point]] | Mapping[Point, Point],
         config: EngineConfig = EngineConfig()) -> Stage:
    """Stage 0: an (A0, B0; 1)-admissible cover and phi_0 honouring f0."""
    pairs = list(f0.items()) if isinstance(f0, Mapping) else [tuple(p) for p in f0]
    A0 = [a for a, _ in pairs]
    B0 = [b for _, b in pairs]
    if len(set(A0)) != len(A0):
        raise ValueError("f0 repeats a source point")
    if len(set(B0)) != len(B0):
        raise ValueError("f0 is not injective")
    f = dict(pairs)
    ctx = Context(
        f0=tuple(pairs),
        check_A=frozenset(a for a, b in pairs if not a.is_base and b.is_base),
        hat_A=frozenset(a for a, b in pairs if a.is_base and not b.is_base),
        check_B=frozenset(b for a, b in pairs if a.is_base and not b.is_base),
        hat_B=frozenset(b for a, b in pairs if not a.is_base and b.is_base),
        config=config,
    )
    stage = _make_stage(0, tuple(A0), tuple(B0), f, ctx, None, None)
    if config.verify:
        stage.report = verify_init(stage)
        if not stage.report.ok:
            raise VerificationError(0, stage.report)
    return stage


def choose(prev: Stage, order: WellOrder = WELL_ORDER) -> Chosen:
    cap = prev.context.config.search_cap
    a = order.first_missing(prev.A)
    target = phi_diamond(prev.phi, diamond_of(prev.partition, a))
    b = candidate_in_diamond(target, prev.B, a.is_base, cap)
    b2 = order.first_missing((*prev.B, b))
    source = phi_diamond(prev.phi.inverse, diamond_of(prev.partition, b2))
    a2 = candidate_in_diamond(source, (*prev.A, a), b2.is_base, cap)
    return Chosen(a, b, b2, a2)


def extend(prev: Stage, chosen: Chosen) -> Stage:
    """The stage obtained from ``prev`` by enrolling the chosen points."""
    f = dict(prev.f)
    f[chosen.a] = chosen.b
    f[chosen.a_prime] = chosen.b_prime
    return _make_stage(prev.n + 1, prev.A + (chosen.a, chosen.a_prime),
                       prev.B + (chosen.b, chosen.b_prime), f, prev.context, prev, chosen)


def step(prev: Stage, order: WellOrder = WELL_ORDER) -> Stage:
    nxt = extend(prev, choose(prev, order))
    if prev.context.config.verify:
        nxt.report = verify_stage(prev, nxt, order)
        if not nxt.report.ok:
            raise VerificationError(nxt.n, nxt.report)
    return nxt


# --- verification -----------------------------------------------------------

def _check_phi(stage: Stage, rep: Report, cells: Sequence[Cell]) -> None:
    phi = stage.phi
    for c in cells:
        if phi.inverse(phi(c)) != c or phi(phi.inverse(c)) != c:
            rep["phi"].fail(f"phi is not invertible at {c.id}")


def _check_14(stage: Stage, rep: Report) -> None:
    for x in stage.A:
        D = phi_diamond(stage.phi, diamond_of(stage.partition, x))
        if not diamond_contains(D, stage.f[x]):
            rep["14"].fail(f"f({x}) = {stage.f[x]} is not in phi<>(U<>({x}))")


def _merge_admissibility(stage: Stage, rep: Report, parent: Optional[LazyPartition]) -> None:
    adm = check_admissible(stage.partition, stage.A, stage.B, stage.merged, stage.eps, parent, ladder_depth=6)
    for key, res in adm.conditions.items():
        name = f"adm{key}" if key in ("1", "2", "3") else key
        if not res.ok:
            rep[name].fail(res.counterexample or "")


def verify_init(stage: Stage) -> Report:
    rep = Report()
    for key in ("adm1", "adm2", "adm3", "14", "phi"):
        rep[key]
    _merge_admissibility(stage, rep, None)
    _check_14(stage, rep)
    _check_phi(stage, rep, stage.partition.materialized())
    return rep


def verify_stage(prev: Stage, nxt: Stage, order: WellOrder = WELL_ORDER) -> Report:
    """Exact check of the inductive conditions (1)-(14) for one step."""
    rep = Report()
    for key in map(str, range(1, 15)):
        rep[key]
    rep["phi"]
    ch = nxt.chosen
    if ch is None:
        rep["1"].fail("stage carries no chosen points")
        return rep
    a, b, b2, a2 = ch.a, ch.b, ch.b_prime, ch.a_prime
    prevA, prevB = set(prev.A), set(prev.B)

    if order.first_missing(prevA) != a:
        rep["1"].fail(f"a_n = {a} is not the least point outside A_(n-1)")
    D = phi_diamond(prev.phi, diamond_of(prev.partition, a))
    if not diamond_contains(D, b):
        rep["2"].fail(f"b_n = {b} is not in phi<>(U<>(a_n))")
    if b in prevB:
        rep["2"].fail(f"b_n = {b} already lies in B_(n-1)")
    if a.is_base != b.is_base:
        rep["3"].fail(f"a_n = {a} and b_n = {b} differ in base-line membership")
    if order.first_missing(prevB | {b}) != b2:
        rep["4"].fail(f"b'_n = {b2} is not the least point outside B_(n-1) + b_n")
    if a2 in prevA or a2 == a:
        rep["5"].fail(f"a'_n = {a2} is already enrolled")
    if a2.is_base != b2.is_base:
        rep["6"].fail(f"a'_n = {a2} and b'_n = {b2} differ in base-line membership")
    D2 = phi_diamond(prev.phi, diamond_of(prev.partition, a2))
    if not diamond_contains(D2, b2):
        rep["7"].fail(f"b'_n = {b2} is not in phi<>(U<>(a'_n))")
    if set(nxt.A) != prevA | {a, a2} or len(nxt.A) != len(prev.A) + 2:
        rep["8"].fail("A_n != A_(n-1) + {a_n, a'_n}")
    if set(nxt.B) != prevB | {b, b2} or len(nxt.B) != len(prev.B) + 2:
        rep["9"].fail("B_n != B_(n-1) + {b_n, b'_n}")
    if any(nxt.f.get(x) != y for x, y in prev.f.items()):
        rep["10"].fail("f_n does not extend f_(n-1)")
    if nxt.f.get(a) != b or nxt.f.get(a2) != b2:
        rep["10"].fail("f_n(a_n), f_n(a'_n) != b_n, b'_n")
    if len(set(nxt.f.values())) != len(nxt.f) or set(nxt.f) != set(nxt.A):
        rep["10"].fail("f_n is not a bijection A_n -> B_n")

    _merge_admissibility(nxt, rep, prev.partition)
    _check_14(nxt, rep)

    cells = nxt.partition.materialized()
    for V in cells:
        U = nxt.partition.parent_of[V]
        if U is None or U not in prev.partition.parent_of or not V.within(U):
            rep["11"].fail(f"cell {V.id} is not inside any cell of U_(n-1)")
            continue
        if not nxt.phi(V).within(prev.phi(U)):
            rep["13"].fail(f"phi_n({V.id}) is not inside phi_(n-1)({U.id})")
    # (12): the ladder witness is part of the admissibility check above
    _check_phi(nxt, rep, cells)
    return rep


# --- the engine ---------------------------------------------------------------

class Engine:
    """Runs stages on demand and evaluates the limit bijection."""

    def __init__(self, f0: Iterable[tuple[Point, Point]] | Mapping[Point, Point],
                 config: EngineConfig = EngineConfig(), order: WellOrder = WELL_ORDER):
        self.order = order
        self.stages: list[Stage] = [init(f0, config)]

    @property
    def current(self) -> Stage:
        return self.stages[-1]

    def step(self) -> Stage:
        self.stages.append(step(self.current, self.order))
        return self.current

    def run(self, n: int) -> Stage:
        while self.current.n < n:
            self.step()
        return self.current

    def evaluate(self, z: Point, max_stages: int = 256) -> Point:
        while z not in self.current.f:
            if self.current.n >= max_stages:
                raise StageLimitError(f"{z} not enrolled within {max_stages} stages")
            self.step()
        return self.current.f[z]

    def inverse_evaluate(self, w: Point, max_stages: int = 256) -> Point:
        while True:
            for a, b in self.current.f.items():
                if b == w:
                    return a
            if self.current.n >= max_stages:
                raise StageLimitError(f"{w} not enrolled within {max_stages} stages")
            self.step()

    def enrolment_stage(self, z: Point) -> int:
        for s in self.stages:
            if z in s.f:
                return s.n
        raise KeyError(z)


def evaluate(engine: Engine, z: Point, max_stages: int = 256) -> Point:
    return engine.evaluate(z, max_stages)


def inverse_evaluate(engine: Engine, w: Point, max_stages: int = 256) -> Point:
    return engine.inverse_evaluate(w, max_stages)


# --- continuity audit -------------------------------------------------------------

@dataclass
class AuditResult:
    delta: Optional[Rational]
    stage: Optional[int]
    samples: int = 0
    direct: int = 0
    counterexample: Optional[tuple[Point, Point]] = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None and self.delta is not None

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "delta": None if self.delta is None else f"{self.delta.numerator}/{self.delta.denominator}",
            "stage": self.stage,
            "samples": self.samples,
            "checked_directly": self.direct,
            "counterexample": None if self.counterexample is None
            else [p.to_json() for p in self.counterexample],
        }


def _part_within(part: CutInterval, centers: Sequence[QF3Value], eps: Rational) -> bool:
    # part lies in [c - eps, c + eps] for some center c (endpoints are never in X)
    for c in centers:
        cq = c.as_quadsum()
        if (sign_quadsum(_cut(part.lo) - cq + QuadSum(eps)) > 0
                and sign_quadsum(cq + QuadSum(eps) - _cut(part.hi)) > 0):
            return True
    return False


def _dyadic_floor(w: QuadSum) -> Rational:
    # largest 2^-j (j >= 0) with 2^-j <= w, for 0 < w
    r = Rational(1)
    while sign_quadsum(w - QuadSum(r)) < 0:
        r /= 2
    return r


def _good(stage: Stage, cell: Cell, centers: Sequence[QF3Value], eps: Rational) -> bool:
    return all(_part_within(p, centers, eps) for p in stage.phi(cell).parts)


def _walk(stage: Stage, part: CutInterval, centers: Sequence[QF3Value], eps: Rational,
          good: set[Cell], rightward: bool, limit: int) -> Rational:
    """Offset of the far cut reached by stepping across adjacent good cells."""
    # Ladder rungs accumulate below the upper cut of each parent part, so a
    # cut may have no adjacent cell; the walk stops there.
    edge = part.hi if rightward else part.lo
    for _ in range(limit):
        low = _SQRT2.low(96)
        probe = QF3Value(edge + Rational(low + 1 if rightward else low, 1 << 96))
        cell = stage.partition.cell_of(probe)
        nxt = cell.part_containing(probe)
        if (nxt.lo if rightward else nxt.hi) != edge:
            return edge
        if cell not in good and not _good(stage, cell, centers, eps):
            return edge
        good.add(cell)
        edge = nxt.hi if rightward else nxt.lo
    return edge


def continuity_audit(engine: Engine, z: Point, eps: RationalLike, sample_height: int = 8,
                     max_stages: int = 64, walk_limit: int = 32) -> AuditResult:
    """Falsification audit of continuity of f at z.

    Finds the first stage m whose images phi_m(U_m(z-)),
    phi_m(U_m(z+)) lie within eps of f(z)'s projections.  Around each
    projection it then steps across neighbouring cells of U_m while their
    images stay within eps; every base point w of those cells satisfies
    f(w) in phi_m(U_m(w)), so delta is taken from the reached cuts.  Each
    sampled w of height <= sample_height in N(z, delta) is then checked:
    enrolled points directly against the closure of N(f(z), eps), the rest
    through the cell enclosure.
    """
    eps = Q(eps)
    fz = engine.evaluate(z, max_stages)
    centers = fz.projections()
    # f(w) lies in phi_m<>(U_m<>(w)) at every stage m, before enrolment too,
    # by (14) at enrolment and the nesting (13)
    m = 0
    while True:
        engine.run(m)
        stage = engine.stages[m]
        cells = [stage.partition.cell_of(v) for v in z.projections()]
        if all(_good(stage, c, centers, eps) for c in cells):
            break
        if m >= max_stages:
            raise StageLimitError(f"no stage <= {max_stages} resolves eps={eps} at {z}")
        m += 1

    good = set(cells)
    gaps = []
    for v, c in zip(z.projections(), cells):
        part = c.part_containing(v)
        lo = _walk(stage, part, centers, eps, good, False, walk_limit)
        hi = _walk(stage, part, centers, eps, good, True, walk_limit)
        vq = v.as_quadsum()
        gaps += [vq - _cut(lo), _cut(hi) - vq]
    delta = min(_dyadic_floor(g) for g in gaps)

    N = BasicNbhd(z, delta)
    target = BasicNbhd(fz, eps)
    samples: dict[Point, None] = {z: None}
    for v in z.projections():
        vq = v.as_quadsum()
        for x in rationals_up_to_height(vq - QuadSum(delta), vq + QuadSum(delta), sample_height):
            w = Point(x, Rational(0))
            if nbhd_contains(N, w):
                samples[w] = None
    result = AuditResult(delta, m)
    known = engine.current.f
    for w in samples:
        result.samples += 1
        if w in known:
            result.direct += 1
            if not nbhd_closure_contains(target, known[w]):
                result.counterexample = (w, known[w])
                break
        elif stage.partition.cell_of(w.minus) not in good:
            result.counterexample = (w, w)
            break
    return result
