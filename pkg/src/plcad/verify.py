"""Property checks for built decompositions.

The checks only use the public CAD accessors; roots are re-derived from the
lifting sets stored on each stack, never from the cached sample points.
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .arith import Interval, MPoly, sign, sturm_count, to_rat
from .chains import SamplePoint, coordinate_in, fiber, isolate_fiber, refine_root, sign_at
from .config import Options
from .errors import ArithmeticDomainError, MalformedCAD
from .lifting import CAD, Cell, CellIndex, Stack

log = logging.getLogger(__name__)


# =========================
# Reports
# =========================
@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    counterexample: Optional[Dict[str, object]] = None

    def __post_init__(self):
        if self.passed != (self.counterexample is None):
            raise ValueError("a counterexample is given exactly when a check fails")


@dataclass
class VerificationReport:
    name: str
    seed: int
    checks: List[Check] = field(default_factory=list)
    samples_used: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> Dict[str, object]:
        checks = []
        for c in self.checks:
            row: Dict[str, object] = {"name": c.name, "passed": c.passed}
            if c.counterexample is not None:
                row["counterexample"] = c.counterexample
            checks.append(row)
        return {
            "name": self.name,
            "passed": self.passed,
            "seed": self.seed,
            "samples_used": self.samples_used,
            "checks": checks,
        }

    def __str__(self) -> str:
        status = "ok" if self.passed else "FAILED"
        lines = [f"{self.name}: {status} ({self.samples_used} samples, seed {self.seed})"]
        for c in self.checks:
            if not c.passed:
                lines.append(f"  {c.name}: {c.counterexample}")
        return "\n".join(lines)


# =========================
# Roots over a point
# =========================
Root = Tuple[Interval, MPoly]


def _merge_roots(roots: List[Root], point: SamplePoint) -> List[Root]:
    """Sort roots, refining overlaps and keeping one copy of a root shared by two polynomials."""
    roots = sorted(roots, key=lambda r: (r[0].lo, r[0].hi))
    while True:
        for i in range(len(roots) - 1):
            (ia, ea), (ib, eb) = roots[i], roots[i + 1]
            if ia.before(ib):
                continue
            at_a = point.extend(ea, ia)
            if sign_at(eb, at_a) == 0 and coordinate_in(at_a, ea.level, ib):
                del roots[i + 1]
            else:
                roots[i] = (refine_root(ea, ia, point), ea)
                roots[i + 1] = (refine_root(eb, ib, point), eb)
                roots.sort(key=lambda r: (r[0].lo, r[0].hi))
            break
        else:
            return roots


@lru_cache(maxsize=4096)
def _fiber_roots(members: Tuple[MPoly, ...], point: SamplePoint, v: int) -> Tuple[Root, ...]:
    roots: List[Root] = []
    for p in members:
        if p.degree(v) < 1 or fiber(p.subs(point.rational_values()), point, v).is_zero:
            continue
        entry, ivs = isolate_fiber(p, point, v)
        roots.extend((iv, entry) for iv in ivs)
    return tuple(_merge_roots(roots, point))


def _stack_roots(stack: Stack, point: SamplePoint, v: int) -> Tuple[Root, ...]:
    """Ascending real roots in x_v of the stack's lifting polynomials over `point`."""
    return _fiber_roots(stack.lifting_set.members, point, v)


def _compare(entry: MPoly, iv: Interval, point: SamplePoint, x: Fraction) -> int:
    """Sign of x minus the root of entry isolated by iv."""
    v = entry.level
    while True:
        if iv.is_point:
            return sign(x - iv.lo)
        if x <= iv.lo:
            return -1
        if x >= iv.hi:
            return 1
        if sign_at(entry.subs({v: x}), point) == 0:
            return 0
        iv = refine_root(entry, iv, point)


def _slot(roots: Sequence[Root], point: SamplePoint, x: Fraction) -> int:
    below = 0
    for iv, entry in roots:
        c = _compare(entry, iv, point, x)
        if c == 0:
            return 2 * below + 2
        if c < 0:
            break
        below += 1
    return 2 * below + 1


def _variable(cad: CAD, level: int) -> MPoly:
    return MPoly.variable(level, cad.order)


def locate_point(cad: CAD, pt: Sequence) -> Cell:
    """The cell of the top level containing the rational point pt."""
    coords = [to_rat(c) for c in pt]
    if len(coords) != len(cad.levels):
        raise ArithmeticDomainError(f"point has {len(coords)} coordinates, expected {len(cad.levels)}")
    cell = cad.root
    point = SamplePoint.empty()
    for i, x in enumerate(coords, start=1):
        roots = _stack_roots(cad.stack_over(cell), point, i)
        cell = cad.cell(cell.index.child(_slot(roots, point, x)))
        point = point.extend(_variable(cad, i), Interval.point(x))
    return cell


def _random_rational(rng: random.Random, half_width: Fraction) -> Fraction:
    d = rng.choice((1, 2, 3, 4, 7, 16))
    bound = int(half_width * d)
    return Fraction(rng.randint(-bound, bound), d)


def _random_in_gap(rng, lo: Optional[Root], hi: Optional[Root], point) -> Fraction:
    if lo is None and hi is None:
        return Fraction(rng.randint(-500, 500), 100)
    if lo is None:
        return hi[0].lo - Fraction(rng.randint(1, 400), 100)
    if hi is None:
        return lo[0].hi + Fraction(rng.randint(1, 400), 100)
    (a, ea), (b, eb) = lo, hi
    while not a.hi < b.lo:
        a, b = refine_root(ea, a, point), refine_root(eb, b, point)
    return a.hi + (b.lo - a.hi) * Fraction(rng.randint(1, 99), 100)


def _perturbed_point(cad: CAD, cell: Cell, rng: random.Random) -> SamplePoint:
    """A point of `cell`: sector coordinates drawn at random, section coordinates exact."""
    point = SamplePoint.empty()
    entries = cell.index.entries
    for i, e in enumerate(entries, start=1):
        base = cad.cell(CellIndex(entries[: i - 1]))
        roots = _stack_roots(cad.stack_over(base), point, i)
        if e > 2 * len(roots) + 1:
            raise MalformedCAD(f"cell {cell.index} has no slot {e} over {base.index}")
        j = e // 2
        if e % 2 == 0:
            iv, entry = roots[j - 1]
            point = point.extend(entry, iv)
        else:
            lo = roots[j - 1] if j >= 1 else None
            hi = roots[j] if j < len(roots) else None
            q = _random_in_gap(rng, lo, hi, point)
            point = point.extend(_variable(cad, i), Interval.point(q))
    return point


def _describe(point: SamplePoint) -> List[str]:
    out = []
    for t, iv in point.items():
        out.append(str(iv.lo) if iv.is_point else f"root of {t} in {iv}")
    return out


# =========================
# Checks
# =========================
def _sign_check(cad, cells, polys, k, rng, report, name) -> None:
    for cell in cells:
        expected = cad.signs(cell, polys)
        for _ in range(k):
            try:
                point = _perturbed_point(cad, cell, rng)
            except MalformedCAD as exc:
                report.checks.append(Check(name, False, {"cell": str(cell.index), "reason": str(exc)}))
                return
            report.samples_used += 1
            got = [sign_at(f, point) for f in polys]
            if got != expected:
                bad = next(i for i, (a, b) in enumerate(zip(expected, got)) if a != b)
                log.warning("sign of %s changes inside cell %s", polys[bad], cell.index)
                report.checks.append(Check(name, False, {
                    "cell": str(cell.index),
                    "point": _describe(point),
                    "polynomial": str(polys[bad]),
                    "expected": expected[bad],
                    "got": got[bad],
                }))
                return
    report.checks.append(Check(name, True))


def verify_sign_invariance(cad: CAD, F: Sequence[MPoly], k: int = 5, seed: int = 0) -> VerificationReport:
    """Every input polynomial keeps its sample sign at k random points of every cell."""
    rng = random.Random(seed)
    report = VerificationReport("sign-invariance", seed)
    _sign_check(cad, cad.cells(), list(F), k, rng, report, "sign-invariance")
    return report


def verify_ec_invariance(cad: CAD, F: Sequence[MPoly], ec_index: int, k: int = 5, seed: int = 0) -> VerificationReport:
    """The constraint is sign-invariant everywhere; all of F is on the constraint's zero cells."""
    rng = random.Random(seed)
    F = list(F)
    ec = F[ec_index]
    report = VerificationReport("ec-invariance", seed)
    cells = cad.cells()
    _sign_check(cad, cells, [ec], k, rng, report, "ec-sign-invariance")
    on_ec = [c for c in cells if sign_at(ec, c.sample) == 0]
    _sign_check(cad, on_ec, F, k, rng, report, "sign-invariance-on-ec")
    return report


def verify_partition(cad: CAD, trials: int = 1000, region=10, seed: int = 0) -> VerificationReport:
    """Random rational points of [-region, region]^n each lie in exactly one cell."""
    rng = random.Random(seed)
    half = to_rat(region)
    report = VerificationReport("partition", seed)
    n = len(cad.levels)
    for _ in range(trials):
        pt = [_random_rational(rng, half) for _ in range(n)]
        report.samples_used += 1
        try:
            cell = locate_point(cad, pt)
            hits = _memberships(cad, cad.parent(cell), pt)
        except MalformedCAD as exc:
            report.checks.append(Check("partition", False, {"point": [str(x) for x in pt], "reason": str(exc)}))
            return report
        if hits != [cell.index]:
            report.checks.append(Check("partition", False, {
                "point": [str(x) for x in pt],
                "cells": [str(h) for h in hits],
            }))
            return report
    report.checks.append(Check("partition", True))
    return report


def _memberships(cad: CAD, parent: Cell, pt: Sequence[Fraction]) -> List[CellIndex]:
    """Cells over `parent` holding pt, counted with Sturm sequences of the lifting polynomials."""
    n = len(pt)
    lower = {i: to_rat(x) for i, x in enumerate(pt[:-1], start=1)}
    y = to_rat(pt[-1])
    stack = cad.stack_over(parent)
    g = MPoly.constant(1, cad.order)
    for p in stack.lifting_set.members:
        f = p.subs(lower)
        if f.degree(n) >= 1:
            g = g * f
    if g.is_constant:
        slot = 1
    else:
        below = sturm_count(g, None, y)
        slot = 2 * below if g.evaluate({n: y}) == 0 else 2 * below + 1
    return [c.index for c in stack.cells if c.index.entries[-1] == slot]


def _compare_top(a: Cell, b: Cell) -> int:
    """Order of the last sample coordinates of two cells over the same base."""
    v = a.level
    base = a.sample.upto(v - 1)
    ea, ia = a.sample.entry(v), a.sample.interval(v)
    eb, ib = b.sample.entry(v), b.sample.interval(v)
    while True:
        if ia.before(ib):
            return -1
        if ib.before(ia):
            return 1
        at_a = base.extend(ea, ia)
        if sign_at(eb, at_a) == 0 and coordinate_in(at_a, v, ib):
            return 0
        ia, ib = refine_root(ea, ia, base), refine_root(eb, ib, base)


def verify_cylindricity(cad: CAD) -> VerificationReport:
    """Structural parent links plus ordered samples inside every stack."""
    report = VerificationReport("cylindricity", 0)

    def fail(name, cell, reason):
        report.checks.append(Check(name, False, {"cell": str(cell.index), "reason": reason}))

    for i, cells in enumerate(cad.levels, start=1):
        owners: Dict[CellIndex, int] = {}
        for base in cad.cells(i - 1):
            try:
                stack = cad.stack_over(base)
            except MalformedCAD as exc:
                fail("structure", base, str(exc))
                return report
            for c in stack.cells:
                owners[c.index] = owners.get(c.index, 0) + 1
        for c in cells:
            if owners.get(c.index) != 1 or c.index.level != i:
                fail("structure", c, "cell is not in exactly one stack over the level below")
                return report
            try:
                parent = cad.parent(c)
            except MalformedCAD as exc:
                fail("structure", c, str(exc))
                return report
            if c.sample.upto(i - 1) != parent.sample:
                fail("projection", c, "sample does not lie over its parent's sample")
                return report
        if len(owners) != len(cells):
            fail("structure", cells[0] if cells else cad.root, "stacks and level lists disagree")
            return report
    report.checks.append(Check("structure", True))
    for base in [cad.root] + [c for cells in cad.levels[:-1] for c in cells]:
        stack = cad.stack_over(base)
        for a, b in zip(stack.cells, stack.cells[1:]):
            report.samples_used += 1
            if _compare_top(a, b) >= 0:
                fail("ordering", b, f"sample not above the sample of {a.index}")
                return report
    report.checks.append(Check("ordering", True))
    return report


def run_all(cad: CAD, F: Sequence[MPoly], options: Options) -> List[VerificationReport]:
    if cad.operator.ec_index is not None:
        first = verify_ec_invariance(cad, F, cad.operator.ec_index, options.verify_samples, options.seed)
    else:
        first = verify_sign_invariance(cad, F, options.verify_samples, options.seed)
    return [
        first,
        verify_partition(cad, options.verify_trials, options.region, options.seed),
        verify_cylindricity(cad),
    ]
