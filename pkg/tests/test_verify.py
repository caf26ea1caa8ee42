from dataclasses import replace
from fractions import Fraction

import pytest

from conftest import mk
from plcad.arith import Interval, MPoly
from plcad.config import Options
from plcad.lifting import CAD, Cell, CellIndex, Stack, build_cad
from plcad.projection import OperatorKind
import plcad.verify as verify
from plcad.verify import (
    Check,
    locate_point,
    run_all,
    verify_cylindricity,
    verify_ec_invariance,
    verify_partition,
    verify_sign_invariance,
)


@pytest.fixture
def circle(xy):
    return build_cad([mk("x^2 + y^2 - 1", xy)], xy, OperatorKind.mccallum(), Options())


def _rebuild(cad: CAD, top, stacks) -> CAD:
    top = tuple(sorted(top, key=lambda c: c.index.entries))
    return CAD(cad.order, cad.operator, cad.proj, (cad.levels[0], top), stacks, cad.polys)


def merged_inside(cad: CAD) -> CAD:
    """The stack over x = 0 collapsed into a single cell that straddles the circle."""
    base = cad.cell(CellIndex((3,)))
    y = MPoly.variable(2, cad.order)
    merged = Cell(base.index.child(1), base.sample.extend(y, Interval.point(0)), cad.order)
    stacks = dict(cad.stacks)
    stacks[base.index] = Stack(base, (merged,))
    top = [c for c in cad.cells() if c.index.entries[0] != 3] + [merged]
    return _rebuild(cad, top, stacks)


def without_cell(cad: CAD, index) -> CAD:
    top = [c for c in cad.cells() if c.index != CellIndex(index)]
    return _rebuild(cad, top, dict(cad.stacks))


def reparented(cad: CAD) -> CAD:
    """Cell (4,3) given the sample of (5,1), which lies over a different base cell."""
    base = cad.cell(CellIndex((4,)))
    stray = cad.cell(CellIndex((5, 1)))
    old = cad.stack_over(base)
    moved = Cell(CellIndex((4, 3)), stray.sample, cad.order)
    stacks = dict(cad.stacks)
    stacks[base.index] = replace(old, cells=old.cells[:2] + (moved,))
    top = [moved if c.index == moved.index else c for c in cad.cells()]
    return _rebuild(cad, top, stacks)


# =========================
# Point location
# =========================
def test_locate_point_examples(circle):
    assert str(locate_point(circle, [0, 0]).index) == "(3,3)", "origin is inside the circle"
    assert str(locate_point(circle, [2, 0]).index) == "(5,1)"
    on_circle = locate_point(circle, [1, 0])
    assert str(on_circle.index) == "(4,2)" and on_circle.dimension == 0


def test_locate_point_on_arc(circle):
    cell = locate_point(circle, [Fraction(3, 5), Fraction(4, 5)])
    assert str(cell.index) == "(3,4)", "(3/5, 4/5) lies on the upper arc"


def test_locate_point_needs_all_coordinates(circle):
    with pytest.raises(ValueError):
        locate_point(circle, [0])


# =========================
# Sign invariance
# =========================
def test_sign_invariance_circle(circle):
    report = verify_sign_invariance(circle, circle.polys, k=5, seed=1)
    assert report.passed, str(report)
    assert report.samples_used == 5 * 13


def test_sign_invariance_vacuous(circle):
    report = verify_sign_invariance(circle, circle.polys, k=0)
    assert report.passed and report.samples_used == 0


def test_sign_invariance_detects_merged_cells(circle):
    report = verify_sign_invariance(merged_inside(circle), circle.polys, k=20, seed=3)
    assert not report.passed, "a cell crossing the circle must be caught"
    bad = report.checks[0].counterexample
    assert bad["cell"] == "(3,1)" and bad["expected"] == -1 and bad["got"] != -1


def test_ec_invariance(xy):
    F = [mk("x^2 + y^2 - 1", xy), mk("y - x", xy)]
    cad = build_cad(F, xy, OperatorKind.reduced_ec(0), Options())
    report = verify_ec_invariance(cad, F, 0, k=3, seed=2)
    assert report.passed, str(report)
    assert [c.name for c in report.checks] == ["ec-sign-invariance", "sign-invariance-on-ec"]


# =========================
# Partition and cylindricity
# =========================
def test_partition_circle(circle):
    report = verify_partition(circle, trials=300, seed=5)
    assert report.passed, str(report)
    assert report.samples_used == 300


def test_partition_vacuous(circle):
    report = verify_partition(circle, trials=0)
    assert report.passed and report.samples_used == 0


def test_partition_detects_deleted_cell(circle):
    report = verify_partition(without_cell(circle, (5, 1)), trials=200, seed=0)
    assert not report.passed, "points right of the circle have nowhere to go"


def test_cylindricity_circle(circle):
    report = verify_cylindricity(circle)
    assert report.passed, str(report)


def test_cylindricity_single_cell(x_only):
    cad = build_cad([mk("x^2 + 1", x_only)], x_only, OperatorKind.mccallum(), Options())
    assert cad.counts() == [1]
    assert verify_cylindricity(cad).passed


def test_cylindricity_detects_reparented_cell(circle):
    report = verify_cylindricity(reparented(circle))
    assert not report.passed
    assert report.checks[-1].name == "projection"


def test_run_all_is_deterministic(circle):
    opts = Options(verify_samples=2, verify_trials=50, seed=11)
    first = [r.to_dict() for r in run_all(circle, circle.polys, opts)]
    second = [r.to_dict() for r in run_all(circle, circle.polys, opts)]
    assert first == second
    assert [r["name"] for r in first] == ["sign-invariance", "partition", "cylindricity"]


def test_check_requires_counterexample_on_failure():
    with pytest.raises(ValueError):
        Check("partition", False)
    with pytest.raises(ValueError):
        Check("partition", True, {"point": ["0"]})


# =========================
# Roots over a stack
# =========================
def test_shared_root_is_kept_once(xy):
    cad = build_cad([mk("y - x", xy), mk("y + x", xy)], xy, OperatorKind.mccallum(), Options())
    base = cad.cell(CellIndex((2,)))
    assert base.sample.rational_values() == {1: 0}
    roots = verify._stack_roots(cad.stack_over(base), base.sample, 2)
    assert len(roots) == 1, f"both lines meet at the origin, got {roots}"
    assert len(cad.stack_over(base).cells) == 3


@pytest.mark.slow
def test_roots_over_algebraic_sections_are_cached(xy):
    F = [mk("-3*x^2 - 3*y^2 + 3", xy), mk("-3*x*y^2 - 3*x + 3*y^3", xy)]
    cad = build_cad(F, xy, OperatorKind.mccallum(), Options())
    verify._fiber_roots.cache_clear()
    report = verify_sign_invariance(cad, F, k=2, seed=1)
    assert report.passed, str(report)
    assert verify._fiber_roots.cache_info().hits > 0, "stack roots are recomputed per sample"


def test_partition_membership_is_decided_independently(circle, monkeypatch):
    monkeypatch.setattr(verify, "_slot", lambda roots, point, x: 1)
    report = verify_partition(circle, trials=300, seed=2)
    assert not report.passed, "a wrong point location must disagree with the root counts"
    assert "cells" in report.checks[0].counterexample
