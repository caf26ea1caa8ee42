"""Lifting phase: stacks over cells, coprime/squarefree preprocessing over
sections, well-orientedness checks and assembly of the full decomposition."""

import concurrent.futures
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .arith import Interval, MPoly, VarOrder, sort_polys, squarefree_coprime_basis
from .chains import (
    Regularity,
    RegularChain,
    SamplePoint,
    compatible_with_sample,
    fiber,
    isolate_fiber,
    reduce_mod_chain,
    refine_root,
    regularity_test,
    regularize,
    sign_at,
    squarefree_factorization_mod_chain,
    triangularize,
)
from .config import Options, load_options
from .errors import ArithmeticDomainError, BudgetExceeded, MalformedCAD, PreprocessingFailed
from .projection import OperatorKind, Projection, ProjectionSets, projection_phase

log = logging.getLogger(__name__)


# =========================
# Cells and stacks
# =========================
@dataclass(frozen=True)
class CellIndex:
    entries: Tuple[int, ...] = ()

    def __post_init__(self):
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        if any(e < 1 for e in entries):
            raise MalformedCAD(f"cell index entries must be positive: {entries}")

    @property
    def level(self) -> int:
        return len(self.entries)

    @property
    def dimension(self) -> int:
        return sum(1 for e in self.entries if e % 2 == 1)

    @property
    def parent(self) -> "CellIndex":
        return CellIndex(self.entries[:-1])

    def child(self, e: int) -> "CellIndex":
        return CellIndex(self.entries + (e,))

    @property
    def is_section(self) -> bool:
        return bool(self.entries) and self.entries[-1] % 2 == 0

    def __str__(self) -> str:
        return "(" + ",".join(str(e) for e in self.entries) + ")"


def dimension_of_cell(index: CellIndex) -> int:
    """Number of odd entries of the index."""
    return index.dimension


@dataclass(frozen=True)
class Cell:
    index: CellIndex
    sample: SamplePoint
    order: VarOrder

    def __post_init__(self):
        if self.sample.level != self.index.level or len(self.sample.levels) != self.index.level:
            raise MalformedCAD(f"sample point of cell {self.index} has the wrong dimension")

    @property
    def level(self) -> int:
        return self.index.level

    @property
    def dimension(self) -> int:
        return self.index.dimension

    def __str__(self) -> str:
        return f"{self.index} at {self.sample}"


def root_cell(order: VarOrder) -> Cell:
    """The single cell of R^0."""
    return Cell(CellIndex(()), SamplePoint.empty(), order)


@dataclass(frozen=True)
class LiftingSet:
    """Polynomials lifted over one cell: P_i plus any minimal delineating polynomials."""

    polys: Tuple[MPoly, ...] = ()
    delineating: Tuple[MPoly, ...] = ()

    @property
    def members(self) -> Tuple[MPoly, ...]:
        return tuple(self.polys) + tuple(self.delineating)


@dataclass(frozen=True)
class Stack:
    base: Cell
    cells: Tuple[Cell, ...]
    lifting_set: LiftingSet = field(default_factory=LiftingSet)
    separated: Tuple[MPoly, ...] = ()

    def __post_init__(self):
        cells = tuple(self.cells)
        object.__setattr__(self, "cells", cells)
        if len(cells) % 2 != 1:
            raise MalformedCAD(f"stack over {self.base.index} has an even number of cells")
        for k, cell in enumerate(cells, start=1):
            if cell.index != self.base.index.child(k):
                raise MalformedCAD(f"cell {cell.index} out of place in stack over {self.base.index}")

    @property
    def sections(self) -> Tuple[Cell, ...]:
        return self.cells[1::2]


@dataclass(frozen=True)
class Failure:
    """The input is not well-oriented: `polynomial` is nullified on positive-dimensional `cell`."""

    cell: Cell
    polynomial: MPoly
    level: int

    def __str__(self) -> str:
        return f"FAIL: {self.polynomial} nullified on cell {self.cell.index} (dimension {self.cell.dimension})"


@dataclass
class CAD:
    order: VarOrder
    operator: OperatorKind
    proj: ProjectionSets
    levels: Tuple[Tuple[Cell, ...], ...]
    stacks: Dict[CellIndex, Stack]
    polys: Tuple[MPoly, ...] = ()

    def __post_init__(self):
        self.root = root_cell(self.order)
        self._by_index: Dict[CellIndex, Cell] = {self.root.index: self.root}
        for cells in self.levels:
            for c in cells:
                self._by_index[c.index] = c

    @property
    def n(self) -> int:
        return self.order.n

    def cells(self, level: Optional[int] = None) -> Tuple[Cell, ...]:
        """Cells of R^level (the top level by default)."""
        if level is None:
            level = len(self.levels)
        if level == 0:
            return (self.root,)
        return self.levels[level - 1]

    def cell(self, index: CellIndex) -> Cell:
        try:
            return self._by_index[index]
        except KeyError:
            raise MalformedCAD(f"no cell with index {index}") from None

    def stack_over(self, cell: Cell) -> Stack:
        try:
            return self.stacks[cell.index]
        except KeyError:
            raise MalformedCAD(f"no stack over cell {cell.index}") from None

    def parent(self, cell: Cell) -> Cell:
        return self.cell(cell.index.parent)

    def signs(self, cell: Cell, polys: Sequence[MPoly]) -> List[int]:
        return [sign_at(p, cell.sample) for p in polys]

    def induced(self, i: int) -> "CAD":
        """The induced decomposition of R^i."""
        if not 1 <= i <= len(self.levels):
            raise ArithmeticDomainError(f"no induced CAD of R^{i}")
        op = self.operator
        if i < len(self.levels) and op.ec_index is not None:
            # the constraint lives at the top level only
            op = OperatorKind.mccallum()
        return CAD(
            self.order.prefix(i),
            op,
            self.proj.truncated(i),
            self.levels[:i],
            {k: s for k, s in self.stacks.items() if k.level < i},
            tuple(p for p in self.polys if p.level <= i),
        )

    def counts(self) -> List[int]:
        return [len(cells) for cells in self.levels]


# =========================
# Well-orientedness
# =========================
@dataclass(frozen=True)
class Orientation:
    nullified: Tuple[MPoly, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.nullified


OK = Orientation()


def check_well_oriented(c: Cell, Pi: Sequence[MPoly], op: OperatorKind) -> Orientation:
    if not op.is_mccallum_family:
        return OK
    v = c.level + 1
    nullified = tuple(p for p in Pi if fiber(p, c.sample, v).is_zero)
    return Orientation(nullified) if nullified else OK


def _multi_indices(k: int, total: int) -> List[Tuple[int, ...]]:
    return sorted((b for b in product(range(total + 1), repeat=k) if sum(b) == total), reverse=True)


def minimal_delineating_polynomial(p: MPoly, c: Cell) -> Optional[MPoly]:
    """Least-order partial derivative of p w.r.t. the base variables not nullified at c."""
    if c.dimension > 0:
        raise ArithmeticDomainError("minimal delineating polynomial needs a 0-dimensional cell")
    v = c.level + 1
    base = list(range(1, c.level + 1))
    top = max((sum(m[:c.level]) for m, _ in p.terms), default=0)
    for total in range(1, top + 1):
        for beta in _multi_indices(len(base), total):
            d = p
            for level, e in zip(base, beta):
                for _ in range(e):
                    d = d.diff(level)
            if d.is_zero:
                continue
            fib = fiber(d, c.sample, v)
            if fib.is_zero:
                continue
            if fib.degree(v) <= 0:
                return None
            return d.normalized()
    return None


# =========================
# Preprocessing over sections
# =========================
def make_coprime(P: Sequence[MPoly], rc_hat: RegularChain, c: Cell) -> List[MPoly]:
    """Polynomials with the same fiber roots as P that are pairwise coprime at c's sample."""
    v = c.level + 1
    out: List[MPoly] = []
    for p in sort_polys(P):
        for comp in triangularize([p], out, rc_hat):
            top = comp.chain.entry(v)
            if top is None:
                continue
            if compatible_with_sample(comp, c.sample):
                out.append(top)
                break
    return out


def _sample_branch(branches, sample: SamplePoint):
    for b, z in branches:
        if compatible_with_sample(b, sample):
            return b, z
    raise PreprocessingFailed("no branch of the restriction chain contains the sample")


def make_squarefree(P: Sequence[MPoly], rc_hat: RegularChain, c: Cell) -> List[MPoly]:
    """Replace each polynomial by one with the same fiber roots that is squarefree at c's sample."""
    v = c.level + 1
    out: List[MPoly] = []
    for p in P:
        chain, q = rc_hat, p
        while q.degree(v) >= 1 and regularity_test(q, chain) is not Regularity.REGULAR:
            chain, vanishes = _sample_branch(regularize(q.lc(v), chain), c.sample)
            if not vanishes:
                break
            q = q.tail()
        if q.degree(v) < 1:
            log.debug("%s has no roots in x_%d over %s", p, v, c.index)
            continue
        for b, factors in squarefree_factorization_mod_chain(q, chain, assume_regular=True):
            if not compatible_with_sample(b, c.sample):
                continue
            prod = MPoly.constant(1, p.order)
            for f, _ in factors:
                prod = prod * f
            if prod.degree(v) >= 1:
                out.append(reduce_mod_chain(prod, b).normalized())
            break
    return out


# =========================
# Stacks
# =========================
def _apart(a: Interval, b: Interval) -> bool:
    if a.is_point or b.is_point:
        return a.hi < b.lo
    return a.hi <= b.lo


def _separate_roots(roots, sp: SamplePoint):
    roots = sorted(roots, key=lambda r: (r[0].lo, r[0].hi))
    while True:
        for i in range(len(roots) - 1):
            (ia, ea), (ib, eb) = roots[i], roots[i + 1]
            if _apart(ia, ib):
                continue
            if ea != eb and sign_at(eb, sp.extend(ea, ia)) == 0:
                raise PreprocessingFailed(f"{ea} and {eb} share a root over {sp}")
            roots[i] = (refine_root(ea, ia, sp), ea)
            roots[i + 1] = (refine_root(eb, ib, sp), eb)
            roots.sort(key=lambda r: (r[0].lo, r[0].hi))
            break
        else:
            return roots


def _sector_values(ivs: Sequence[Interval]) -> List[Fraction]:
    if not ivs:
        return [Fraction(0)]
    out = [ivs[0].lo - 1]
    out.extend((a.hi + b.lo) / 2 for a, b in zip(ivs, ivs[1:]))
    out.append(ivs[-1].hi + 1)
    return out


def stack_over_cell(c: Cell, Phat: Sequence[MPoly], lifting_set: Optional[LiftingSet] = None) -> Stack:
    """Cells over c delineated by the real roots of Phat's fibers at c's sample."""
    sp = c.sample
    v = c.level + 1
    roots = []
    for p in sort_polys(Phat):
        if p.degree(v) < 1:
            continue
        if fiber(p, sp, v).is_zero:
            log.debug("%s vanishes identically over %s", p, c.index)
            continue
        entry, ivs = isolate_fiber(p, sp, v)
        roots.extend((iv, entry) for iv in ivs)
    roots = _separate_roots(roots, sp)
    x = MPoly.variable(v, c.order)
    sectors = _sector_values([iv for iv, _ in roots])
    cells: List[Cell] = []
    for j, q in enumerate(sectors):
        cells.append(Cell(c.index.child(2 * j + 1), sp.extend(x, Interval.point(q)), c.order))
        if j < len(roots):
            iv, entry = roots[j]
            cells.append(Cell(c.index.child(2 * j + 2), sp.extend(entry, iv), c.order))
    if lifting_set is None:
        lifting_set = LiftingSet(tuple(sort_polys(Phat)))
    return Stack(c, tuple(cells), lifting_set, tuple(sort_polys(Phat)))


def generate_stack(c: Cell, P: Sequence[MPoly], lifting_set: Optional[LiftingSet] = None) -> Stack:
    """Stack over c, sign-invariant for P, with preprocessing when c has section coordinates."""
    sp = c.sample
    v = c.level + 1
    sectors = {
        level: iv.lo
        for e, level, iv in zip(c.index.entries, sp.levels, sp.box.boxes)
        if e % 2 == 1
    }
    fibers = [q for q in (p.subs(sectors) for p in sort_polys(P)) if q.degree(v) >= 1]
    sections = tuple(
        t.subs(sectors) for e, t in zip(c.index.entries, sp.chain.polys) if e % 2 == 0
    )
    if sections and fibers:
        rc_hat = RegularChain(sections)
        fibers = make_coprime(fibers, rc_hat, c)
        fibers = make_squarefree(fibers, rc_hat, c)
        log.debug("over %s: %d polynomials after preprocessing", c.index, len(fibers))
    if lifting_set is None:
        lifting_set = LiftingSet(tuple(sort_polys(P)))
    return stack_over_cell(c, fibers, lifting_set)


def decompose_r1(P1: Sequence[MPoly], order: Optional[VarOrder] = None) -> List[Cell]:
    """Cells of the real line cut at the real roots of P1."""
    if order is None:
        if not P1:
            raise ArithmeticDomainError("an empty P1 needs an explicit variable order")
        order = P1[0].order
    basis = squarefree_coprime_basis(P1) if P1 else []
    stack = stack_over_cell(root_cell(order), basis, LiftingSet(tuple(sort_polys(P1))))
    return list(stack.cells)


# =========================
# Full decomposition
# =========================
def _lift_cell(base: Cell, L: Tuple[MPoly, ...], op: OperatorKind, level: int) -> Union[Stack, Failure]:
    orientation = check_well_oriented(base, L, op)
    extra: List[MPoly] = []
    if not orientation.ok:
        if base.dimension > 0:
            return Failure(base, orientation.nullified[0], level)
        for p in orientation.nullified:
            m = minimal_delineating_polynomial(p, base)
            if m is not None:
                extra.append(m)
        log.warning(
            "%d polynomial(s) nullified over 0-dimensional cell %s; adding %d delineating polynomial(s)",
            len(orientation.nullified), base.index, len(extra),
        )
    lifting = LiftingSet(tuple(L), tuple(sort_polys(extra)))
    return generate_stack(base, lifting.members, lifting)


def _lift_level(cells: Sequence[Cell], L: Tuple[MPoly, ...], op: OperatorKind, level: int, workers: int):
    task = partial(_lift_cell, L=L, op=op, level=level)
    if workers > 1 and len(cells) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(task, cells, chunksize=1))
    return [task(c) for c in cells]


def _check_budget(total: int, options: Options) -> None:
    if options.max_cells is not None and total > options.max_cells:
        raise BudgetExceeded(options.max_cells)


def build_cad(
    F: Sequence[MPoly],
    order: VarOrder,
    op: OperatorKind,
    opts: Optional[Options] = None,
) -> Union[CAD, Failure]:
    """Projection then lifting; returns a Failure value when F is not well-oriented."""
    opts = opts or load_options()
    proj = projection_phase(F, op, order)
    n = order.n

    def lifting_polys(i: int) -> Tuple[MPoly, ...]:
        if op.kind is Projection.MCCALLUM_EC and i == n:
            return proj.ec_factors
        return proj.level(i)

    root = root_cell(order)
    first = stack_over_cell(root, lifting_polys(1), LiftingSet(lifting_polys(1)))
    stacks: Dict[CellIndex, Stack] = {root.index: first}
    levels: List[Tuple[Cell, ...]] = [first.cells]
    total = len(first.cells)
    _check_budget(total, opts)
    for i in range(2, n + 1):
        below = levels[-1]
        outcomes = _lift_level(below, lifting_polys(i), op, i, opts.workers)
        cells: List[Cell] = []
        for base, out in zip(below, outcomes):
            if isinstance(out, Failure):
                log.info("%s", out)
                return out
            stacks[base.index] = out
            cells.extend(out.cells)
        levels.append(tuple(cells))
        total += len(cells)
        log.debug("level %d: %d cells", i, len(cells))
        _check_budget(total, opts)
    log.info("built CAD with cells per level %s", [len(c) for c in levels])
    return CAD(order, op, proj, tuple(levels), stacks, tuple(F))
