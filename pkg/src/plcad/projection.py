"""Projection phase: Collins and McCallum operators, the reduced projection for
an equational constraint, and per-level bucketing of projection polynomials."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .arith import (
    MPoly,
    VarOrder,
    discriminant,
    resultant,
    sort_polys,
    squarefree_coprime_basis,
    subresultant_prs,
)
from .errors import ArithmeticDomainError, ECLostInBasis, NothingToDecompose

log = logging.getLogger(__name__)


# =========================
# Operators
# =========================
class Projection(Enum):
    COLLINS = "collins"
    MCCALLUM = "mccallum"
    MCCALLUM_EC = "mccallum-ec"


@dataclass(frozen=True)
class OperatorKind:
    """Projection operator choice; ec_index is a 0-based position in the input list."""

    kind: Projection
    ec_index: Optional[int] = None

    def __post_init__(self):
        if self.kind is Projection.MCCALLUM_EC and self.ec_index is None:
            raise ValueError("reduced projection needs an equational constraint")
        if self.kind is not Projection.MCCALLUM_EC and self.ec_index is not None:
            raise ValueError("ec only applies to the reduced McCallum operator")

    @property
    def is_mccallum_family(self) -> bool:
        return self.kind is not Projection.COLLINS

    @property
    def label(self) -> str:
        return self.kind.value

    @classmethod
    def collins(cls) -> "OperatorKind":
        return cls(Projection.COLLINS)

    @classmethod
    def mccallum(cls) -> "OperatorKind":
        return cls(Projection.MCCALLUM)

    @classmethod
    def reduced_ec(cls, ec_index: int) -> "OperatorKind":
        return cls(Projection.MCCALLUM_EC, ec_index)


@dataclass(frozen=True)
class ProjectionSets:
    """P[i] holds the basis polynomials with main variable x_i."""

    order: VarOrder
    P: Dict[int, Tuple[MPoly, ...]] = field(default_factory=dict)
    ec_factors: Tuple[MPoly, ...] = ()

    def level(self, i: int) -> Tuple[MPoly, ...]:
        return self.P.get(i, ())

    def truncated(self, i: int) -> "ProjectionSets":
        return ProjectionSets(self.order.prefix(i), {k: v for k, v in self.P.items() if k <= i},
                              self.ec_factors if i == self.order.n else ())


def _clean(polys: Iterable[MPoly]) -> List[MPoly]:
    return sort_polys(p.normalized() for p in polys if not p.is_constant)


def _check_level(B: Sequence[MPoly], v: int) -> None:
    for f in B:
        if f.level != v:
            raise ArithmeticDomainError(f"{f} does not have main variable x_{v}")


def mccallum_project(B: Sequence[MPoly], v: int) -> List[MPoly]:
    """Coefficients, discriminants and pairwise resultants w.r.t. x_v."""
    _check_level(B, v)
    out: List[MPoly] = []
    for f in B:
        out.extend(f.coefficients(v))
        if f.degree(v) >= 2:
            out.append(discriminant(f, v))
    for f, g in combinations(B, 2):
        out.append(resultant(f, g, v))
    return _clean(out)


def _reducta(f: MPoly, v: int) -> List[MPoly]:
    out = []
    while f.degree(v) >= 1:
        out.append(f)
        f = f.drop_leading(v)
    return out


def collins_project(B: Sequence[MPoly], v: int) -> List[MPoly]:
    """Collins' projection: leading coefficients of all reducta and psc chains."""
    _check_level(B, v)
    out: List[MPoly] = []
    for f in B:
        out.extend(f.coefficients(v))
        for r in _reducta(f, v):
            out.extend(subresultant_prs(r, r.diff(v), v))
    for f, g in combinations(B, 2):
        for r in _reducta(f, v):
            for s in _reducta(g, v):
                a, b = (r, s) if r.degree(v) >= s.degree(v) else (s, r)
                out.extend(subresultant_prs(a, b, v))
    return _clean(out)


def reduced_projection_ec(B: Sequence[MPoly], ec: MPoly, v: int) -> List[MPoly]:
    """McCallum's reduced projection: resultants only against the constraint's factors."""
    _check_level(B, v)
    E = [b for b in B if not b.gcd(ec).is_constant]
    if not E:
        raise ECLostInBasis()
    rest = [b for b in B if b not in E]
    out = mccallum_project(E, v)
    out.extend(resultant(e, g, v) for e in E for g in rest)
    return _clean(out)


# =========================
# Projection phase
# =========================
def projection_phase(F: Sequence[MPoly], op: OperatorKind, order: VarOrder) -> ProjectionSets:
    nonconstant = [f for f in F if not f.is_constant]
    if not nonconstant:
        raise NothingToDecompose()
    ec = None
    if op.kind is Projection.MCCALLUM_EC:
        if not 0 <= op.ec_index < len(F):
            raise ArithmeticDomainError(f"ec index {op.ec_index + 1} out of range")
        ec = F[op.ec_index]
        if ec.is_constant:
            raise ECLostInBasis()
    n = order.n
    pool = list(nonconstant)
    P: Dict[int, Tuple[MPoly, ...]] = {}
    ec_factors: Tuple[MPoly, ...] = ()
    for i in range(n, 0, -1):
        basis = squarefree_coprime_basis(pool)
        P[i] = tuple(b for b in basis if b.level == i)
        lower = [b for b in basis if b.level < i]
        if ec is not None and i == n:
            ec_factors = tuple(b for b in P[i] if not b.gcd(ec).is_constant)
            if not ec_factors:
                raise ECLostInBasis()
        log.debug("level %d: %d basis polynomials", i, len(P[i]))
        if i == 1:
            break
        if not P[i]:
            projected: List[MPoly] = []
        elif ec is not None and i == n:
            projected = reduced_projection_ec(P[i], ec, i)
        elif op.kind is Projection.COLLINS:
            projected = collins_project(P[i], i)
        else:
            projected = mccallum_project(P[i], i)
        pool = lower + projected
    return ProjectionSets(order, P, ec_factors)


def projection_summary(sets: ProjectionSets) -> Dict[str, List[str]]:
    out = {}
    for i in range(sets.order.n, 0, -1):
        out[sets.order.name(i)] = [str(p) for p in sets.level(i)]
    return out
