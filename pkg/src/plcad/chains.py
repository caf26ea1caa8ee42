"""Zero-dimensional regular chains and the sample points they encode.

A :class:`SamplePoint` is a regular chain plus a box of rational intervals
that isolates one real solution. Every entry keeps a point-local invariant:
its initial does not vanish at the point below it, its fiber there is
squarefree, and the entry's interval isolates the coordinate among the real
roots of that fiber (open interval, or an exact point interval).

Signs at a sample point are decided exactly: zero tests go through
subresultant gcds of fibers, nonzero signs come from interval enclosures on a
box that is bisected until the sign is certain. Computations modulo a chain
split the chain by gcds (the D5 principle) whenever a polynomial vanishes on
some of its points and not on others.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .arith import (
    Interval,
    MPoly,
    isolate_real_roots_univariate,
    psc,
    resultant,
    sign,
    subresultant,
)
from .errors import ChainError, PositiveDimensional, RequiresSplit

log = logging.getLogger(__name__)


# =========================
# Data model
# =========================
@dataclass(frozen=True)
class RegularChain:
    """Triangular set with strictly increasing main variables."""

    polys: Tuple[MPoly, ...] = ()

    def __post_init__(self):
        polys = tuple(self.polys)
        object.__setattr__(self, "polys", polys)
        last = 0
        for p in polys:
            if p.is_constant:
                raise ChainError(f"constant {p} in a regular chain")
            if p.level <= last:
                raise ChainError("regular chain entries need strictly increasing main variables")
            last = p.level

    def __len__(self) -> int:
        return len(self.polys)

    def __iter__(self) -> Iterator[MPoly]:
        return iter(self.polys)

    def __str__(self) -> str:
        return "{" + ", ".join(str(p) for p in self.polys) + "}"

    @property
    def levels(self) -> Tuple[int, ...]:
        return tuple(p.level for p in self.polys)

    def entry(self, level: int) -> Optional[MPoly]:
        for p in self.polys:
            if p.level == level:
                return p
        return None

    def below(self, level: int) -> "RegularChain":
        return RegularChain(tuple(p for p in self.polys if p.level < level))

    def above(self, level: int) -> Tuple[MPoly, ...]:
        return tuple(p for p in self.polys if p.level > level)

    def variables(self) -> List[int]:
        seen = set()
        for p in self.polys:
            seen.update(p.variables())
        return sorted(seen)

    @property
    def is_zero_dimensional(self) -> bool:
        return set(self.variables()) <= set(self.levels)


class Regularity(Enum):
    REGULAR = "Regular"
    ZERO_DIVISOR = "ZeroDivisorOrZero"


@dataclass(frozen=True)
class RegularSystem:
    """A regular chain together with an inequation polynomial."""

    chain: RegularChain
    inequation: Optional[MPoly] = None


@dataclass(frozen=True)
class BoundingBox:
    boxes: Tuple[Interval, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))


@dataclass(frozen=True)
class SamplePoint:
    """The unique real solution of `chain` inside `box`."""

    chain: RegularChain
    box: BoundingBox

    def __post_init__(self):
        if len(self.chain) != len(self.box.boxes):
            raise ChainError("bounding box dimension differs from chain length")

    @classmethod
    def empty(cls) -> "SamplePoint":
        return cls(RegularChain(), BoundingBox())

    @property
    def level(self) -> int:
        return self.chain.levels[-1] if self.chain.polys else 0

    @property
    def levels(self) -> Tuple[int, ...]:
        return self.chain.levels

    def items(self) -> Iterator[Tuple[MPoly, Interval]]:
        return zip(self.chain.polys, self.box.boxes)

    def interval(self, level: int) -> Interval:
        return self.box.boxes[self.levels.index(level)]

    def entry(self, level: int) -> MPoly:
        return self.chain.polys[self.levels.index(level)]

    def boxes(self) -> Dict[int, Interval]:
        return dict(zip(self.levels, self.box.boxes))

    def rational_values(self) -> Dict[int, Fraction]:
        return {lvl: iv.lo for lvl, iv in zip(self.levels, self.box.boxes) if iv.is_point}

    @property
    def is_rational(self) -> bool:
        return all(iv.is_point for iv in self.box.boxes)

    def upto(self, level: int) -> "SamplePoint":
        keep = [(t, iv) for t, iv in self.items() if t.level <= level]
        return SamplePoint(RegularChain(tuple(t for t, _ in keep)), BoundingBox(tuple(iv for _, iv in keep)))

    def extend(self, entry: MPoly, iv: Interval) -> "SamplePoint":
        """Append a coordinate; exact rational values become x_v - q with a point interval."""
        if iv.is_point:
            level = entry.level
            entry = MPoly.variable(level, entry.order) - iv.lo
        return SamplePoint(
            RegularChain(self.chain.polys + (entry,)), BoundingBox(self.box.boxes + (iv,))
        )

    def __str__(self) -> str:
        parts = []
        for t, iv in self.items():
            parts.append(str(iv.lo) if iv.is_point else f"root of {t} in {iv}")
        return "(" + ", ".join(parts) + ")"


def _one(p: MPoly) -> MPoly:
    return MPoly.constant(1, p.order)


def _zero(p: MPoly) -> MPoly:
    return MPoly.constant(0, p.order)


# =========================
# Exact signs at sample points
# =========================
@lru_cache(maxsize=65536)
def sign_at(q: MPoly, pt: SamplePoint) -> int:
    """Exact sign of q at the point encoded by pt."""
    q = q.subs(pt.rational_values())
    if q.is_constant:
        return sign(q.evaluate({}))
    missing = set(q.variables()) - set(pt.levels)
    if missing:
        raise ChainError(f"{q} involves variables outside the sample point")
    sub = pt.upto(q.level)
    if _vanishes(q, sub):
        return 0
    return _enclosure_sign(q, sub)


def _vanishes(q: MPoly, pt: SamplePoint) -> bool:
    v = pt.level
    t = pt.entry(v)
    below = pt.upto(v - 1)
    r = q.prem(t, v) if q.degree(v) >= t.degree(v) else q
    if r.is_zero:
        return True
    if r.degree(v) <= 0:
        return sign_at(r, below) == 0
    g = gcd_at(t, r, v, below)
    if g.degree(v) <= 0:
        return False
    iv = pt.interval(v)
    return sign_at(g.subs({v: iv.lo}), below) * sign_at(g.subs({v: iv.hi}), below) < 0


def _enclosure_sign(q: MPoly, pt: SamplePoint) -> int:
    cur = pt
    while True:
        s = q.enclose(cur.boxes()).sign()
        if s:
            return s
        cur = refine_point(cur)


def _bisect_coordinate(t: MPoly, iv: Interval, below: SamplePoint) -> Interval:
    v = t.level
    mid = iv.midpoint
    s_mid = sign_at(t.subs({v: mid}), below)
    if s_mid == 0:
        return Interval.point(mid)
    s_lo = sign_at(t.subs({v: iv.lo}), below)
    return Interval(mid, iv.hi) if s_mid == s_lo else Interval(iv.lo, mid)


@lru_cache(maxsize=16384)
def refine_point(pt: SamplePoint) -> SamplePoint:
    """Halve every nondegenerate interval of the box, bottom level first."""
    out = SamplePoint.empty()
    for t, iv in pt.items():
        if not iv.is_point:
            iv = _bisect_coordinate(t, iv, out)
        out = out.extend(t, iv)
    return out


def refine_root(entry: MPoly, iv: Interval, below: SamplePoint) -> Interval:
    """One bisection step of an isolating interval for a root of entry over `below`."""
    if iv.is_point:
        return iv
    return _bisect_coordinate(entry, iv, below)


def coordinate_in(pt: SamplePoint, level: int, iv: Interval) -> bool:
    """Exact test that the coordinate of pt at `level` lies in the closed interval iv."""
    x = MPoly.variable(level, pt.entry(level).order)
    if iv.is_point:
        return sign_at(x - iv.lo, pt) == 0
    return sign_at(x - iv.lo, pt) >= 0 and sign_at(x - iv.hi, pt) <= 0


# =========================
# Fibers over a sample point
# =========================
def fiber(p: MPoly, pt: SamplePoint, v: int) -> MPoly:
    """p with its leading x_v-terms that vanish at pt removed; zero when p(pt, x_v) == 0."""
    while p.degree(v) >= 1 and sign_at(p.lc(v), pt) == 0:
        p = p.drop_leading(v)
    if p.degree(v) <= 0 and (p.is_zero or sign_at(p, pt) == 0):
        return _zero(p)
    return p


def gcd_at(a: MPoly, b: MPoly, v: int, pt: SamplePoint) -> MPoly:
    """A polynomial whose fiber at pt is gcd(a(pt, x_v), b(pt, x_v))."""
    vals = pt.rational_values()
    a, b = fiber(a.subs(vals), pt, v), fiber(b.subs(vals), pt, v)
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    if a.degree(v) < b.degree(v):
        a, b = b, a
    n = b.degree(v)
    if n <= 0:
        return _one(a)
    if set(a.variables()) | set(b.variables()) <= {v}:
        return a.gcd(b)
    for j in range(n):
        if sign_at(psc(a, b, v, j), pt) != 0:
            return _one(a) if j == 0 else subresultant(a, b, v, j)
    return b


def _root_bound(f: MPoly, pt: SamplePoint, v: int) -> Fraction:
    coeffs = f.coefficients(v)
    cur = pt
    while True:
        boxes = cur.boxes()
        lead = coeffs[-1].enclose(boxes)
        if lead.sign() in (1, -1):
            break
        cur = refine_point(cur)
    low = min(abs(lead.lo), abs(lead.hi))
    big = max((max(abs(e.lo), abs(e.hi)) for e in (c.enclose(boxes) for c in coeffs[:-1])), default=Fraction(0))
    return Fraction(math.floor(1 + big / low) + 1)


def _subdivide(f: MPoly, pt: SamplePoint, v: int) -> List[Interval]:
    fp = f.diff(v)
    bound = _root_bound(f, pt, v)
    found = set()
    work = [(Interval(-bound, bound), pt)]

    def s(x: Fraction) -> int:
        return sign_at(f.subs({v: x}), pt)

    while work:
        iv, here = work.pop()
        boxes = here.boxes()
        boxes[v] = iv
        if f.enclose(boxes).sign() in (1, -1):
            continue
        s_lo, s_hi = s(iv.lo), s(iv.hi)
        if s_lo == 0:
            found.add(Interval.point(iv.lo))
        if s_hi == 0:
            found.add(Interval.point(iv.hi))
        if fp.enclose(boxes).sign() in (1, -1):
            if s_lo * s_hi < 0:
                found.add(iv)
            continue
        mid = iv.midpoint
        finer = refine_point(here)
        work.append((Interval(mid, iv.hi), finer))
        work.append((Interval(iv.lo, mid), finer))
    return sorted(found, key=lambda i: (i.lo, i.hi))


def isolate_fiber(f: MPoly, pt: SamplePoint, v: int) -> Tuple[MPoly, List[Interval]]:
    """Isolate the real roots of f(pt, x_v).

    Returns the defining polynomial actually used (squarefree at pt, with an
    initial that does not vanish there) and its ascending isolating intervals.
    """
    f = fiber(f.subs(pt.rational_values()), pt, v)
    if f.is_zero:
        raise PositiveDimensional("fiber vanishes identically")
    if f.degree(v) <= 0:
        return f, []
    g = gcd_at(f, f.diff(v), v, pt)
    if g.degree(v) >= 1:
        f = f.pquo(g, v)
    f = f.normalized()
    if set(f.variables()) <= {v}:
        return f, isolate_real_roots_univariate(f)
    return f, _subdivide(f, pt, v)


def real_root_isolate(rc: RegularChain, within: Optional[BoundingBox] = None) -> List[SamplePoint]:
    """One sample point per real solution of a zero-dimensional chain."""
    if not rc.is_zero_dimensional:
        raise PositiveDimensional("positive-dimensional chain")
    points = [SamplePoint.empty()]
    for t in rc.polys:
        v = t.level
        nxt = []
        for pt in points:
            entry, ivs = isolate_fiber(t, pt, v)
            nxt.extend(pt.extend(entry, iv) for iv in ivs)
        points = nxt
    if within is not None:
        points = [
            pt for pt in points
            if all(coordinate_in(pt, lvl, iv) for lvl, iv in zip(pt.levels, within.boxes))
        ]
    return points


# =========================
# Arithmetic modulo a chain
# =========================
def reduce_mod_chain(p: MPoly, rc: RegularChain) -> MPoly:
    """Pseudo-reduce p by the chain, top entry first."""
    for t in reversed(rc.polys):
        if p.degree(t.level) >= t.degree(t.level):
            p = p.prem(t, t.level)
    return p


def is_zero_mod_chain(p: MPoly, rc: RegularChain) -> bool:
    return reduce_mod_chain(p, rc).is_zero


def iterated_resultant(p: MPoly, rc: RegularChain) -> MPoly:
    r = p
    for t in reversed(rc.polys):
        if r.is_zero:
            break
        if r.degree(t.level) >= 1:
            r = resultant(r, t, t.level)
    return r


def regularity_test(p: MPoly, rc: RegularChain) -> Regularity:
    """Regular iff the initial of p does not vanish at any solution of rc."""
    if p.is_zero:
        return Regularity.ZERO_DIVISOR
    top = rc.levels[-1] if rc.polys else 0
    h = p.lc() if p.level > top else p
    if iterated_resultant(h, rc).is_zero:
        return Regularity.ZERO_DIVISOR
    return Regularity.REGULAR


def tail(p: MPoly) -> MPoly:
    return p.tail()


def _tidy(p: MPoly, rc: RegularChain) -> MPoly:
    return reduce_mod_chain(p, rc).normalized()


def _assemble(lower: RegularChain, t: MPoly, upper: Tuple[MPoly, ...]) -> RegularChain:
    return RegularChain(lower.polys + (t,) + upper)


def regularize(h: MPoly, rc: RegularChain) -> List[Tuple[RegularChain, bool]]:
    """Split rc into branches on which h vanishes (True) or does not (False)."""
    h = reduce_mod_chain(h, rc)
    if h.is_zero:
        return [(rc, True)]
    if h.is_constant:
        return [(rc, False)]
    v = h.level
    t = rc.entry(v)
    if t is None:
        out = []
        for b, z in regularize(h.lc(v), rc):
            if z:
                out.extend(regularize(h.drop_leading(v), b))
            else:
                out.append((b, False))
        return out
    lower, upper = rc.below(v), rc.above(v)
    out = []
    for b, g in _gcd_branches(t, h, v, lower):
        if g is None:
            out.append((_assemble(b, t, upper), False))
        elif g.degree(v) >= t.degree(v):
            out.append((_assemble(b, t, upper), True))
        else:
            log.debug("splitting %s by %s", t, g)
            out.append((_assemble(b, _tidy(g, b), upper), True))
            out.append((_assemble(b, _tidy(t.pquo(g, v), b), upper), False))
    return out


def _gcd_branches(t: MPoly, h: MPoly, v: int, lower: RegularChain) -> List[Tuple[RegularChain, Optional[MPoly]]]:
    """Branches of `lower` with the fiber gcd of (t, h) on each; None means coprime.

    The initial of t must not vanish on `lower`.
    """
    if h.degree(v) >= t.degree(v):
        h = h.prem(t, v)
    if not lower.polys and set(t.variables()) | set(h.variables()) <= {v}:
        if h.is_zero:
            return [(lower, t)]
        g = t.gcd(h)
        return [(lower, None if g.degree(v) <= 0 else g)]
    out = []
    work = [(lower, h)]
    while work:
        br, hh = work.pop()
        if hh.is_zero:
            out.append((br, t))
            continue
        if hh.degree(v) <= 0:
            out.extend((b, t if z else None) for b, z in regularize(hh, br))
            continue
        for b, z in regularize(hh.lc(v), br):
            if z:
                work.append((b, hh.drop_leading(v)))
            else:
                out.extend(_psc_scan(t, hh, v, b, 0))
    return out


def _psc_scan(t: MPoly, h: MPoly, v: int, br: RegularChain, j: int):
    n = h.degree(v)
    if j >= n:
        return [(br, h)]
    out = []
    for b, z in regularize(psc(t, h, v, j), br):
        if z:
            out.extend(_psc_scan(t, h, v, b, j + 1))
        else:
            out.append((b, None if j == 0 else subresultant(t, h, v, j)))
    return out


def _gcd_split(a: MPoly, b: MPoly, v: int, rc: RegularChain) -> List[Tuple[RegularChain, MPoly]]:
    if a.degree(v) < b.degree(v):
        a, b = b, a
    return [(br, _one(a) if g is None else g) for br, g in _gcd_branches(a, b, v, rc)]


def _check_above(p: MPoly, rc: RegularChain) -> int:
    v = p.level
    if v == 0 or (rc.polys and v <= rc.levels[-1]):
        raise ChainError(f"main variable of {p} must lie above the chain {rc}")
    return v


def gcd_mod_chain(p: MPoly, q: MPoly, rc: RegularChain) -> MPoly:
    """Subresultant gcd of p and q modulo rc; raises RequiresSplit instead of splitting."""
    v = _check_above(p, rc)
    if q.level != v:
        raise ChainError(f"{p} and {q} do not share a main variable")
    for x in (p, q):
        if regularity_test(x, rc) is not Regularity.REGULAR:
            raise RequiresSplit(x.lc(v))
    if p.degree(v) < q.degree(v):
        p, q = q, p
    for j in range(q.degree(v)):
        s = psc(p, q, v, j)
        if not iterated_resultant(s, rc).is_zero:
            return _one(p) if j == 0 else _tidy(subresultant(p, q, v, j), rc)
        if not is_zero_mod_chain(s, rc):
            raise RequiresSplit(s)
    return _tidy(q, rc)


def _musser(p: MPoly, rc: RegularChain) -> List[Tuple[RegularChain, List[Tuple[MPoly, int]]]]:
    v = p.level
    one = _one(p)
    states = []
    for b, g in _gcd_split(p, p.diff(v), v, rc):
        c = g if g.degree(v) >= 1 else one
        w = p.pquo(c, v) if c.degree(v) >= 1 else p
        states.append((b, w, c, 1, ()))
    results = []
    while states:
        b, w, c, i, factors = states.pop(0)
        if w.degree(v) <= 0:
            results.append((b, [(_tidy(f, b), m) for f, m in factors]))
            continue
        for b2, y in _gcd_split(w, c, v, b):
            if y.degree(v) >= 1:
                z, c2, w2 = w.pquo(y, v), c.pquo(y, v), y
            else:
                z, c2, w2 = w, c, one
            nf = factors + ((z, i),) if z.degree(v) >= 1 else factors
            states.append((b2, w2, c2, i + 1, nf))
    return results


def squarefree_factorization_mod_chain(
    p: MPoly, rc: RegularChain, assume_regular: bool = False
) -> List[Tuple[RegularChain, List[Tuple[MPoly, int]]]]:
    """Musser-style squarefree decomposition of p modulo rc, splitting rc when needed.

    With assume_regular the caller has already shown that the initial of p does
    not vanish on the branch it cares about.
    """
    _check_above(p, rc)
    if not assume_regular and regularity_test(p, rc) is not Regularity.REGULAR:
        raise ChainError(f"{p} is not regular modulo {rc}")
    return _musser(p, rc)


# =========================
# Triangular decomposition (zero-dimensional case)
# =========================
def _strip_common(br: RegularChain, q: MPoly, h: MPoly, v: int) -> List[Tuple[RegularChain, MPoly]]:
    out = []
    work = [(br, q)]
    while work:
        b, qq = work.pop()
        if qq.degree(v) <= 0:
            continue
        for b2, g in _gcd_branches(qq, h, v, b):
            if g is None:
                out.append((b2, qq))
            elif g.degree(v) < qq.degree(v):
                work.append((b2, qq.pquo(g, v)))
    return out


def _exclude(br: RegularChain, q: MPoly, v: int, ineqs: Sequence[MPoly]) -> List[Tuple[RegularChain, MPoly]]:
    current = [(br, q)]
    for h in ineqs:
        nxt = []
        for b, qq in current:
            if h.degree(v) <= 0:
                nxt.extend((b2, qq) for b2, z in regularize(h, b) if not z)
            else:
                nxt.extend(_strip_common(b, qq, h, v))
        current = nxt
    return current


def _free_component(br: RegularChain, v: int, ineqs: Sequence[MPoly]) -> List[RegularSystem]:
    current = [(br, [])]
    for h in ineqs:
        nxt = []
        for b, kept in current:
            for b2, z in regularize(h, b):
                if not z:
                    nxt.append((b2, kept + [h] if h.degree(v) >= 1 else kept))
        current = nxt
    out = []
    for b, kept in current:
        ineq = None
        for h in kept:
            ineq = h if ineq is None else ineq * h
        out.append(RegularSystem(b, ineq))
    return out


def triangularize(eqs: Sequence[MPoly], ineqs: Sequence[MPoly], rc: RegularChain) -> List[RegularSystem]:
    """Regular systems covering {eqs = 0, rc = 0, ineqs != 0} for a zero-dimensional rc."""
    if not rc.is_zero_dimensional:
        raise PositiveDimensional()
    if len(eqs) != 1:
        raise ChainError("triangularize takes exactly one equation")
    p = eqs[0]
    if p.is_zero:
        raise ChainError("the equation is the zero polynomial")
    top = rc.levels[-1] if rc.polys else 0
    v = p.level
    if v <= top:
        if v == 0:
            return []
        return [
            s for b, z in regularize(p, rc) if z
            for s in _free_component(b, top + 1, ineqs)
        ]
    candidates = []
    chain_only = []
    work = [(rc, p)]
    while work:
        br, q = work.pop()
        if q.degree(v) <= 0:
            chain_only.extend(b for b, z in regularize(q, br) if z)
            continue
        for b, z in regularize(q.lc(v), br):
            if z:
                work.append((b, q.drop_leading(v)))
            else:
                candidates.append((b, q))
    systems = []
    for b, q in candidates:
        for b2, q2 in _exclude(b, q, v, ineqs):
            systems.append(RegularSystem(RegularChain(b2.polys + (_tidy(q2, b2),))))
    for b in chain_only:
        systems.extend(_free_component(b, v, ineqs))
    return systems


def compatible_with_sample(component: Union[RegularSystem, RegularChain], sp: SamplePoint) -> bool:
    """True when the sample point solves the component's chain below its top dimension."""
    chain = component.chain if isinstance(component, RegularSystem) else component
    lower = [t for t in chain.polys if t.level <= sp.level]
    for t in lower:
        if t.level not in sp.levels:
            raise ChainError(f"{t} uses a variable the sample point does not fix")
    return all(sign_at(t, sp) == 0 for t in lower)
