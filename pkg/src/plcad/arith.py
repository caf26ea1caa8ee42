"""Exact arithmetic over Q: polynomials, resultants, bases and univariate roots.

Everything here is a pure function of immutable values. Polynomials are
sympy ``Poly`` objects over ``QQ`` wrapped in :class:`MPoly`, which pins the
generators to a :class:`VarOrder` so that every polynomial of a job shares the
same exponent layout.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy import Poly, QQ, Rational, Symbol, sturm
from sympy.polys.matrices import DomainMatrix
from sympy.polys.polyerrors import ExactQuotientFailed

from .errors import ArithmeticDomainError

log = logging.getLogger(__name__)

Rat = Fraction
Number = Union[int, Fraction]
Monomial = Tuple[int, ...]


# =========================
# Rationals
# =========================
def to_rat(x) -> Fraction:
    """Convert ints, sympy/gmpy rationals and Fractions to a canonical Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(int(x.numerator), int(x.denominator))


def sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def _sympy_rat(x: Fraction) -> Rational:
    return Rational(x.numerator, x.denominator)


# =========================
# Intervals
# =========================
@dataclass(frozen=True)
class Interval:
    """A rational interval [lo, hi].

    As an isolating interval a point interval is the exact value and a
    nondegenerate one is read as the open interval (lo, hi); the polynomial it
    isolates a root of never vanishes at its endpoints. Arithmetic on intervals
    is exact enclosure arithmetic.
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", to_rat(self.lo))
        object.__setattr__(self, "hi", to_rat(self.hi))
        if self.lo > self.hi:
            raise ArithmeticDomainError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: Number) -> "Interval":
        return cls(x, x)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: Number) -> bool:
        return self.lo <= x <= self.hi

    def before(self, other: "Interval") -> bool:
        """True when every value isolated by self is below every value isolated by other."""
        if self.is_point and other.is_point:
            return self.lo < other.lo
        return self.hi <= other.lo

    # enclosure arithmetic
    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other: "Interval") -> "Interval":
        return self + (-other)

    def __mul__(self, other: "Interval") -> "Interval":
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(products), max(products))

    def __pow__(self, e: int) -> "Interval":
        if e == 0:
            return Interval(1, 1)
        a, b = self.lo ** e, self.hi ** e
        if e % 2 == 1:
            return Interval(a, b)
        if self.lo >= 0:
            return Interval(a, b)
        if self.hi <= 0:
            return Interval(b, a)
        return Interval(0, max(a, b))

    def sign(self) -> Optional[int]:
        """Sign shared by every value of the interval, or None when it straddles 0."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        return None

    def __str__(self) -> str:
        if self.is_point:
            return f"[{self.lo}]"
        return f"[{self.lo}, {self.hi}]"


# =========================
# Variable order
# =========================
@dataclass(frozen=True)
class VarOrder:
    """Ordered variable names; position i (1-based) is x_i, x_1 lowest."""

    names: Tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise ArithmeticDomainError("variable order must be nonempty")
        if len(set(names)) != len(names):
            raise ArithmeticDomainError(f"repeated variable in order {', '.join(names)}")

    def __getstate__(self):
        return {"names": self.names}

    def __setstate__(self, state):
        object.__setattr__(self, "names", state["names"])

    @property
    def n(self) -> int:
        return len(self.names)

    @cached_property
    def symbols(self) -> Tuple[Symbol, ...]:
        return tuple(Symbol(name) for name in self.names)

    @cached_property
    def ring(self):
        """sympy polynomial ring QQ[x_1..x_n] used for determinant work."""
        return QQ.poly_ring(*self.symbols)

    def level_of(self, name: str) -> int:
        try:
            return self.names.index(name) + 1
        except ValueError:
            raise ArithmeticDomainError(f"unknown variable {name!r}") from None

    def name(self, level: int) -> str:
        return self.names[level - 1]

    def prefix(self, k: int) -> "VarOrder":
        return VarOrder(self.names[:k])


# =========================
# Polynomials
# =========================
@dataclass(frozen=True, eq=False)
class MPoly:
    """A polynomial over Q with generators fixed by a VarOrder.

    Levels are 1-based variable positions; level 0 means "constant". The main
    variable of a nonconstant polynomial is the highest level with positive
    degree.
    """

    poly: Poly
    order: VarOrder

    # ----- construction -----
    @classmethod
    def from_expr(cls, expr, order: VarOrder) -> "MPoly":
        return cls(Poly(expr, *order.symbols, domain=QQ), order)

    @classmethod
    def from_dict(cls, terms: Dict[Monomial, Number], order: VarOrder) -> "MPoly":
        clean = {m: _sympy_rat(to_rat(c)) for m, c in terms.items() if c != 0}
        if not clean:
            return cls.constant(0, order)
        return cls(Poly.from_dict(clean, *order.symbols, domain=QQ), order)

    @classmethod
    def constant(cls, c: Number, order: VarOrder) -> "MPoly":
        return cls(Poly(_sympy_rat(to_rat(c)), *order.symbols, domain=QQ), order)

    @classmethod
    def variable(cls, level: int, order: VarOrder) -> "MPoly":
        return cls(Poly(order.symbols[level - 1], *order.symbols, domain=QQ), order)

    def _wrap(self, poly: Poly) -> "MPoly":
        return MPoly(poly, self.order)

    def _lift(self, other) -> "MPoly":
        if isinstance(other, MPoly):
            return other
        return MPoly.constant(to_rat(other), self.order)

    # ----- identity -----
    @cached_property
    def terms(self) -> Tuple[Tuple[Monomial, Fraction], ...]:
        """Nonzero terms as (exponent vector, Fraction), sorted by exponent vector."""
        if self.poly.is_zero:
            return ()
        return tuple(sorted((m, to_rat(c)) for m, c in self.poly.terms()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.order == other.order and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.order.names, self.terms))

    def __getstate__(self):
        return {"terms": self.terms, "order": self.order}

    def __setstate__(self, state):
        order = state["order"]
        rebuilt = MPoly.from_dict(dict(state["terms"]), order)
        object.__setattr__(self, "poly", rebuilt.poly)
        object.__setattr__(self, "order", order)

    def sort_key(self):
        """Deterministic total order: level, degree in mvar, then terms."""
        return (self.level, self.degree(self.level) if self.level else 0, len(self.terms), self.terms)

    def __str__(self) -> str:
        return str(self.poly.as_expr()).replace("**", "^")

    def __repr__(self) -> str:
        return f"MPoly({self})"

    # ----- arithmetic -----
    def __add__(self, other) -> "MPoly":
        return self._wrap(self.poly + self._lift(other).poly)

    __radd__ = __add__

    def __sub__(self, other) -> "MPoly":
        return self._wrap(self.poly - self._lift(other).poly)

    def __rsub__(self, other) -> "MPoly":
        return self._wrap(self._lift(other).poly - self.poly)

    def __mul__(self, other) -> "MPoly":
        return self._wrap(self.poly * self._lift(other).poly)

    __rmul__ = __mul__

    def __neg__(self) -> "MPoly":
        return self._wrap(-self.poly)

    def __pow__(self, e: int) -> "MPoly":
        return self._wrap(self.poly ** e)

    # ----- structure -----
    @property
    def is_zero(self) -> bool:
        return self.poly.is_zero

    @property
    def is_constant(self) -> bool:
        return self.poly.is_ground

    @cached_property
    def level(self) -> int:
        """Level of the main variable; 0 for constants."""
        top = 0
        for m, _ in self.terms:
            for i in range(len(m) - 1, top - 1, -1):
                if m[i] > 0:
                    top = max(top, i + 1)
                    break
        return top

    @property
    def mvar(self) -> Symbol:
        if not self.level:
            raise ArithmeticDomainError(f"{self} has no main variable")
        return self.order.symbols[self.level - 1]

    def variables(self) -> List[int]:
        seen = set()
        for m, _ in self.terms:
            seen.update(i + 1 for i, e in enumerate(m) if e)
        return sorted(seen)

    def degree(self, level: Optional[int] = None) -> int:
        """Degree in x_level (main variable by default); -1 for the zero polynomial."""
        if self.is_zero:
            return -1
        if level is None:
            level = self.level
        if level == 0:
            return 0
        return max(m[level - 1] for m, _ in self.terms)

    def coefficients(self, level: Optional[int] = None) -> List["MPoly"]:
        """Coefficients w.r.t. x_level, ascending powers; index d is the leading one."""
        if level is None:
            level = self.level
        d = self.degree(level)
        if d < 0:
            return []
        buckets: List[Dict[Monomial, Fraction]] = [dict() for _ in range(d + 1)]
        i = level - 1
        for m, c in self.terms:
            rest = m[:i] + (0,) + m[i + 1:]
            buckets[m[i]][rest] = c
        return [MPoly.from_dict(b, self.order) for b in buckets]

    def lc(self, level: Optional[int] = None) -> "MPoly":
        """Leading coefficient w.r.t. x_level; the initial when level is the main variable."""
        if level is None:
            level = self.level
        if level == 0 or self.degree(level) <= 0:
            return self
        return self.coefficients(level)[-1]

    def drop_leading(self, level: int) -> "MPoly":
        d = self.degree(level)
        i = level - 1
        return MPoly.from_dict({m: c for m, c in self.terms if m[i] != d}, self.order)

    def tail(self) -> "MPoly":
        """The polynomial minus its leading term w.r.t. its main variable."""
        if self.is_constant:
            raise ArithmeticDomainError(f"tail of constant {self}")
        return self.drop_leading(self.level)

    def diff(self, level: int) -> "MPoly":
        return self._wrap(self.poly.diff(self.order.symbols[level - 1]))

    def subs(self, values: Dict[int, Fraction]) -> "MPoly":
        """Substitute rational values for the given levels, keeping all generators."""
        if not values:
            return self
        out: Dict[Monomial, Fraction] = {}
        for m, c in self.terms:
            m2 = list(m)
            for level, x in values.items():
                e = m2[level - 1]
                if e:
                    c = c * to_rat(x) ** e
                    m2[level - 1] = 0
            key = tuple(m2)
            out[key] = out.get(key, Fraction(0)) + c
        return MPoly.from_dict(out, self.order)

    def evaluate(self, values: Dict[int, Fraction]) -> Fraction:
        """Exact value at a rational point covering every variable present."""
        total = Fraction(0)
        for m, c in self.terms:
            for i, e in enumerate(m):
                if e:
                    c = c * to_rat(values[i + 1]) ** e
            total += c
        return total

    def enclose(self, boxes: Dict[int, Interval]) -> Interval:
        """Interval enclosure of the polynomial over a box."""
        total = Interval(0, 0)
        for m, c in self.terms:
            term = Interval(c, c)
            for i, e in enumerate(m):
                if e:
                    term = term * (boxes[i + 1] ** e)
            total = total + term
        return total

    # ----- normal forms -----
    def normalized(self) -> "MPoly":
        """Integer primitive part with a positive leading coefficient (mvar-major order)."""
        if self.is_zero:
            return self
        _, p = self.poly.clear_denoms(convert=True)
        _, p = p.primitive()
        p = p.set_domain(QQ)
        lead = max(p.terms(), key=lambda t: t[0][::-1])[1]
        if lead < 0:
            p = -p
        return self._wrap(p)

    def gcd(self, other: "MPoly") -> "MPoly":
        return self._wrap(self.poly.gcd(other.poly))

    def exquo(self, other: "MPoly") -> "MPoly":
        try:
            return self._wrap(self.poly.exquo(other.poly))
        except ExactQuotientFailed:
            raise ArithmeticDomainError(f"{other} does not divide {self}") from None

    def sqf_part(self) -> "MPoly":
        if self.is_constant:
            return self
        return self._wrap(self.poly.sqf_part())

    def _in_front(self, level: int) -> Tuple[Symbol, ...]:
        v = self.order.symbols[level - 1]
        return (v,) + tuple(s for s in self.order.symbols if s != v)

    def prem(self, other: "MPoly", level: int) -> "MPoly":
        """Pseudo-remainder w.r.t. x_level."""
        gens = self._in_front(level)
        r = self.poly.reorder(*gens).prem(other.poly.reorder(*gens))
        return self._wrap(r.reorder(*self.order.symbols))

    def pquo(self, other: "MPoly", level: int) -> "MPoly":
        """Pseudo-quotient w.r.t. x_level."""
        gens = self._in_front(level)
        q = self.poly.reorder(*gens).pquo(other.poly.reorder(*gens))
        return self._wrap(q.reorder(*self.order.symbols))

    def as_univariate(self) -> Tuple[int, Poly]:
        """(level, univariate sympy Poly) for a polynomial in at most one variable."""
        vs = self.variables()
        if len(vs) > 1:
            raise ArithmeticDomainError(f"{self} is not univariate")
        if not vs:
            return 0, Poly(self.poly.as_expr(), Symbol("_t"), domain=QQ)
        level = vs[0]
        return level, Poly(self.poly.as_expr(), self.order.symbols[level - 1], domain=QQ)


def sort_polys(polys: Iterable[MPoly]) -> List[MPoly]:
    """Deduplicate and order polynomials deterministically."""
    unique = {p: None for p in polys}
    return sorted(unique, key=MPoly.sort_key)


# =========================
# Resultants and subresultants
# =========================
def resultant(p: MPoly, q: MPoly, level: int) -> MPoly:
    """res_v(p, q) for v = x_level; the result is free of v."""
    if p.degree(level) < 1 or q.degree(level) < 1:
        raise ArithmeticDomainError("not a resultant operand")
    gens = p._in_front(level)
    res = p.poly.reorder(*gens).resultant(q.poly.reorder(*gens))
    expr = res.as_expr() if isinstance(res, Poly) else res
    return MPoly.from_expr(expr, p.order)


def discriminant(p: MPoly, level: int) -> MPoly:
    """disc_v(p) = (-1)^(d(d-1)/2) res_v(p, p') / lc_v(p)."""
    d = p.degree(level)
    if d < 2:
        raise ArithmeticDomainError(f"discriminant needs degree >= 2 in {p.order.name(level)}")
    r = resultant(p, p.diff(level), level).exquo(p.lc(level))
    return -r if (d * (d - 1) // 2) % 2 else r


def _to_ring(p: MPoly):
    K = p.order.ring
    return K.ring.from_dict({m: _sympy_rat(c) for m, c in p.terms}) if p.terms else K.zero


def _from_ring(elem, order: VarOrder) -> MPoly:
    return MPoly.from_dict({m: to_rat(c) for m, c in dict(elem).items()}, order)


def _subresultant_rows(p: MPoly, q: MPoly, level: int, j: int):
    cp, cq = p.coefficients(level), q.coefficients(level)
    m, n = len(cp) - 1, len(cq) - 1
    width = m + n - j
    K = p.order.ring
    rows = []
    for coeffs, count in ((cp, n - j), (cq, m - j)):
        ring_coeffs = [_to_ring(c) for c in coeffs]
        for s in range(count - 1, -1, -1):
            row = [K.zero] * width
            for e, c in enumerate(ring_coeffs):
                row[width - 1 - (e + s)] = c
            rows.append(row)
    return rows, width, m + n - 2 * j - 1


def _det_with_column(rows, width: int, lead: int, power: int, K):
    square = [row[:lead] + [row[width - 1 - power]] for row in rows]
    size = len(square)
    return DomainMatrix(square, (size, size), K).det()


def _check_degrees(p: MPoly, q: MPoly, level: int) -> Tuple[int, int]:
    if p.is_zero:
        raise ArithmeticDomainError("subresultants of the zero polynomial")
    m, n = p.degree(level), q.degree(level)
    if n > m:
        raise ArithmeticDomainError("subresultants need deg p >= deg q")
    return m, n


@lru_cache(maxsize=8192)
def psc(p: MPoly, q: MPoly, level: int, j: int) -> MPoly:
    """Principal subresultant coefficient psc_j of (p, q) w.r.t. x_level."""
    m, n = _check_degrees(p, q, level)
    if n < 0:
        return MPoly.constant(0, p.order)
    if j == n:
        return q.lc(level) ** (m - n)
    if j > n:
        raise ArithmeticDomainError(f"psc_{j} undefined for degrees ({m}, {n})")
    rows, width, lead = _subresultant_rows(p, q, level, j)
    return _from_ring(_det_with_column(rows, width, lead, j, p.order.ring), p.order)


@lru_cache(maxsize=4096)
def subresultant(p: MPoly, q: MPoly, level: int, j: int) -> MPoly:
    """Subresultant polynomial S_j of (p, q) w.r.t. x_level."""
    m, n = _check_degrees(p, q, level)
    if j == n:
        return q if m == n else q.lc(level) ** (m - n - 1) * q
    if j > n or n < 0:
        raise ArithmeticDomainError(f"S_{j} undefined for degrees ({m}, {n})")
    rows, width, lead = _subresultant_rows(p, q, level, j)
    K = p.order.ring
    v = MPoly.variable(level, p.order)
    total = MPoly.constant(0, p.order)
    for i in range(j + 1):
        coeff = _from_ring(_det_with_column(rows, width, lead, i, K), p.order)
        if not coeff.is_zero:
            total = total + coeff * v ** i
    return total


def subresultant_prs(p: MPoly, q: MPoly, level: int) -> List[MPoly]:
    """Principal subresultant coefficients psc_0 .. psc_deg(q) of (p, q)."""
    _, n = _check_degrees(p, q, level)
    if n < 0:
        return [MPoly.constant(0, p.order)]
    return [psc(p, q, level, j) for j in range(n + 1)]


# =========================
# Squarefree coprime basis
# =========================
def irreducible_factors(f: MPoly) -> List[MPoly]:
    """Distinct nonconstant irreducible factors of f over Q, normalized."""
    if f.is_constant:
        return []
    _, factors = f.poly.factor_list()
    return [MPoly(g.set_domain(QQ), f.order).normalized() for g, _ in factors if not g.is_ground]


def squarefree_coprime_basis(polys: Iterable[MPoly]) -> List[MPoly]:
    """Irreducible factors of the inputs: pairwise coprime, squarefree, primitive, same zero set."""
    pieces: List[MPoly] = []
    for f in polys:
        if f.is_zero:
            raise ArithmeticDomainError("zero polynomial in basis input")
        pieces.extend(irreducible_factors(f))
    return sort_polys(pieces)


# =========================
# Univariate real roots
# =========================
def _coeffs_desc(u: Poly) -> List[Fraction]:
    return [to_rat(c) for c in u.all_coeffs()]


def horner(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in coeffs:
        acc = acc * x + c
    return acc


def _bisect(coeffs: Sequence[Fraction], iv: Interval) -> Interval:
    mid = iv.midpoint
    s = sign(horner(coeffs, mid))
    if s == 0:
        return Interval.point(mid)
    if s == sign(horner(coeffs, iv.lo)):
        return Interval(mid, iv.hi)
    return Interval(iv.lo, mid)


def _separate(coeffs: Sequence[Fraction], intervals: List[Interval]) -> List[Interval]:
    """Sort and bisect until consecutive intervals are separated."""
    out = sorted(set(intervals), key=lambda iv: (iv.lo, iv.hi))
    changed = True
    while changed:
        changed = False
        out.sort(key=lambda iv: (iv.lo, iv.hi))
        for i in range(len(out) - 1):
            a, b = out[i], out[i + 1]
            if a.before(b):
                continue
            if not a.is_point:
                out[i] = _bisect(coeffs, a)
            if not b.is_point:
                out[i + 1] = _bisect(coeffs, b)
            changed = True
            break
    return out


def _off_endpoints(u: Poly, coeffs: Sequence[Fraction], lo: Fraction, hi: Fraction) -> Interval:
    """Shrink (lo, hi), which holds one root inside, until neither end is a root."""
    while horner(coeffs, lo) == 0 or horner(coeffs, hi) == 0:
        mid = (lo + hi) / 2
        if horner(coeffs, mid) == 0:
            return Interval.point(mid)
        left = int(u.count_roots(_sympy_rat(lo), _sympy_rat(mid))) - (horner(coeffs, lo) == 0)
        lo, hi = (lo, mid) if left else (mid, hi)
    return Interval(lo, hi)


def isolate_real_roots_univariate(p: MPoly) -> List[Interval]:
    """Disjoint isolating intervals for the distinct real roots of p, ascending."""
    if p.is_zero:
        raise ArithmeticDomainError("identically zero")
    level, u = p.as_univariate()
    if level == 0:
        return []
    u = u.sqf_part()
    coeffs = _coeffs_desc(u)
    if u.degree() == 1:
        return [Interval.point(-coeffs[1] / coeffs[0])]
    found: List[Interval] = []
    for (a, b), _ in u.intervals():
        lo, hi = to_rat(a), to_rat(b)
        if lo == hi:
            found.append(Interval.point(lo))
            continue
        at_lo, at_hi = horner(coeffs, lo) == 0, horner(coeffs, hi) == 0
        inside = int(u.count_roots(_sympy_rat(lo), _sympy_rat(hi))) - at_lo - at_hi
        if inside == 1:
            found.append(_off_endpoints(u, coeffs, lo, hi))
        if at_lo:
            found.append(Interval.point(lo))
        if at_hi:
            found.append(Interval.point(hi))
    return _separate(coeffs, found)


def refine_interval(p: MPoly, iv: Interval, target_width: Number) -> Interval:
    """Bisect an isolating interval of p until its width is at most target_width."""
    _, u = p.as_univariate()
    u = u.sqf_part()
    coeffs = _coeffs_desc(u)
    if iv.is_point:
        if horner(coeffs, iv.lo) != 0:
            raise ArithmeticDomainError(f"{iv} does not isolate a root of {p}")
        return iv
    s_lo, s_hi = sign(horner(coeffs, iv.lo)), sign(horner(coeffs, iv.hi))
    if s_lo * s_hi >= 0 or u.count_roots(_sympy_rat(iv.lo), _sympy_rat(iv.hi)) != 1:
        raise ArithmeticDomainError(f"{iv} does not isolate a root of {p}")
    target = to_rat(target_width)
    while not iv.is_point and iv.width > target:
        iv = _bisect(coeffs, iv)
    return iv


def sturm_count(p: MPoly, lo: Optional[Number] = None, hi: Optional[Number] = None) -> int:
    """Number of distinct real roots in (lo, hi] by sign variations of a Sturm sequence.

    Unbounded ends use the leading-coefficient signs; this is an independent
    oracle for the isolation routine.
    """
    level, u = p.as_univariate()
    if level == 0:
        return 0
    seq = [Poly(s, u.gens[0], domain=QQ) for s in sturm(u.sqf_part())]

    def variations(x: Optional[Fraction], at_plus: bool) -> int:
        signs = []
        for s in seq:
            if x is None:
                c = sign(to_rat(s.LC()))
                if not at_plus and s.degree() % 2 == 1:
                    c = -c
            else:
                c = sign(horner(_coeffs_desc(s), to_rat(x)))
            if c:
                signs.append(c)
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    return variations(None if lo is None else lo, False) - variations(None if hi is None else hi, True)
