"""Line-oriented job input.

    # unit circle
    vars: x, y
    poly: x^2 + y^2 - 1
    operator: mccallum

Keys: vars, poly (repeatable), operator, ec (1-based), output, seed,
max-cells, verify (samples per cell). Text after '#' is a comment.
"""

import re
from dataclasses import dataclass, field
from tokenize import TokenError
from typing import List, Optional, Tuple

from sympy import Symbol
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from sympy.polys.polyerrors import PolynomialError

from .arith import MPoly, VarOrder
from .errors import InputError
from .projection import OperatorKind

KEYS = ("vars", "poly", "operator", "ec", "output", "seed", "max-cells", "verify")
OPERATORS = ("collins", "mccallum")
OUTPUTS = ("text", "json", "svg")

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
TOKEN_RE = re.compile(r"\s+|\d+|[A-Za-z_][A-Za-z0-9_]*|[-+*/^()]")

TRANSFORMS = standard_transformations + (convert_xor,)


@dataclass(frozen=True)
class Located:
    """A raw value with the 1-based line and column it came from (None for flags)."""

    text: str
    line: Optional[int] = None
    column: Optional[int] = None

    def error(self, message: str, offset: int = 0) -> InputError:
        column = None if self.column is None else self.column + offset
        return InputError(message, self.line, column)


@dataclass
class RawJob:
    vars: Optional[Located] = None
    polys: List[Located] = field(default_factory=list)
    operator: Optional[Located] = None
    ec: Optional[Located] = None
    output: Optional[Located] = None
    seed: Optional[Located] = None
    max_cells: Optional[Located] = None
    verify: Optional[Located] = None


@dataclass(frozen=True)
class JobSpec:
    polynomials: Tuple[MPoly, ...]
    order: VarOrder
    operator: OperatorKind
    output: str = "text"
    verify: Optional[int] = None
    seed: Optional[int] = None
    max_cells: Optional[int] = None

    @property
    def ec(self) -> Optional[int]:
        """0-based index of the equational constraint, if any."""
        return self.operator.ec_index


# =========================
# Reading
# =========================
def read_job(source: str) -> RawJob:
    raw = RawJob()
    for lineno, line in enumerate(source.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        if ":" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise InputError("expected 'key: value'", lineno, col)
        key, _, value = body.partition(":")
        name = key.strip().lower()
        if name not in KEYS:
            raise InputError(f"unknown key {name!r}", lineno, len(key) - len(key.lstrip()) + 1)
        col = len(key) + 2 + (len(value) - len(value.lstrip()))
        item = Located(value.strip(), lineno, col)
        if name == "poly":
            raw.polys.append(item)
        else:
            attr = name.replace("-", "_")
            if getattr(raw, attr) is not None:
                raise InputError(f"{name!r} given twice", lineno, 1)
            setattr(raw, attr, item)
    return raw


def _parse_vars(item: Optional[Located]) -> VarOrder:
    if item is None:
        raise InputError("variables undeclared")
    names = [n.strip() for n in item.text.split(",")]
    offset = 0
    for name in names:
        if not NAME_RE.fullmatch(name):
            raise item.error(f"bad variable name {name!r}", item.text.find(name, offset) if name else offset)
        offset = item.text.find(name, offset) + len(name)
    if len(set(names)) != len(names):
        raise item.error("repeated variable")
    return VarOrder(tuple(names))


def _check_tokens(item: Located, order: VarOrder) -> None:
    text = item.text
    pos = 0
    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        if m is None:
            raise item.error(f"unexpected character {text[pos]!r}", pos)
        tok = m.group()
        if NAME_RE.fullmatch(tok) and tok not in order.names:
            raise item.error(f"unknown variable {tok!r}", pos)
        pos = m.end()


def parse_polynomial(item: Located, order: VarOrder) -> MPoly:
    text = item.text.replace("−", "-")
    item = Located(text, item.line, item.column)
    if not text:
        raise item.error("empty polynomial")
    _check_tokens(item, order)
    local = {name: Symbol(name) for name in order.names}
    try:
        expr = parse_expr(text, local_dict=local, transformations=TRANSFORMS)
        return MPoly.from_expr(expr, order)
    except PolynomialError:
        raise item.error("not a polynomial") from None
    except (SyntaxError, TypeError, ValueError, TokenError) as exc:
        raise item.error("syntax error") from exc


def _int(item: Optional[Located], key: str, minimum: int) -> Optional[int]:
    if item is None:
        return None
    try:
        value = int(item.text)
    except ValueError:
        raise item.error(f"{key} must be an integer") from None
    if value < minimum:
        raise item.error(f"{key} must be at least {minimum}")
    return value


def resolve_job(raw: RawJob) -> JobSpec:
    """Check a raw job and canonicalize its polynomials under the declared order."""
    order = _parse_vars(raw.vars)
    polys = tuple(parse_polynomial(p, order) for p in raw.polys)
    operator = raw.operator.text.lower() if raw.operator else "mccallum"
    if operator not in OPERATORS:
        raise raw.operator.error(f"operator must be one of {', '.join(OPERATORS)}")
    output = raw.output.text.lower() if raw.output else "text"
    if output not in OUTPUTS:
        raise raw.output.error(f"output must be one of {', '.join(OUTPUTS)}")
    if output == "svg" and order.n != 2:
        raise raw.output.error("svg output needs exactly two variables")
    ec = _int(raw.ec, "ec", 1)
    if ec is not None:
        if operator != "mccallum":
            raise raw.ec.error("ec only applies to the mccallum operator")
        if ec > len(polys):
            raise raw.ec.error(f"ec index {ec} out of range (1..{len(polys)})")
        kind = OperatorKind.reduced_ec(ec - 1)
    else:
        kind = OperatorKind.collins() if operator == "collins" else OperatorKind.mccallum()
    return JobSpec(
        polynomials=polys,
        order=order,
        operator=kind,
        output=output,
        verify=_int(raw.verify, "verify", 0),
        seed=_int(raw.seed, "seed", 0),
        max_cells=_int(raw.max_cells, "max-cells", 1),
    )


def parse_input(source: str) -> JobSpec:
    return resolve_job(read_job(source))


# =========================
# Writing
# =========================
def dump_job(job: JobSpec) -> str:
    """Input text that parses back to an equivalent job."""
    lines = [f"vars: {', '.join(job.order.names)}"]
    lines.extend(f"poly: {p}" for p in job.polynomials)
    lines.append(f"operator: {'collins' if job.operator.label == 'collins' else 'mccallum'}")
    if job.ec is not None:
        lines.append(f"ec: {job.ec + 1}")
    lines.append(f"output: {job.output}")
    for key, value in (("seed", job.seed), ("max-cells", job.max_cells), ("verify", job.verify)):
        if value is not None:
            lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"
