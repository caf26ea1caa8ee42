"""Writers for built decompositions: plain text, a JSON cell tree and SVG plots."""

import json
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Union

from jinja2 import Environment, PackageLoader, select_autoescape

from .arith import Interval, MPoly, refine_interval
from .chains import SamplePoint, fiber, isolate_fiber, refine_point
from .errors import InputError
from .lifting import CAD, Cell, Failure
from .projection import projection_summary

log = logging.getLogger(__name__)

SCHEMA = "plcad-cad/1"
SIGN_CHARS = {-1: "-", 0: "0", 1: "+"}

WIDTH, HEIGHT, MARGIN = 640, 480, 24
CURVE_STEPS = 24


# =========================
# Shared helpers
# =========================
def _coordinate(t: MPoly, iv: Interval) -> Dict[str, object]:
    if iv.is_point:
        return {"value": str(iv.lo)}
    return {"polynomial": str(t), "interval": [str(iv.lo), str(iv.hi)]}


def _sample_json(sp: SamplePoint) -> List[Dict[str, object]]:
    return [_coordinate(t, iv) for t, iv in sp.items()]


def _signs(cad: CAD, cell: Cell) -> List[int]:
    return cad.signs(cell, cad.polys)


# =========================
# Text
# =========================
def _text(cad: CAD, show_projection: bool) -> str:
    lines = []
    if show_projection:
        for name, polys in projection_summary(cad.proj).items():
            lines.append(f"# P[{name}]: {', '.join(polys) if polys else '(none)'}")
    for cell in cad.cells():
        signs = "".join(SIGN_CHARS[s] for s in _signs(cad, cell))
        lines.append(f"{cell.index}  dim {cell.dimension}  sample {cell.sample}  signs [{signs}]")
    return "\n".join(lines) + "\n"


# =========================
# JSON
# =========================
def _node(cad: CAD, cell: Cell) -> Dict[str, object]:
    node: Dict[str, object] = {
        "index": list(cell.index.entries),
        "dimension": cell.dimension,
        "sample": _sample_json(cell.sample),
    }
    if cell.level == len(cad.levels):
        node["signs"] = _signs(cad, cell)
    else:
        node["children"] = [_node(cad, c) for c in cad.stack_over(cell).cells]
    return node


def to_json_dict(result: Union[CAD, Failure], verification: Sequence = ()) -> Dict[str, object]:
    if isinstance(result, Failure):
        out: Dict[str, object] = {
            "schema": SCHEMA,
            "result": "FAIL",
            "cell": {
                "index": list(result.cell.index.entries),
                "dimension": result.cell.dimension,
                "sample": _sample_json(result.cell.sample),
            },
            "polynomial": str(result.polynomial),
            "level": result.level,
        }
        return out
    cad = result
    ec = cad.operator.ec_index
    out = {
        "schema": SCHEMA,
        "result": "CAD",
        "variables": list(cad.order.names),
        "operator": cad.operator.label,
        "ec": None if ec is None else ec + 1,
        "polynomials": [str(p) for p in cad.polys],
        "counts": cad.counts(),
        "projection": projection_summary(cad.proj),
        "tree": {"index": [], "children": [_node(cad, c) for c in cad.cells(1)]},
    }
    if verification:
        out["verification"] = [r.to_dict() for r in verification]
    return out


# =========================
# SVG
# =========================
def _environment() -> Environment:
    return Environment(
        loader=PackageLoader("plcad", "templates"),
        autoescape=select_autoescape(enabled_extensions=("j2",)),
        trim_blocks=True,
        lstrip_blocks=True,
    )


def _approx(sp: SamplePoint, level: int, width: Fraction = Fraction(1, 256)) -> float:
    while sp.interval(level).width > width:
        sp = refine_point(sp)
    return float(sp.interval(level).midpoint)


def _roots_at(cell: Cell, cad: CAD, x: Fraction) -> List[float]:
    """Approximate y-roots of the stack over a base sector at the rational abscissa x."""
    order = cad.order
    point = SamplePoint.empty().extend(MPoly.variable(1, order), Interval.point(x))
    prod = None
    for p in cad.stack_over(cell).lifting_set.members:
        f = fiber(p.subs({1: x}), point, 2)
        if f.degree(2) >= 1:
            prod = f if prod is None else prod * f
    if prod is None:
        return []
    entry, ivs = isolate_fiber(prod, point, 2)
    return [float(refine_interval(entry, iv, Fraction(1, 512)).midpoint) for iv in ivs]


class _View:
    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        self.x0, self.x1 = min(xs), max(xs)
        self.y0, self.y1 = min(ys), max(ys)
        if self.x1 - self.x0 < 1e-9:
            self.x0, self.x1 = self.x0 - 1, self.x1 + 1
        if self.y1 - self.y0 < 1e-9:
            self.y0, self.y1 = self.y0 - 1, self.y1 + 1

    def sx(self, x: float) -> float:
        return MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2 * MARGIN)

    def sy(self, y: float) -> float:
        return HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2 * MARGIN)


def _svg(cad: CAD) -> str:
    if len(cad.levels) != 2:
        raise InputError("svg output needs exactly two variables")
    base_cells = cad.cells(1)
    top = cad.cells(2)
    xs = [_approx(c.sample, 1) for c in base_cells]
    ys = [_approx(c.sample, 2) for c in top]
    view = _View(xs, ys)

    bands, walls, curves = [], [], []
    edges = [view.x0] + [x for c, x in zip(base_cells, xs) if c.index.is_section] + [view.x1]
    for k, cell in enumerate(c for c in base_cells if not c.index.is_section):
        left, right = edges[k], edges[k + 1]
        bands.append({
            "x": f"{view.sx(left):.2f}",
            "width": f"{view.sx(right) - view.sx(left):.2f}",
            "fill": "#eef3f8" if k % 2 == 0 else "#f8f8ee",
            "label": str(cell.index),
        })
        steps = [left + (right - left) * (i + 0.5) / CURVE_STEPS for i in range(CURVE_STEPS)]
        tracks: Dict[int, List[str]] = {}
        for x in steps:
            q = Fraction(x).limit_denominator(1 << 16)
            for j, y in enumerate(_roots_at(cell, cad, q)):
                y = min(max(y, view.y0), view.y1)
                tracks.setdefault(j, []).append(f"{view.sx(x):.2f},{view.sy(y):.2f}")
        curves.extend(" ".join(pts) for _, pts in sorted(tracks.items()))
    for cell, x in zip(base_cells, xs):
        if cell.index.is_section:
            walls.append({"x": f"{view.sx(x):.2f}", "label": str(cell.index)})

    points = []
    for cell in top:
        x, y = _approx(cell.sample, 1), _approx(cell.sample, 2)
        points.append({
            "cx": f"{view.sx(x):.2f}",
            "cy": f"{view.sy(y):.2f}",
            "dimension": cell.dimension,
            "label": f"{cell.index} dim {cell.dimension}",
        })
    template = _environment().get_template("cad.svg.j2")
    return template.render(
        width=WIDTH,
        height=HEIGHT,
        margin=MARGIN,
        title=" ; ".join(str(p) for p in cad.polys),
        bands=bands,
        walls=walls,
        curves=curves,
        points=points,
    )


# =========================
# Entry point
# =========================
def emit(
    result: Union[CAD, Failure],
    fmt: str = "text",
    verification: Sequence = (),
    show_projection: bool = False,
) -> bytes:
    """Serialize a build result; FAIL results carry the offending cell and polynomial."""
    if fmt == "json":
        data = json.dumps(to_json_dict(result, verification), indent=2) + "\n"
    elif isinstance(result, Failure):
        data = str(result) + "\n"
    elif fmt == "text":
        data = _text(result, show_projection)
    elif fmt == "svg":
        data = _svg(result)
    else:
        raise InputError(f"unknown output format {fmt!r}")
    return data.encode("utf-8")
