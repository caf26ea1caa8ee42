"""plcad: cylindrical algebraic decomposition by projection and lifting,
with sample points encoded as regular chains."""

from .arith import Interval, MPoly, VarOrder
from .chains import RegularChain, SamplePoint
from .errors import PLCADError
from .lifting import CAD, Cell, CellIndex, Failure, Stack, build_cad
from .parse import JobSpec, parse_input
from .projection import OperatorKind

__version__ = "0.1.0"

__all__ = [
    "CAD",
    "Cell",
    "CellIndex",
    "Failure",
    "Interval",
    "JobSpec",
    "MPoly",
    "OperatorKind",
    "PLCADError",
    "RegularChain",
    "SamplePoint",
    "Stack",
    "VarOrder",
    "build_cad",
    "parse_input",
]
