"""Exception hierarchy shared by every plcad module."""

from typing import Optional


class PLCADError(Exception):
    """Base class for all errors raised by plcad."""

    exit_code = 3


# =========================
# User-facing errors (exit code 2)
# =========================
class UserError(PLCADError):
    exit_code = 2


class InputError(UserError):
    """Malformed job input; carries a 1-based line and column when known."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)


class NothingToDecompose(UserError):
    def __init__(self, message: str = "nothing to decompose"):
        super().__init__(message)


class ECLostInBasis(UserError):
    def __init__(self, message: str = "EC lost in basis"):
        super().__init__(message)


class BudgetExceeded(UserError):
    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"budget exceeded: more than {limit} cells")


# =========================
# Arithmetic / chain errors
# =========================
class ArithmeticDomainError(PLCADError, ValueError):
    """An operation was called outside its mathematical domain."""


class ChainError(PLCADError, ValueError):
    """Malformed regular chain or sample point."""


class RequiresSplit(ChainError):
    """A computation modulo a chain hit a polynomial that is neither zero nor regular."""

    def __init__(self, polynomial):
        self.polynomial = polynomial
        super().__init__(f"requires split on {polynomial}")


class PositiveDimensional(ChainError):
    def __init__(self, message: str = "unsupported: general triangularize"):
        super().__init__(message)


# =========================
# Internal errors (exit code 3)
# =========================
class PreprocessingFailed(PLCADError):
    def __init__(self, detail: str = ""):
        msg = "preprocessing failed"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class MalformedCAD(PLCADError):
    pass
