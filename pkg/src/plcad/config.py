import logging
import os
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

# =========================
# Environment / constants
# =========================
ENV_WORKERS = "PLCAD_WORKERS"
ENV_MAX_CELLS = "PLCAD_MAX_CELLS"
ENV_SEED = "PLCAD_SEED"
ENV_VERIFY_SAMPLES = "PLCAD_VERIFY_SAMPLES"
ENV_VERIFY_TRIALS = "PLCAD_VERIFY_TRIALS"
ENV_REGION = "PLCAD_REGION"
ENV_NO_COLOR = "PLCAD_NO_COLOR"
ENV_LOG_LEVEL = "PLCAD_LOG_LEVEL"

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


# =========================
# Options
# =========================
@dataclass(frozen=True)
class Options:
    workers: int = 1
    max_cells: Optional[int] = None
    seed: int = 0
    verify_samples: int = 5
    verify_trials: int = 1000
    region: Fraction = Fraction(10)


def _env_int(name: str, default: Optional[int], minimum: int) -> Optional[int]:
    raw = os.environ.get(name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None
    if value < minimum:
        raise ValueError(f"{name} must be at least {minimum}, got {value}")
    return value


def _env_region(default: Fraction) -> Fraction:
    raw = os.environ.get(ENV_REGION, "").strip()
    if not raw:
        return default
    try:
        value = Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"{ENV_REGION} must be a rational number, got {raw!r}") from None
    if value <= 0:
        raise ValueError(f"{ENV_REGION} must be positive, got {raw}")
    return value


def load_options(**overrides) -> Options:
    """Defaults from the environment; keyword overrides (None means "not given") win."""
    base = Options(
        workers=_env_int(ENV_WORKERS, 1, 1),
        max_cells=_env_int(ENV_MAX_CELLS, None, 1),
        seed=_env_int(ENV_SEED, 0, 0),
        verify_samples=_env_int(ENV_VERIFY_SAMPLES, 5, 0),
        verify_trials=_env_int(ENV_VERIFY_TRIALS, 1000, 0),
        region=_env_region(Fraction(10)),
    )
    given = {k: v for k, v in overrides.items() if v is not None}
    unknown = set(given) - set(Options.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown option(s): {', '.join(sorted(unknown))}")
    if given.get("workers", 1) < 1:
        raise ValueError("workers must be at least 1")
    if given.get("max_cells", 1) < 1:
        raise ValueError("max-cells must be at least 1")
    return replace(base, **given)


def should_color(stream=None) -> bool:
    if os.environ.get(ENV_NO_COLOR, "").lower() in ("1", "true", "yes"):
        return False
    stream = stream or sys.stdout
    try:
        return stream.isatty()
    except Exception:
        return False


def configure_logging(verbosity: int = 0) -> None:
    """Send library logs to stderr; -v gives INFO, -vv DEBUG."""
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, os.environ.get(ENV_LOG_LEVEL, "WARNING").upper(), logging.WARNING)
    root = logging.getLogger("plcad")
    for old in [h for h in root.handlers if getattr(h, "_plcad", False)]:
        root.removeHandler(old)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._plcad = True
    root.addHandler(handler)
    root.setLevel(level)
