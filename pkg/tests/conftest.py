import logging
import os
import random
import sys
from itertools import product

import pytest
from sympy import sympify

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "src"))

from plcad.arith import MPoly, VarOrder  # noqa: E402

EXAMPLES = os.path.join(ROOT, "data", "examples")


def mk(text: str, order: VarOrder) -> MPoly:
    """Polynomial from '^'-style text over the given order."""
    return MPoly.from_expr(sympify(text.replace("^", "**")), order)


def random_poly(rng: random.Random, order: VarOrder, degree: int = 3, bound: int = 5) -> MPoly:
    """Integer polynomial of total degree <= degree that involves the top variable."""
    while True:
        terms = {
            m: rng.randint(-bound, bound)
            for m in product(range(degree + 1), repeat=order.n)
            if sum(m) <= degree and rng.random() < 0.5
        }
        p = MPoly.from_dict(terms, order)
        if p.level == order.n:
            return p


def random_system(seed: int, order: VarOrder, count: int = 2, degree: int = 3):
    rng = random.Random(seed)
    return [random_poly(rng, order, degree) for _ in range(count)]


@pytest.fixture
def x_only():
    return VarOrder(("x",))


@pytest.fixture
def xy():
    return VarOrder(("x", "y"))


@pytest.fixture
def xyz():
    return VarOrder(("x", "y", "z"))


@pytest.fixture
def example_path():
    def path(name: str) -> str:
        return os.path.join(EXAMPLES, name)

    return path


@pytest.fixture(autouse=True)
def _detach_cli_logging():
    """The CLI binds a handler to the runner's stderr; drop it after each test."""
    yield
    logger = logging.getLogger("plcad")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
