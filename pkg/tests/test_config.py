import importlib
import io
import logging
from fractions import Fraction

import pytest


def fresh_config(monkeypatch, **env):
    """Reload config with a clean PLCAD_* environment plus `env`."""
    import os

    for name in list(os.environ):
        if name.startswith("PLCAD_"):
            monkeypatch.delenv(name)
    for name, value in env.items():
        monkeypatch.setenv(name, value)
    import plcad.config as config

    return importlib.reload(config)


def test_defaults(monkeypatch):
    config = fresh_config(monkeypatch)
    opts = config.load_options()
    assert opts == config.Options(), f"unexpected defaults {opts}"
    assert opts.region == Fraction(10) and opts.verify_trials == 1000


def test_environment_values(monkeypatch):
    config = fresh_config(
        monkeypatch, PLCAD_WORKERS="3", PLCAD_MAX_CELLS="500", PLCAD_SEED="9", PLCAD_REGION="5/2"
    )
    opts = config.load_options()
    assert (opts.workers, opts.max_cells, opts.seed) == (3, 500, 9)
    assert opts.region == Fraction(5, 2)


def test_overrides_win_and_none_means_unset(monkeypatch):
    config = fresh_config(monkeypatch, PLCAD_SEED="9")
    opts = config.load_options(seed=1, workers=None)
    assert opts.seed == 1 and opts.workers == 1


@pytest.mark.parametrize(
    "env, message",
    [
        ({"PLCAD_WORKERS": "many"}, "PLCAD_WORKERS must be an integer"),
        ({"PLCAD_WORKERS": "0"}, "at least 1"),
        ({"PLCAD_REGION": "-1"}, "positive"),
        ({"PLCAD_REGION": "wide"}, "rational"),
    ],
)
def test_bad_environment(monkeypatch, env, message):
    config = fresh_config(monkeypatch, **env)
    with pytest.raises(ValueError, match=message):
        config.load_options()


def test_unknown_override(monkeypatch):
    config = fresh_config(monkeypatch)
    with pytest.raises(ValueError, match="unknown option"):
        config.load_options(colour=True)


def test_should_color(monkeypatch):
    config = fresh_config(monkeypatch)
    assert not config.should_color(io.StringIO()), "pipes are never coloured"
    config = fresh_config(monkeypatch, PLCAD_NO_COLOR="1")

    class Tty(io.StringIO):
        def isatty(self):
            return True

    assert not config.should_color(Tty())


def test_configure_logging_levels(monkeypatch):
    config = fresh_config(monkeypatch, PLCAD_LOG_LEVEL="error")
    config.configure_logging(0)
    assert logging.getLogger("plcad").level == logging.ERROR
    config.configure_logging(2)
    logger = logging.getLogger("plcad")
    assert logger.level == logging.DEBUG
    assert len(logger.handlers) == 1, "reconfiguring replaces the handler"
