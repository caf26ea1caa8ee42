import pytest

from conftest import mk
from plcad.errors import InputError
from plcad.parse import dump_job, parse_input
from plcad.projection import OperatorKind


def test_parse_circle_job(xy):
    job = parse_input("vars: x, y\npoly: x^2 + y^2 - 1")
    assert job.order == xy
    assert job.polynomials == (mk("x^2 + y^2 - 1", xy),)
    assert job.operator == OperatorKind.mccallum()
    assert job.output == "text" and job.ec is None


def test_parse_univariate_job(x_only):
    job = parse_input("vars: x\npoly: x - 1")
    assert job.order.n == 1 and job.polynomials == (mk("x - 1", x_only),)


def test_parse_rationals_and_comments(xy):
    job = parse_input("# two curves\nvars: x, y\n\npoly: y - x/2   # line\npoly: 3/4*y^2 - x\n")
    assert job.polynomials == (mk("y - x/2", xy), mk("3/4*y^2 - x", xy))


def test_parse_ec_is_one_based():
    job = parse_input("vars: x, y\npoly: x^2 + y^2 - 1\npoly: y - x\nec: 2")
    assert job.operator == OperatorKind.reduced_ec(1)
    assert job.ec == 1


def test_missing_vars():
    with pytest.raises(InputError, match="variables undeclared"):
        parse_input("poly: x")


def test_unknown_variable_has_position():
    with pytest.raises(InputError) as info:
        parse_input("vars: x, y\npoly: x + q")
    assert info.value.line == 2
    assert info.value.column == 11, "column of q"
    assert "unknown variable 'q'" in str(info.value)


def test_syntax_error():
    with pytest.raises(InputError, match="syntax error"):
        parse_input("vars: x\npoly: x + * 2")


def test_bad_character():
    with pytest.raises(InputError, match="unexpected character"):
        parse_input("vars: x\npoly: x $ 2")


def test_not_a_polynomial():
    with pytest.raises(InputError, match="not a polynomial"):
        parse_input("vars: x\npoly: 1/x")


@pytest.mark.parametrize(
    "text, message",
    [
        ("vars: x\npoly: x\nec: 2", "out of range"),
        ("vars: x\npoly: x\noperator: collins\nec: 1", "mccallum"),
        ("vars: x\npoly: x\noutput: svg", "two variables"),
        ("vars: x\npoly: x\noperator: lazard", "operator must be"),
        ("vars: x, x\npoly: x", "repeated variable"),
        ("vars: x\nfoo: 1", "unknown key"),
        ("vars: x\nvars: y", "given twice"),
        ("vars: x\npoly: x\nseed: -1", "at least 0"),
        ("vars: x\npoly x", "key: value"),
    ],
)
def test_input_errors(text, message):
    with pytest.raises(InputError, match=message):
        parse_input(text)


def test_dump_round_trip():
    source = "vars: x, y\npoly: x^2 + y^2 - 1\npoly: y - x\nec: 1\noutput: json\nseed: 4\nmax-cells: 90\nverify: 2\n"
    job = parse_input(source)
    again = parse_input(dump_job(job))
    assert again == job, "dumped input must parse back to the same job"
    collins = parse_input("vars: x\npoly: x^3 - x\noperator: collins")
    assert parse_input(dump_job(collins)) == collins
