import pytest

from conftest import mk, random_system
from plcad.arith import MPoly, squarefree_coprime_basis
from plcad.errors import ArithmeticDomainError, ECLostInBasis, NothingToDecompose
from plcad.projection import (
    OperatorKind,
    Projection,
    collins_project,
    mccallum_project,
    projection_phase,
    projection_summary,
    reduced_projection_ec,
)


def as_set(polys):
    return {str(p) for p in polys}


def basis_set(polys):
    return as_set(squarefree_coprime_basis(polys)) if polys else set()


def test_mccallum_examples(xy):
    circle = mk("y^2 + x^2 - 1", xy)
    assert basis_set(mccallum_project([circle], 2)) == {"x - 1", "x + 1"}
    assert as_set(mccallum_project([mk("y - x", xy)], 2)) == {"x"}
    assert mccallum_project([mk("y^2 + 1", xy)], 2) == [], "constants are dropped"


def test_mccallum_rejects_wrong_level(xy):
    with pytest.raises(ArithmeticDomainError):
        mccallum_project([mk("x - 1", xy)], 2)


def test_collins_contains_mccallum(xy):
    B = [mk("y^2 + x^2 - 1", xy), mk("y - x", xy)]
    mc = basis_set(mccallum_project(B, 2))
    co = basis_set(collins_project(B, 2))
    assert mc <= co, f"McCallum factors {mc - co} missing from Collins"
    assert as_set(collins_project([mk("y - x", xy)], 2)) == {"x"}


def test_reduced_projection_ec(xy):
    ec, line = mk("y^2 + x^2 - 1", xy), mk("y - x", xy)
    out = as_set(reduced_projection_ec([ec, line], ec, 2))
    assert out == {"x^2 - 1", "2*x^2 - 1"}, f"unexpected reduced projection {out}"
    alone = reduced_projection_ec([ec], ec, 2)
    assert alone == mccallum_project([ec], 2)
    full = basis_set(mccallum_project([ec, line], 2))
    assert basis_set(reduced_projection_ec([ec, line], ec, 2)) <= full


def test_reduced_projection_lost_ec(xy):
    with pytest.raises(ECLostInBasis):
        reduced_projection_ec([mk("y - x", xy)], mk("y + x", xy), 2)


def test_projection_phase_circle(xy):
    sets = projection_phase([mk("x^2 + y^2 - 1", xy)], OperatorKind.mccallum(), xy)
    assert as_set(sets.level(2)) == {"x^2 + y^2 - 1"}
    assert as_set(sets.level(1)) == {"x - 1", "x + 1"}
    assert projection_summary(sets) == {"y": ["x^2 + y^2 - 1"], "x": ["x - 1", "x + 1"]}


def test_projection_phase_univariate(x_only):
    sets = projection_phase([mk("x - 1", x_only)], OperatorKind.collins(), x_only)
    assert as_set(sets.level(1)) == {"x - 1"}


def test_projection_phase_lines(xy):
    sets = projection_phase([mk("y - x", xy), mk("y + x", xy)], OperatorKind.mccallum(), xy)
    assert "x" in as_set(sets.level(1))


def test_projection_phase_keeps_contents(xy):
    sets = projection_phase([mk("x*y^2 + x", xy)], OperatorKind.mccallum(), xy)
    assert as_set(sets.level(2)) == {"y^2 + 1"}
    assert as_set(sets.level(1)) == {"x"}, "the content x joins level 1"


def test_projection_phase_ec_factors(xy):
    F = [mk("x^2 + y^2 - 1", xy), mk("y - x", xy)]
    sets = projection_phase(F, OperatorKind.reduced_ec(0), xy)
    assert as_set(sets.ec_factors) == {"x^2 + y^2 - 1"}
    full = projection_phase(F, OperatorKind.mccallum(), xy)
    assert as_set(sets.level(1)) <= as_set(full.level(1))


def test_projection_phase_nothing_to_decompose(xy):
    with pytest.raises(NothingToDecompose, match="nothing to decompose"):
        projection_phase([MPoly.constant(3, xy)], OperatorKind.mccallum(), xy)


def test_operator_kind_validation():
    assert OperatorKind.reduced_ec(1).label == "mccallum-ec"
    assert not OperatorKind.collins().is_mccallum_family
    with pytest.raises(ValueError):
        OperatorKind(Projection.MCCALLUM_EC)
    with pytest.raises(ValueError):
        OperatorKind(Projection.COLLINS, 0)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_collins_contains_mccallum_on_random_systems(xy, seed):
    B = [b for b in squarefree_coprime_basis(random_system(seed, xy)) if b.level == 2]
    mc = basis_set(mccallum_project(B, 2))
    co = basis_set(collins_project(B, 2))
    assert mc <= co, f"McCallum factors {mc - co} missing from Collins for {B}"
