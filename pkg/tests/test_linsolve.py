"""Exact and float solving of the square family systems.

The expected blocks in _expected.py are frozen from the reference
solutions of the two smallest instances; the chain closed form
i_GND = 12 * 71 / (17000 n) covers every other size.
"""

from fractions import Fraction

import pytest

from _expected import BE_EXPECTED, FE1_EXPECTED
from netbench import ir, netgen
from netbench.errors import NotSquare, SingularSystem, StructuralError
from netbench.ir import ConstraintSystem, LinearConstraint, Relation
from netbench.linsolve import Elimination, solve_exact, solve_f64
from netbench.netgen import FamilySpec

F = Fraction


def system_for(spec: FamilySpec) -> ConstraintSystem:
    return ir.lower(netgen.build(spec))


def test_be_exact_vector():
    solved = solve_exact(system_for(FamilySpec.be()))
    assert solved.as_dict() == BE_EXPECTED


def test_be_float_vector():
    solved = solve_f64(system_for(FamilySpec.be()))
    for name, expected in BE_EXPECTED.items():
        assert solved[name] == pytest.approx(float(expected), abs=1e-8)


def test_fe1_matches_reference_block():
    assert len(FE1_EXPECTED) == 48
    solved = solve_f64(system_for(FamilySpec.fe(1)))
    for name, expected in FE1_EXPECTED.items():
        assert abs(solved[name] - expected) <= 1e-8, name


def test_fe1_exact_spot_values():
    solved = solve_exact(system_for(FamilySpec.fe(1)))
    assert solved["i_GND"] == F(213, 4250)
    assert solved["i_SRC"] == F(-213, 4250)
    assert solved["i2_R5"] == F(3, 2125)
    assert solved["i1_R5"] == F(-3, 2125)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 20])
def test_fe_ground_current_closed_form(n):
    solved = solve_exact(system_for(FamilySpec.fe(n)))
    assert solved["i_GND"] == F(12) * F(71, 17000) / n


@pytest.mark.parametrize("n", [1, 4, 12])
def test_float_tracks_exact(n):
    system = system_for(FamilySpec.fe(n))
    exact = solve_exact(system)
    floats = solve_f64(system)
    for name, value in exact.items():
        reference = float(value)
        assert abs(floats[name] - reference) <= 1e-9 * max(1.0, abs(reference))


def test_exact_solution_satisfies_every_row():
    system = system_for(FamilySpec.fe(3))
    solved = solve_exact(system)
    point = solved.as_dict()
    assert all(row.satisfied_by(point) for row in system.rows)


def test_source_voltage_scales_linearly():
    base = solve_exact(system_for(FamilySpec.be()))
    doubled = solve_exact(system_for(FamilySpec.be(source_voltage=F(24))))
    assert doubled["i_GND"] == 2 * base["i_GND"]


def _tiny(rows, names=("x", "y")):
    return ConstraintSystem(
        names,
        (),
        tuple(LinearConstraint(t, Relation.EQ, r) for t, r in rows),
    )


def test_underdetermined_rejected():
    system = _tiny([({"x": F(1), "y": F(1)}, F(1))])
    with pytest.raises(NotSquare):
        solve_exact(system)


def test_singular_square_rejected():
    system = _tiny(
        [({"x": F(1), "y": F(1)}, F(1)), ({"x": F(2), "y": F(2)}, F(2))]
    )
    with pytest.raises(SingularSystem):
        solve_exact(system)


def test_inconsistent_square_rejected():
    system = _tiny(
        [({"x": F(1), "y": F(1)}, F(1)), ({"x": F(2), "y": F(2)}, F(3))]
    )
    with pytest.raises(SingularSystem):
        solve_exact(system)


def test_solvers_reject_inequality_rows():
    rows = (
        LinearConstraint({"x": F(1)}, Relation.GE, F(0)),
        LinearConstraint({"x": F(1)}, Relation.EQ, F(1)),
    )
    system = ConstraintSystem(("x",), (), rows)
    with pytest.raises(StructuralError):
        solve_exact(system)
    with pytest.raises(StructuralError):
        solve_f64(system)


def test_elimination_clone_is_independent():
    base = Elimination(2)
    base.add_row({0: F(1), 1: F(1)}, F(3))
    base.run()
    twin = base.clone()
    base.add_and_run({0: F(1), 1: F(-1)}, F(1))
    twin.add_and_run({0: F(1), 1: F(-1)}, F(-1))
    assert base.solution() == [F(2), F(1)]
    assert twin.solution() == [F(1), F(2)]


def test_elimination_reports_contradiction():
    elim = Elimination(1)
    elim.add_row({0: F(1)}, F(1))
    elim.add_row({0: F(1)}, F(2))
    elim.run()
    assert elim.infeasible
