"""Lowering netlists to constraint systems, and the system transforms."""

from fractions import Fraction

import pytest

from netbench import ir
from netbench.errors import (
    NonlinearResidue,
    StructuralError,
    UnsupportedStrict,
)
from netbench.ir import (
    ConstraintSystem,
    Disjunction,
    LinearConstraint,
    ModeAssignment,
    Relation,
)
from netbench.linsolve import solve_exact
from netbench.netgen import FamilySpec, Orientation, ResistorSpec, build


def lower(spec: FamilySpec) -> ConstraintSystem:
    return ir.lower(build(spec))


BE = FamilySpec.be()
BE_TOL = FamilySpec.be(ResistorSpec(Fraction(100), Fraction(1, 10)))
BE_ALT = FamilySpec.be(ResistorSpec(Fraction(100), alternates=(Fraction(90), Fraction(110))))


def test_fe1_variable_names_follow_port_convention():
    system = lower(FamilySpec.fe(1))
    names = set(system.variables)
    assert len(names) == 48
    # one-box instances carry no box suffix
    assert {"i1_R1", "u2_R5", "i3_N4", "u_SRC", "i_GND"} <= names
    assert not any(v.endswith("_B1") for v in names)


def test_multi_box_suffixes():
    system = lower(FamilySpec.fe(2))
    assert "i1_R1_B1" in system.variables
    assert "i1_R1_B2" in system.variables
    assert "u1_N2_B1" in system.variables


def test_every_fe_row_is_an_equality():
    system = lower(FamilySpec.fe(2))
    assert all(isinstance(r, LinearConstraint) for r in system.rows)
    assert all(r.relation is Relation.EQ for r in system.rows)


def test_se_disjunction_shape():
    system = lower(FamilySpec.se(2))
    disjunctions = system.disjunctions
    assert [d.label for d in disjunctions] == ["D1_B1", "D4_B1", "D1_B2", "D4_B2"]
    for d in disjunctions:
        assert d.branch_tags == ("Conducting", "Blocking")
        assert d.num_branches == 2
        # conducting: zero drop and forward current; blocking: reverse bias, no current
        conducting, blocking = d.branches
        assert [c.relation for c in conducting] == [Relation.EQ, Relation.GE]
        assert [c.relation for c in blocking] == [Relation.LT, Relation.EQ]


def test_instantiate_keeps_square_equality_core():
    system = lower(FamilySpec.se(1))
    mode = ModeAssignment.of({"D1": 1, "D4": 0})
    inst = ir.instantiate(system, mode)
    eq_rows = [r for r in inst.rows if r.relation is Relation.EQ]
    others = [r for r in inst.rows if r.relation is not Relation.EQ]
    assert len(eq_rows) == len(inst.variables)
    assert len(others) == 2
    assert not inst.disjunctions


def test_instantiate_rejects_incomplete_mode():
    system = lower(FamilySpec.se(1))
    with pytest.raises(StructuralError):
        ir.instantiate(system, ModeAssignment.of({"D1": 0}))
    with pytest.raises(StructuralError):
        ir.instantiate(system, ModeAssignment.of({"D1": 5, "D4": 0}))


def test_equality_part_keeps_the_square_core():
    system = lower(FamilySpec.se(1))
    inst = ir.instantiate(system, ModeAssignment.of({"D1": 1, "D4": 0}))
    core = ir.equality_part(inst)
    assert all(r.relation is Relation.EQ for r in core.rows)
    assert core.num_constraints == len(core.variables)
    # dropping the branch inequalities keeps the branch solution
    assert solve_exact(core).as_dict()["i_GND"] == Fraction(3, 25)


def test_equality_part_rejects_disjunctive_systems():
    with pytest.raises(StructuralError):
        ir.equality_part(lower(FamilySpec.se(1)))


def test_presolve_folds_defining_rows():
    symbolic = lower(FamilySpec.be(symbolic_resistors=True))
    bilinear = ir.add_parameter_definitions(symbolic, {"R": Fraction(100)})
    folded = ir.presolve(bilinear)
    assert folded.is_numeric
    assert folded.parameters == ()
    plain = solve_exact(lower(BE))
    assert solve_exact(folded).as_dict() == plain.as_dict()


def test_presolve_reports_leftover_symbols():
    symbolic = lower(FamilySpec.be(symbolic_resistors=True))
    with pytest.raises(NonlinearResidue):
        ir.presolve(symbolic)


def test_symbolic_alternate_branches_scale_the_symbol():
    alt = ResistorSpec(Fraction(100), alternates=(Fraction(90), Fraction(110)))
    system = lower(FamilySpec.be(alt, symbolic_resistors=True))
    low, high = (branch[0].render() for branch in system.disjunctions[0].branches)
    # alternate 90 around nominal 100 must scale the law to 0.9*R
    assert "(-9/10*R)*i1_R" in low
    assert "(-11/10*R)*i1_R" in high


def test_folding_symbolic_alternates_matches_numeric_alternates():
    alt = ResistorSpec(Fraction(100), alternates=(Fraction(90), Fraction(110)))
    symbolic = lower(FamilySpec.be(alt, symbolic_resistors=True))
    folded = ir.presolve(ir.add_parameter_definitions(symbolic, {"R": Fraction(100)}))
    numeric = lower(BE_ALT)
    currents = {}
    for pick in (0, 1):
        mode = ModeAssignment.of({"R": pick})
        ours = solve_exact(ir.instantiate(folded, mode)).as_dict()
        assert ours == solve_exact(ir.instantiate(numeric, mode)).as_dict()
        currents[pick] = ours["i_GND"]
    # the two picks must differ, and match the numeric alternate solutions
    assert currents == {0: Fraction(2, 15), 1: Fraction(6, 55)}


def test_presolve_rejects_double_definition():
    symbolic = lower(FamilySpec.be(symbolic_resistors=True))
    bilinear = ir.add_parameter_definitions(symbolic, {"R": Fraction(100)})
    rows = bilinear.rows + (
        LinearConstraint({"R": Fraction(1)}, Relation.EQ, Fraction(90)),
    )
    doubled = ConstraintSystem(
        bilinear.variables, bilinear.parameters, rows
    )
    with pytest.raises(StructuralError):
        ir.presolve(doubled)


def test_with_measurements():
    system = lower(BE)
    pinned = ir.with_measurements(system, {"i2_R": Fraction(0)})
    assert pinned.num_constraints == system.num_constraints + 1
    with pytest.raises(StructuralError):
        ir.with_measurements(system, {"bogus": Fraction(1)})


def test_relax_intervals_widens_law_row():
    system = lower(BE_TOL)
    relaxed = ir.relax_intervals(system)
    relations = [r.relation for r in relaxed.rows]
    assert relations.count(Relation.GE) == 1
    assert relations.count(Relation.LE) == 1
    assert not relaxed.has_intervals
    # u1_R - u2_R >= 90*i1_R and <= 110*i1_R, moved to the left-hand side
    ge = next(r for r in relaxed.rows if r.relation is Relation.GE)
    assert ge.terms["i1_R"] in (Fraction(-90), Fraction(-110))


def test_relax_intervals_strict_variant():
    relaxed = ir.relax_intervals(lower(BE_TOL), strict=True)
    relations = {r.relation for r in relaxed.rows}
    assert Relation.GT in relations and Relation.LT in relations


def test_relax_without_intervals_is_identity():
    system = lower(BE)
    assert ir.relax_intervals(system).render() == system.render()


def test_encode_indicators_builds_binaries():
    system = lower(BE_ALT)
    encoded = ir.encode_indicators(system)
    assert len(encoded.binaries) == 2
    assert not encoded.disjunctions
    assert any(r.relation is Relation.GE for r in encoded.rows)


def test_encode_indicators_rejects_strict_branches():
    system = lower(FamilySpec.se(1))
    with pytest.raises(UnsupportedStrict):
        ir.encode_indicators(system)


def test_export_lp_snapshot():
    text = ir.export_lp(lower(BE))
    assert "Subject To" in text
    assert "1 u1_R - 1 u2_R - 100 i1_R = 0" in text
    assert text.rstrip().endswith("End")


def test_instance_roundtrip_plain():
    system = lower(FamilySpec.fe(2))
    again = ir.loads_instance(ir.dumps_instance(system))
    assert again.variables == system.variables
    assert again.render() == system.render()


def test_instance_roundtrip_disjunctive_and_toleranced():
    for spec in (FamilySpec.se(2, Orientation.LITERAL), BE_TOL, BE_ALT):
        system = lower(spec)
        again = ir.loads_instance(ir.dumps_instance(system))
        assert again.render() == system.render()
        assert [d.label for d in again.disjunctions] == [
            d.label for d in system.disjunctions
        ]


def test_instance_roundtrip_symbolic():
    system = lower(FamilySpec.fe(1, symbolic_resistors=True, symbolic_source=True))
    again = ir.loads_instance(ir.dumps_instance(system))
    assert again.parameters == system.parameters
    assert again.render() == system.render()


def test_instance_file_io(tmp_path):
    system = lower(BE)
    path = tmp_path / "be.json"
    ir.save_instance(system, str(path))
    assert ir.load_instance(str(path)).render() == system.render()


def test_loads_instance_rejects_junk():
    with pytest.raises(Exception):
        ir.loads_instance("{not json")
    with pytest.raises(Exception):
        ir.loads_instance('{"variables": []}')


def test_mode_assignment_helpers():
    mode = ModeAssignment.of({"D1": 1, "D4": 0})
    assert mode["D1"] == 1
    assert "D4" in mode and "D9" not in mode
    assert mode.as_dict() == {"D1": 1, "D4": 0}
    system = lower(FamilySpec.se(1))
    assert mode.render(system) == "D1=Blocking,D4=Conducting"


def test_unknown_names_rejected_at_construction():
    with pytest.raises(StructuralError):
        ConstraintSystem(
            ("x",),
            (),
            (LinearConstraint({"y": Fraction(1)}, Relation.EQ, Fraction(0)),),
        )


def test_duplicate_disjunction_labels_rejected():
    row = LinearConstraint({"x": Fraction(1)}, Relation.EQ, Fraction(0))
    d = Disjunction("D", ((row,), (row,)), ("A", "B"))
    with pytest.raises(StructuralError):
        ConstraintSystem(("x",), (), (d, d))


def test_scale_reads_interval_bounds():
    assert lower(BE).scale() == 100
    assert lower(BE_TOL).scale() == 110
