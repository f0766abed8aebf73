"""Family generators: sizes, defaults, and input validation."""

from fractions import Fraction

import pytest

from netbench.netgen import (
    Family,
    FamilySpec,
    Orientation,
    ResistorSpec,
    build,
    default_resistors,
    stats,
)


def test_be_size():
    s = stats(build(FamilySpec.be()))
    assert (s.num_variables, s.num_constraints) == (8, 8)
    assert s.num_disjunctions == 0


@pytest.mark.parametrize("n", [1, 2, 3, 5, 10])
def test_fe_size_is_44n_plus_4(n):
    s = stats(build(FamilySpec.fe(n)))
    assert s.num_variables == 44 * n + 4
    assert s.num_constraints == 44 * n + 4
    assert s.num_disjunctions == 0


@pytest.mark.parametrize("n", [1, 2, 4, 7])
def test_se_size_is_44n_plus_4(n):
    s = stats(build(FamilySpec.se(n)))
    assert s.num_variables == 44 * n + 4
    assert s.num_constraints == 44 * n + 4
    assert s.num_disjunctions == 2 * n


def test_default_resistors():
    assert default_resistors(Family.BE)[1].nominal == 100
    fe = default_resistors(Family.FE)
    assert {j: r.nominal for j, r in fe.items()} == {
        1: 100, 2: 200, 3: 300, 4: 400, 5: 500,
    }
    se = default_resistors(Family.SE)
    assert set(se) == {2, 3, 5}
    assert all(r.nominal == 100 for r in se.values())


def test_be_rejects_box_count():
    with pytest.raises(ValueError):
        FamilySpec(Family.BE, n=2)


def test_nonpositive_n_rejected():
    with pytest.raises(ValueError):
        FamilySpec.fe(0)
    with pytest.raises(ValueError):
        FamilySpec.se(-3)


def test_resistor_spec_validation():
    with pytest.raises(ValueError):
        ResistorSpec(Fraction(0))
    with pytest.raises(ValueError):
        ResistorSpec(Fraction(100), Fraction(1))  # tolerance must stay below 1
    with pytest.raises(ValueError):
        ResistorSpec(Fraction(100), alternates=())
    with pytest.raises(ValueError):
        ResistorSpec(Fraction(100), alternates=(Fraction(90), Fraction(90)))


def test_resistor_interval():
    r = ResistorSpec(Fraction(100), Fraction(1, 10))
    assert r.interval() == (Fraction(90), Fraction(110))
    assert r.interval(Fraction(200)) == (Fraction(180), Fraction(220))


def test_wrong_positions_rejected():
    with pytest.raises(ValueError):
        FamilySpec.fe(1, {1: ResistorSpec(Fraction(100))})


def test_orientations_differ():
    figure = build(FamilySpec.se(1, Orientation.FIGURE))
    literal = build(FamilySpec.se(1, Orientation.LITERAL))
    fig_wires = {c.joins for c in figure.components if c.joins}
    lit_wires = {c.joins for c in literal.components if c.joins}
    assert fig_wires != lit_wires


def test_symbolic_fe_shares_resistor_symbols():
    netlist = build(FamilySpec.fe(3, symbolic_resistors=True))
    symbols = {c.symbol for c in netlist.components if c.symbol}
    assert symbols == {"R1", "R2", "R3", "R4", "R5"}


def test_symbolic_be_symbol_name():
    netlist = build(FamilySpec.be(symbolic_resistors=True))
    symbols = [c.symbol for c in netlist.components if c.symbol]
    assert symbols == ["R"]


def test_spec_accepts_plain_numbers():
    spec = FamilySpec.fe(2, source_voltage=9)
    assert spec.source_voltage == Fraction(9)
