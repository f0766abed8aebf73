"""Interval enclosures: soundness against sampled point systems."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netbench import ir, netgen
from netbench.errors import NetbenchError
from netbench.interval import Interval, solve_interval
from netbench.linsolve import solve_exact
from netbench.netgen import FamilySpec, ResistorSpec

F = Fraction


def toleranced_be(t: Fraction):
    spec = FamilySpec.be(ResistorSpec(F(100), t))
    return ir.lower(netgen.build(spec))


def toleranced_fe(n: int, t: Fraction):
    resistors = {
        j: ResistorSpec(r.nominal, t)
        for j, r in netgen.default_resistors(netgen.Family.FE).items()
    }
    spec = FamilySpec.fe(n, resistors)
    return ir.lower(netgen.build(spec))


def sampled_instance(n: int, t: Fraction, rng: random.Random):
    """A point system with each resistance drawn from its tolerance band."""
    resistors = {}
    for j, base in netgen.default_resistors(netgen.Family.FE).items():
        lo = base.nominal * (1 - t)
        hi = base.nominal * (1 + t)
        # rational sample keeps the instance exactly solvable
        pick = lo + (hi - lo) * F(rng.randint(0, 10_000), 10_000)
        resistors[j] = ResistorSpec(pick)
    return ir.lower(netgen.build(FamilySpec.fe(n, resistors)))


def test_be_enclosure_brackets_the_tolerance_band():
    boxes = solve_interval(toleranced_be(F(1, 10)))
    box = boxes["i_GND"]
    lo, hi = 12 / 110, 12 / 90
    assert box.lo <= lo and hi <= box.hi
    assert abs(box.lo - lo) <= 1e-6
    assert abs(box.hi - hi) <= 1e-6


def test_zero_tolerance_box_degenerates_to_the_point():
    boxes = solve_interval(toleranced_be(F(0)))
    exact = solve_exact(toleranced_be(F(0)))
    for name, value in exact.items():
        box = boxes[name]
        assert box.contains(value)
        assert box.width <= 1e-9


@pytest.mark.parametrize("t", [F(1, 10), F(1, 5)])
def test_sampled_instances_stay_inside_the_enclosure(t):
    boxes = solve_interval(toleranced_fe(1, t))
    rng = random.Random(20260816)
    for _ in range(25):
        point = solve_exact(sampled_instance(1, t, rng))
        assert boxes.contains_point(point.as_dict())


def test_wider_tolerance_widens_the_enclosure():
    narrow = solve_interval(toleranced_fe(1, F(1, 10)))["i_GND"]
    wide = solve_interval(toleranced_fe(1, F(1, 5)))["i_GND"]
    assert wide.lo <= narrow.lo and narrow.hi <= wide.hi


def test_interval_rejects_disjunctive_systems():
    system = ir.lower(netgen.build(FamilySpec.se(1)))
    with pytest.raises(NetbenchError):
        solve_interval(system)


def test_interval_constructor_validation():
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)
    with pytest.raises(ValueError):
        Interval(float("nan"), 1.0)


members = st.integers(-1000, 1000).map(lambda k: k / 16)


@settings(max_examples=200, deadline=None)
@given(a=members, b=members, c=members, d=members, x=members, y=members)
def test_interval_ops_contain_member_results(a, b, c, d, x, y):
    p = Interval(min(a, b), max(a, b))
    q = Interval(min(c, d), max(c, d))
    px = min(max(x, p.lo), p.hi)
    qy = min(max(y, q.lo), q.hi)
    assert (p + q).contains(px + qy)
    assert (p - q).contains(px - qy)
    assert (p * q).contains(px * qy)
    if not q.contains(0.0):
        assert (p / q).contains(px / qy)
