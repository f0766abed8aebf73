"""Generators for the three benchmark network families.

Families:

* ``be`` -- the baby example: one source, one resistor, one ground.
* ``fe`` -- n chained boxes of five resistors in a bridge arrangement.
* ``se`` -- the same boxes with ideal diodes in positions 1 and 4.

A netlist is a flat, ordered list of components; wires are components too
and carry the pair of ports they join. Every component port contributes a
voltage and a current variable, named after the component (``u1_R3_B7``,
``i_GND``). Box suffixes ``_Bi`` appear only for n >= 2; the one-box
instances use the plain names so that generated systems line up with the
single-box problem statements.

Generation is deterministic: the same FamilySpec always yields the same
netlist, byte for byte under render().
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple

from .errors import StructuralError


class Family(str, Enum):
    BE = "be"
    FE = "fe"
    SE = "se"


class Orientation(str, Enum):
    """Diode hookup for the ``se`` family.

    ``FIGURE`` reverses D1's ports relative to the literal equation listing;
    it is the default because it gives the chain its closed-form behavior
    i_GND = u_SRC / (R2 * n). ``LITERAL`` wires D1 exactly as listed, which
    flips the feasible mode pattern and triples the ground current at n = 1.
    """

    FIGURE = "figure"
    LITERAL = "literal"


class Kind(str, Enum):
    SOURCE = "Source"
    GROUND = "Ground"
    RESISTOR = "Resistor"
    DIODE = "Diode"
    NODE3 = "Node3"
    WIRE = "Wire"


PORT_COUNT = {
    Kind.SOURCE: 1,
    Kind.GROUND: 1,
    Kind.RESISTOR: 2,
    Kind.DIODE: 2,
    Kind.NODE3: 3,
    Kind.WIRE: 0,
}

# (component id, port index), 1-based to match the variable names.
Port = Tuple[str, int]


def _frac(value) -> Fraction:
    # Fraction(str) keeps decimal inputs exact; Fraction(float) would not.
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class ResistorSpec:
    """Value specification for one resistor position.

    tolerance t widens the nominal R to the interval [R(1-t), R(1+t)];
    alternates turn the component law into a disjunction over the listed
    values (each alternate inherits the tolerance).
    """

    nominal: Fraction
    tolerance: Fraction = Fraction(0)
    alternates: Optional[Tuple[Fraction, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "nominal", _frac(self.nominal))
        object.__setattr__(self, "tolerance", _frac(self.tolerance))
        if self.alternates is not None:
            alts = tuple(_frac(a) for a in self.alternates)
            object.__setattr__(self, "alternates", alts)
        if self.nominal <= 0:
            raise ValueError(f"resistance must be positive, got {self.nominal}")
        if not 0 <= self.tolerance < 1:
            raise ValueError(f"tolerance must lie in [0, 1), got {self.tolerance}")
        if self.alternates is not None:
            if not self.alternates:
                raise ValueError("alternates must be a non-empty tuple")
            if any(a <= 0 for a in self.alternates):
                raise ValueError("alternate resistances must be positive")
            if len(set(self.alternates)) != len(self.alternates):
                raise ValueError("alternate resistances must be distinct")

    def interval(self, value: Optional[Fraction] = None) -> Tuple[Fraction, Fraction]:
        """Tolerance box around `value` (default: the nominal)."""
        v = self.nominal if value is None else value
        return (v * (1 - self.tolerance), v * (1 + self.tolerance))


_FE_POSITIONS = (1, 2, 3, 4, 5)
_SE_RESISTOR_POSITIONS = (2, 3, 5)
_SE_DIODE_POSITIONS = (1, 4)


def default_resistors(family: Family) -> Dict[int, ResistorSpec]:
    if family is Family.BE:
        return {1: ResistorSpec(Fraction(100))}
    if family is Family.FE:
        return {j: ResistorSpec(Fraction(100 * j)) for j in _FE_POSITIONS}
    return {j: ResistorSpec(Fraction(100)) for j in _SE_RESISTOR_POSITIONS}


@dataclass(frozen=True)
class FamilySpec:
    """Everything needed to generate one benchmark instance."""

    family: Family
    n: int = 1
    source_voltage: Fraction = Fraction(12)
    resistor_items: Tuple[Tuple[int, ResistorSpec], ...] = ()
    orientation: Orientation = Orientation.FIGURE
    symbolic_resistors: bool = False
    symbolic_source: bool = False

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        object.__setattr__(self, "source_voltage", _frac(self.source_voltage))
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if family is Family.BE and self.n != 1:
            raise ValueError("the baby example has no box count; n must be 1")
        items = self.resistor_items or tuple(
            sorted(default_resistors(family).items())
        )
        items = tuple(sorted((int(k), v) for k, v in items))
        object.__setattr__(self, "resistor_items", items)
        expected = {
            Family.BE: (1,),
            Family.FE: _FE_POSITIONS,
            Family.SE: _SE_RESISTOR_POSITIONS,
        }[family]
        got = tuple(k for k, _ in items)
        if got != tuple(expected):
            raise ValueError(
                f"resistor positions for {family.value} must be {expected}, got {got}"
            )

    @property
    def resistors(self) -> Dict[int, ResistorSpec]:
        return dict(self.resistor_items)

    @staticmethod
    def be(
        resistor: Optional[ResistorSpec] = None,
        source_voltage=Fraction(12),
        symbolic_resistors: bool = False,
        symbolic_source: bool = False,
    ) -> "FamilySpec":
        items = ((1, resistor),) if resistor is not None else ()
        return FamilySpec(
            Family.BE,
            1,
            source_voltage,
            items,
            symbolic_resistors=symbolic_resistors,
            symbolic_source=symbolic_source,
        )

    @staticmethod
    def fe(
        n: int,
        resistors: Optional[Mapping[int, ResistorSpec]] = None,
        source_voltage=Fraction(12),
        symbolic_resistors: bool = False,
        symbolic_source: bool = False,
    ) -> "FamilySpec":
        items = tuple(sorted(resistors.items())) if resistors else ()
        return FamilySpec(
            Family.FE,
            n,
            source_voltage,
            items,
            symbolic_resistors=symbolic_resistors,
            symbolic_source=symbolic_source,
        )

    @staticmethod
    def se(
        n: int,
        orientation: Orientation = Orientation.FIGURE,
        resistors: Optional[Mapping[int, ResistorSpec]] = None,
        source_voltage=Fraction(12),
        symbolic_resistors: bool = False,
        symbolic_source: bool = False,
    ) -> "FamilySpec":
        items = tuple(sorted(resistors.items())) if resistors else ()
        return FamilySpec(
            Family.SE,
            n,
            source_voltage,
            items,
            orientation,
            symbolic_resistors,
            symbolic_source,
        )

    def symbol_for(self, position: int) -> str:
        """Parameter name for a resistor position: R for BE, Rj otherwise."""
        return "R" if self.family is Family.BE else f"R{position}"


@dataclass(frozen=True)
class Component:
    id: str
    kind: Kind
    resistor: Optional[ResistorSpec] = None
    symbol: Optional[str] = None  # parameter name when symbolic
    voltage: Optional[Fraction] = None  # Source only
    joins: Optional[Tuple[Port, Port]] = None  # Wire only

    @property
    def num_ports(self) -> int:
        return PORT_COUNT[self.kind]


def port_var(component_id: str, port: int, which: str) -> str:
    """Variable name for a port: which is 'u' or 'i'."""
    if component_id in ("SRC", "GND"):
        return f"{which}_{component_id}"
    return f"{which}{port}_{component_id}"


@dataclass(frozen=True)
class Netlist:
    spec: FamilySpec
    components: Tuple[Component, ...]

    def __post_init__(self):
        seen = set()
        for c in self.components:
            if c.id in seen:
                raise StructuralError(f"duplicate component id {c.id!r}")
            seen.add(c.id)

    def component(self, comp_id: str) -> Component:
        for c in self.components:
            if c.id == comp_id:
                return c
        raise KeyError(comp_id)

    def wires(self) -> Tuple[Component, ...]:
        return tuple(c for c in self.components if c.kind is Kind.WIRE)

    def connections(self) -> Tuple[Tuple[Port, Port], ...]:
        return tuple(c.joins for c in self.wires())

    def variables(self) -> Tuple[str, ...]:
        """All port variables in declaration order (u before i per port)."""
        out = []
        for c in self.components:
            for p in range(1, c.num_ports + 1):
                out.append(port_var(c.id, p, "u"))
                out.append(port_var(c.id, p, "i"))
        return tuple(out)

    def render(self) -> str:
        """Canonical text form, stable byte-for-byte for identical specs."""
        s = self.spec
        lines = [
            f"family {s.family.value} n {s.n} orientation {s.orientation.value}",
            f"source_voltage {s.source_voltage}",
            f"symbolic_resistors {int(s.symbolic_resistors)}"
            f" symbolic_source {int(s.symbolic_source)}",
        ]
        for pos, r in s.resistor_items:
            alt = (
                ",".join(str(a) for a in r.alternates)
                if r.alternates is not None
                else "-"
            )
            lines.append(
                f"resistor {pos} nominal {r.nominal}"
                f" tolerance {r.tolerance} alternates {alt}"
            )
        for c in self.components:
            if c.kind is Kind.WIRE:
                (a, ap), (b, bp) = c.joins
                lines.append(f"{c.kind.value} {c.id} {a}.{ap} {b}.{bp}")
            elif c.kind is Kind.RESISTOR:
                lines.append(
                    f"{c.kind.value} {c.id} {c.symbol or c.resistor.nominal}"
                )
            elif c.kind is Kind.SOURCE:
                lines.append(f"{c.kind.value} {c.id} {c.symbol or c.voltage}")
            else:
                lines.append(f"{c.kind.value} {c.id}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class InstanceStats:
    """Shape of the lowered system for the plain numeric instance."""

    num_ports: int
    num_variables: int
    num_constraints: int
    num_disjunctions: int


_CONSTRAINTS_PER_KIND = {
    Kind.SOURCE: 1,  # u_SRC = V
    Kind.GROUND: 1,  # u_GND = 0
    Kind.RESISTOR: 2,  # current tie + law (law may be a disjunction)
    Kind.DIODE: 2,  # current tie + mode disjunction
    Kind.NODE3: 3,  # current sum + two voltage ties
    Kind.WIRE: 2,  # current sum + voltage equality
}


def stats(netlist: Netlist) -> InstanceStats:
    ports = sum(c.num_ports for c in netlist.components)
    constraints = sum(_CONSTRAINTS_PER_KIND[c.kind] for c in netlist.components)
    disjunctions = 0
    for c in netlist.components:
        if c.kind is Kind.DIODE:
            disjunctions += 1
        elif c.kind is Kind.RESISTOR and c.resistor.alternates is not None:
            disjunctions += 1
    return InstanceStats(ports, 2 * ports, constraints, disjunctions)


# -- builders ---------------------------------------------------------------


def build(spec: FamilySpec) -> Netlist:
    if spec.family is Family.BE:
        return build_baby(spec)
    if spec.family is Family.FE:
        return build_first(spec)
    return build_second(spec)


def _resistor(spec: FamilySpec, position: int, comp_id: str) -> Component:
    r = spec.resistors[position]
    symbol = spec.symbol_for(position) if spec.symbolic_resistors else None
    return Component(comp_id, Kind.RESISTOR, resistor=r, symbol=symbol)


def _source(spec: FamilySpec) -> Component:
    symbol = "u_SRC" if spec.symbolic_source else None
    return Component("SRC", Kind.SOURCE, voltage=spec.source_voltage, symbol=symbol)


def _wire(wire_id: str, a: Port, b: Port) -> Component:
    return Component(wire_id, Kind.WIRE, joins=(a, b))


def build_baby(spec: FamilySpec) -> Netlist:
    """One source, one resistor, one ground, two wires.

    Component order mirrors the canonical eight-equation listing: source,
    first wire, resistor, second wire, ground.
    """
    if spec.family is not Family.BE:
        raise ValueError(f"build_baby needs a be spec, got {spec.family.value}")
    components = (
        _source(spec),
        _wire("W1", ("SRC", 1), ("R", 1)),
        _resistor(spec, 1, "R"),
        _wire("W2", ("R", 2), ("GND", 1)),
        Component("GND", Kind.GROUND),
    )
    return Netlist(spec, components)


def _box_suffix(n: int, box: int) -> str:
    return "" if n == 1 else f"_B{box}"


# Intra-box wiring shared by both box families: (node, node port, element,
# element port). Order matches the published listings.
_BOX_WIRES = (
    ("N1", 1, 5, 2),
    ("N1", 2, 1, 2),
    ("N1", 3, 3, 1),
    ("N2", 2, 1, 1),
    ("N2", 3, 2, 1),
    ("N3", 2, 3, 2),
    ("N3", 3, 4, 2),
    ("N4", 1, 5, 1),
    ("N4", 2, 2, 2),
    ("N4", 3, 4, 1),
)


def _box_components(
    spec: FamilySpec, box: int, diode_positions: Tuple[int, ...]
) -> list:
    """Components of one box: elements, nodes, then the ten intra-box wires."""
    sfx = _box_suffix(spec.n, box)
    comps = []
    for j in _FE_POSITIONS:
        if j in diode_positions:
            continue
        comps.append(_resistor(spec, j, f"R{j}{sfx}"))
    for j in diode_positions:
        comps.append(Component(f"D{j}{sfx}", Kind.DIODE))
    for j in range(1, 5):
        comps.append(Component(f"N{j}{sfx}", Kind.NODE3))
    flip_d1 = (
        1 in diode_positions and spec.orientation is Orientation.FIGURE
    )
    for k, (node, node_port, elem, elem_port) in enumerate(_BOX_WIRES, start=1):
        prefix = "D" if elem in diode_positions else "R"
        port = elem_port
        if prefix == "D" and elem == 1 and flip_d1:
            port = 3 - elem_port  # swap ports 1 and 2
        comps.append(
            _wire(
                f"W{k}{sfx}",
                (f"{node}{sfx}", node_port),
                (f"{prefix}{elem}{sfx}", port),
            )
        )
    return comps


def _chain(spec: FamilySpec, diode_positions: Tuple[int, ...]) -> Netlist:
    n = spec.n
    comps = []
    for box in range(1, n + 1):
        comps.extend(_box_components(spec, box, diode_positions))
    first = _box_suffix(n, 1)
    last = _box_suffix(n, n)
    comps.append(_source(spec))
    comps.append(Component("GND", Kind.GROUND))
    comps.append(_wire("W_SRC", ("SRC", 1), (f"N2{first}", 1)))
    comps.append(_wire("W_GND", (f"N3{last}", 1), ("GND", 1)))
    for box in range(2, n + 1):
        comps.append(
            _wire(
                f"W_LINK{box}",
                (f"N3_B{box - 1}", 1),
                (f"N2_B{box}", 1),
            )
        )
    return Netlist(spec, tuple(comps))


def build_first(spec: FamilySpec) -> Netlist:
    """Chain of n five-resistor bridge boxes between source and ground."""
    if spec.family is not Family.FE:
        raise ValueError(f"build_first needs an fe spec, got {spec.family.value}")
    return _chain(spec, ())


def build_second(spec: FamilySpec) -> Netlist:
    """Chain of n bridge boxes with ideal diodes in positions 1 and 4."""
    if spec.family is not Family.SE:
        raise ValueError(f"build_second needs an se spec, got {spec.family.value}")
    return _chain(spec, _SE_DIODE_POSITIONS)
