"""Constraint-system representation and the netlist lowering pass.

The central type is ConstraintSystem: an ordered sequence of rows, each
either a LinearConstraint or a Disjunction over small constraint branches.
Coefficients are exact Fractions, or MultivarPoly values over the system
parameters for symbolic instances. Optional per-variable coefficient
intervals carry resistor tolerances without losing the nominal row.

Row order is meaningful. lower() walks the netlist component by component
and emits each component's equations in its canonical order, so a lowered
system reads like the hand-written listings and the counting invariants
(one row per disjunction) hold exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import (
    Dict,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from .errors import (
    HasDisjunctions,
    InstanceFormatError,
    LpExportError,
    NonlinearResidue,
    StructuralError,
    UnsupportedStrict,
)
from .netgen import Kind, Netlist, port_var
from .polys import MultivarPoly

Scalar = Fraction
Coefficient = Union[Fraction, MultivarPoly]
IntervalBounds = Tuple[Fraction, Fraction]


class Relation(str, Enum):
    EQ = "="
    LE = "<="
    GE = ">="
    LT = "<"
    GT = ">"

    @property
    def is_strict(self) -> bool:
        return self in (Relation.LT, Relation.GT)

    @property
    def weakened(self) -> "Relation":
        """The non-strict counterpart (identity for non-strict relations)."""
        if self is Relation.LT:
            return Relation.LE
        if self is Relation.GT:
            return Relation.GE
        return self


def _fmt_coef(c: Coefficient) -> str:
    if isinstance(c, MultivarPoly):
        return f"({c.render()})"
    return str(c)


@dataclass(frozen=True)
class LinearConstraint:
    """One row: sum of coefficient*variable terms related to a scalar rhs.

    interval_coeffs, when present, maps a subset of the term variables to
    (lo, hi) coefficient bounds; terms keeps the nominal value so numeric
    backends can ignore the widening.
    """

    terms: Mapping[str, Coefficient]
    relation: Relation
    rhs: Coefficient
    interval_coeffs: Optional[Mapping[str, IntervalBounds]] = None

    @property
    def is_numeric(self) -> bool:
        if isinstance(self.rhs, MultivarPoly):
            return False
        return not any(isinstance(c, MultivarPoly) for c in self.terms.values())

    @property
    def has_intervals(self) -> bool:
        return bool(self.interval_coeffs)

    def variables_used(self) -> Tuple[str, ...]:
        return tuple(self.terms.keys())

    def eval_lhs(self, assignment: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for name, coef in self.terms.items():
            if isinstance(coef, MultivarPoly):
                raise StructuralError(f"symbolic coefficient on {name}")
            total += coef * assignment[name]
        return total

    def satisfied_by(self, assignment: Mapping[str, Fraction]) -> bool:
        """Exact check; strict relations compare strictly."""
        lhs = self.eval_lhs(assignment)
        rhs = self.rhs
        if isinstance(rhs, MultivarPoly):
            raise StructuralError("symbolic right-hand side")
        if self.relation is Relation.EQ:
            return lhs == rhs
        if self.relation is Relation.LE:
            return lhs <= rhs
        if self.relation is Relation.GE:
            return lhs >= rhs
        if self.relation is Relation.LT:
            return lhs < rhs
        return lhs > rhs

    def render(self) -> str:
        parts: List[str] = []
        for name, coef in self.terms.items():
            if isinstance(coef, MultivarPoly):
                text, sign = f"{_fmt_coef(coef)}*{name}", "+"
            elif coef == 1:
                text, sign = name, "+"
            elif coef == -1:
                text, sign = name, "-"
            elif coef < 0:
                text, sign = f"{-coef}*{name}", "-"
            else:
                text, sign = f"{coef}*{name}", "+"
            if not parts:
                parts.append(text if sign == "+" else f"-{text}")
            else:
                parts.append(f"{'+' if sign == '+' else '-'} {text}")
        lhs = " ".join(parts) if parts else "0"
        return f"{lhs} {self.relation.value} {_fmt_coef(self.rhs)}"


Branch = Tuple[LinearConstraint, ...]


@dataclass(frozen=True)
class Disjunction:
    """An OR over constraint branches, counted as a single row.

    branch_tags name the branches (Conducting/Blocking for diodes, values
    for resistor alternates); branch_weights, when set, attach the prior
    probabilities used by diagnosis.
    """

    label: str
    branches: Tuple[Branch, ...]
    branch_tags: Tuple[str, ...]
    branch_weights: Optional[Tuple[Fraction, ...]] = None

    def __post_init__(self):
        if len(self.branches) != len(self.branch_tags):
            raise StructuralError(f"{self.label}: tag/branch count mismatch")
        if self.branch_weights is not None and len(self.branch_weights) != len(
            self.branches
        ):
            raise StructuralError(f"{self.label}: weight/branch count mismatch")
        if len(self.branches) < 2:
            raise StructuralError(f"{self.label}: a disjunction needs 2+ branches")

    @property
    def num_branches(self) -> int:
        return len(self.branches)

    def render(self) -> str:
        alts = []
        for branch in self.branches:
            alts.append("(" + " and ".join(c.render() for c in branch) + ")")
        return f"{self.label}: " + " or ".join(alts)


Row = Union[LinearConstraint, Disjunction]


@dataclass(frozen=True)
class Objective:
    sense: str  # "min" or "max"
    terms: Mapping[str, Fraction]

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")


@dataclass(frozen=True)
class ModeAssignment:
    """One branch choice per disjunction, keyed by label."""

    choices: Tuple[Tuple[str, int], ...]

    @staticmethod
    def of(mapping: Mapping[str, int]) -> "ModeAssignment":
        return ModeAssignment(tuple(mapping.items()))

    def as_dict(self) -> Dict[str, int]:
        return dict(self.choices)

    def __getitem__(self, label: str) -> int:
        for key, idx in self.choices:
            if key == label:
                return idx
        raise KeyError(label)

    def __contains__(self, label: str) -> bool:
        return any(key == label for key, _ in self.choices)

    def render(self, system: "ConstraintSystem") -> str:
        by_label = {d.label: d for d in system.disjunctions}
        parts = []
        for label, idx in self.choices:
            tag = by_label[label].branch_tags[idx] if label in by_label else str(idx)
            parts.append(f"{label}={tag}")
        return ",".join(parts)


@dataclass(frozen=True)
class ConstraintSystem:
    variables: Tuple[str, ...]
    parameters: Tuple[str, ...]
    rows: Tuple[Row, ...]
    objective: Optional[Objective] = None
    binaries: Tuple[str, ...] = ()

    def __post_init__(self):
        labels = [r.label for r in self.rows if isinstance(r, Disjunction)]
        if len(labels) != len(set(labels)):
            raise StructuralError("duplicate disjunction labels")
        known = set(self.variables) | set(self.parameters)
        for pos, row in enumerate(self.rows):
            for c in _row_constraints(row):
                for name in c.terms:
                    if name not in known:
                        raise StructuralError(
                            f"row {pos} references unknown name {name!r}"
                        )
        for b in self.binaries:
            if b not in self.variables:
                raise StructuralError(f"binary {b!r} is not a variable")

    @property
    def conjuncts(self) -> Tuple[LinearConstraint, ...]:
        return tuple(r for r in self.rows if isinstance(r, LinearConstraint))

    @property
    def disjunctions(self) -> Tuple[Disjunction, ...]:
        return tuple(r for r in self.rows if isinstance(r, Disjunction))

    @property
    def num_constraints(self) -> int:
        return len(self.rows)

    @property
    def is_numeric(self) -> bool:
        return not self.parameters and all(
            c.is_numeric for r in self.rows for c in _row_constraints(r)
        )

    @property
    def has_intervals(self) -> bool:
        return any(c.has_intervals for r in self.rows for c in _row_constraints(r))

    def variable_index(self) -> Dict[str, int]:
        return {name: k for k, name in enumerate(self.variables)}

    def disjunction(self, label: str) -> Disjunction:
        for d in self.disjunctions:
            if d.label == label:
                return d
        raise KeyError(label)

    def scale(self) -> Fraction:
        """Largest absolute numeric magnitude in the system, at least 1."""
        top = Fraction(1)
        for row in self.rows:
            for c in _row_constraints(row):
                for coef in list(c.terms.values()) + [c.rhs]:
                    if not isinstance(coef, MultivarPoly) and abs(coef) > top:
                        top = abs(coef)
                for lo, hi in (c.interval_coeffs or {}).values():
                    top = max(top, abs(lo), abs(hi))
        return top

    def render(self) -> str:
        return "\n".join(r.render() for r in self.rows) + "\n"


def _row_constraints(row: Row) -> Iterator[LinearConstraint]:
    if isinstance(row, LinearConstraint):
        yield row
    else:
        for branch in row.branches:
            yield from branch


# -- lowering ---------------------------------------------------------------


def _check_wiring(netlist: Netlist) -> None:
    by_id = {c.id: c for c in netlist.components}
    seen: Dict[Tuple[str, int], int] = {}
    for wire in netlist.wires():
        for comp_id, port in wire.joins:
            comp = by_id.get(comp_id)
            if comp is None:
                raise StructuralError(f"{wire.id} joins unknown component {comp_id}")
            if comp.kind is Kind.WIRE:
                raise StructuralError(f"{wire.id} joins another wire {comp_id}")
            if not 1 <= port <= comp.num_ports:
                raise StructuralError(f"{wire.id} joins missing port {comp_id}.{port}")
            seen[(comp_id, port)] = seen.get((comp_id, port), 0) + 1
    for comp in netlist.components:
        for port in range(1, comp.num_ports + 1):
            count = seen.get((comp.id, port), 0)
            if count == 0:
                raise StructuralError(f"dangling port {comp.id}.{port}")
            if count > 1:
                raise StructuralError(f"port {comp.id}.{port} joined {count} times")


class _Lowerer:
    def __init__(self, netlist: Netlist):
        self.netlist = netlist
        # boxes share position symbols, so the same name can appear many times
        seen = set()
        params: List[str] = []
        for c in netlist.components:
            if c.symbol and c.symbol not in seen:
                seen.add(c.symbol)
                params.append(c.symbol)
        self.params = tuple(params)
        self.rows: List[Row] = []

    def _pvar(self, name: str) -> MultivarPoly:
        return MultivarPoly.var(self.params, name)

    def row(
        self,
        pairs: Sequence[Tuple[str, Coefficient]],
        relation: Relation,
        rhs: Coefficient,
        intervals: Optional[Mapping[str, IntervalBounds]] = None,
    ) -> LinearConstraint:
        """Build a row, folding parameter-named 'variables' into the rhs."""
        terms: Dict[str, Coefficient] = {}
        for name, coef in pairs:
            if name in self.params:
                # u_SRC as a symbolic source: move coef*u_SRC to the rhs
                if isinstance(rhs, Fraction):
                    rhs = MultivarPoly.const(self.params, rhs)
                rhs = rhs - self._pvar(name) * coef
            else:
                terms[name] = coef
        return LinearConstraint(terms, relation, rhs, intervals)

    def law_row(self, comp, u1: str, u2: str, i1: str, value: Fraction) -> LinearConstraint:
        """Ohm's law u1 - u2 = value*i1, with tolerance widening if any.

        The tolerance band is recorded around the nominal value even when the
        coefficient itself is symbolic, so it survives a later presolve that
        pins the symbol to that nominal. Symbolic backends read the exact
        coefficient and ignore the band.
        """
        r = comp.resistor
        if comp.symbol is not None:
            # alternates scale the symbol: 90 around nominal 100 is 0.9*R
            coef: Coefficient = self._pvar(comp.symbol) * (-value / r.nominal)
        else:
            coef = -value
        intervals = None
        if r.tolerance:
            lo, hi = r.interval(value)
            intervals = {i1: (-hi, -lo)}
        return self.row(
            [(u1, Fraction(1)), (u2, Fraction(-1)), (i1, coef)],
            Relation.EQ,
            Fraction(0),
            intervals,
        )

    def lower_component(self, comp) -> None:
        cid = comp.id
        if comp.kind is Kind.SOURCE:
            if comp.symbol is None:
                self.rows.append(
                    self.row([(port_var(cid, 1, "u"), Fraction(1))], Relation.EQ, comp.voltage)
                )
            # symbolic source: the defining equation is dropped and u_SRC
            # becomes a parameter of every row that touches it
        elif comp.kind is Kind.GROUND:
            self.rows.append(
                self.row([(port_var(cid, 1, "u"), Fraction(1))], Relation.EQ, Fraction(0))
            )
        elif comp.kind is Kind.RESISTOR:
            u1, i1 = port_var(cid, 1, "u"), port_var(cid, 1, "i")
            u2, i2 = port_var(cid, 2, "u"), port_var(cid, 2, "i")
            self.rows.append(
                self.row([(i1, Fraction(1)), (i2, Fraction(1))], Relation.EQ, Fraction(0))
            )
            alts = comp.resistor.alternates
            if alts is None:
                self.rows.append(self.law_row(comp, u1, u2, i1, comp.resistor.nominal))
            else:
                branches = tuple(
                    (self.law_row(comp, u1, u2, i1, a),) for a in alts
                )
                tags = tuple(str(a) for a in alts)
                self.rows.append(Disjunction(cid, branches, tags))
        elif comp.kind is Kind.DIODE:
            u1, i1 = port_var(cid, 1, "u"), port_var(cid, 1, "i")
            u2, i2 = port_var(cid, 2, "u"), port_var(cid, 2, "i")
            self.rows.append(
                self.row([(i1, Fraction(1)), (i2, Fraction(1))], Relation.EQ, Fraction(0))
            )
            conducting = (
                self.row([(u1, Fraction(1)), (u2, Fraction(-1))], Relation.EQ, Fraction(0)),
                self.row([(i1, Fraction(1))], Relation.GE, Fraction(0)),
            )
            blocking = (
                self.row([(u1, Fraction(1)), (u2, Fraction(-1))], Relation.LT, Fraction(0)),
                self.row([(i1, Fraction(1))], Relation.EQ, Fraction(0)),
            )
            self.rows.append(
                Disjunction(cid, (conducting, blocking), ("Conducting", "Blocking"))
            )
        elif comp.kind is Kind.NODE3:
            us = [port_var(cid, p, "u") for p in (1, 2, 3)]
            js = [port_var(cid, p, "i") for p in (1, 2, 3)]
            self.rows.append(
                self.row([(j, Fraction(1)) for j in js], Relation.EQ, Fraction(0))
            )
            for other in us[1:]:
                self.rows.append(
                    self.row(
                        [(us[0], Fraction(1)), (other, Fraction(-1))],
                        Relation.EQ,
                        Fraction(0),
                    )
                )
        elif comp.kind is Kind.WIRE:
            (a, ap), (b, bp) = comp.joins
            ia, ib = port_var(a, ap, "i"), port_var(b, bp, "i")
            ua, ub = port_var(a, ap, "u"), port_var(b, bp, "u")
            self.rows.append(
                self.row([(ia, Fraction(1)), (ib, Fraction(1))], Relation.EQ, Fraction(0))
            )
            self.rows.append(
                self.row([(ua, Fraction(1)), (ub, Fraction(-1))], Relation.EQ, Fraction(0))
            )
        else:
            raise StructuralError(f"unknown component kind {comp.kind!r}")


def lower(netlist: Netlist) -> ConstraintSystem:
    """Flatten a netlist into its constraint system.

    Components are visited in declaration order and each contributes its
    canonical equations, so the row sequence matches the family listings.
    Raises StructuralError on dangling or doubly-joined ports.
    """
    _check_wiring(netlist)
    lowerer = _Lowerer(netlist)
    for comp in netlist.components:
        lowerer.lower_component(comp)
    variables = tuple(v for v in netlist.variables() if v not in lowerer.params)
    return ConstraintSystem(variables, lowerer.params, tuple(lowerer.rows))


# -- transforms -------------------------------------------------------------


def branches(system: ConstraintSystem) -> Iterator[ModeAssignment]:
    """All mode assignments, in lexicographic branch-index order."""
    disjunctions = system.disjunctions
    labels = [d.label for d in disjunctions]
    for combo in product(*(range(d.num_branches) for d in disjunctions)):
        yield ModeAssignment(tuple(zip(labels, combo)))


def instantiate(system: ConstraintSystem, mode: ModeAssignment) -> ConstraintSystem:
    """Replace each disjunction by its chosen branch, preserving row order."""
    rows: List[Row] = []
    for row in system.rows:
        if isinstance(row, Disjunction):
            try:
                idx = mode[row.label]
            except KeyError:
                raise StructuralError(f"mode assignment misses {row.label}")
            if not 0 <= idx < row.num_branches:
                raise StructuralError(f"{row.label} has no branch {idx}")
            rows.extend(row.branches[idx])
        else:
            rows.append(row)
    return ConstraintSystem(
        system.variables, system.parameters, tuple(rows), system.objective, system.binaries
    )


def equality_part(system: ConstraintSystem) -> ConstraintSystem:
    """The equality rows of a mode-instantiated system.

    Branch validity inequalities are dropped, leaving the square core that
    point and interval solvers accept. Every solution of the full branch
    also solves this part, so enclosures of it remain sound; checking the
    dropped inequalities stays with the caller.
    """
    if system.disjunctions:
        raise StructuralError("equality_part wants a mode-instantiated system")
    rows = tuple(
        r
        for r in system.rows
        if isinstance(r, LinearConstraint) and r.relation is Relation.EQ
    )
    return ConstraintSystem(
        system.variables, system.parameters, rows, system.objective, system.binaries
    )


def add_parameter_definitions(
    system: ConstraintSystem, values: Mapping[str, Fraction]
) -> ConstraintSystem:
    """Append defining rows 'param = value' for the given parameters."""
    rows = list(system.rows)
    for name in values:
        if name not in system.parameters:
            raise StructuralError(f"{name!r} is not a parameter")
        rows.append(
            LinearConstraint({name: Fraction(1)}, Relation.EQ, Fraction(values[name]))
        )
    return ConstraintSystem(
        system.variables, system.parameters, tuple(rows), system.objective, system.binaries
    )


def _substitute_coef(coef: Coefficient, name: str, value: Fraction) -> Coefficient:
    if isinstance(coef, MultivarPoly):
        out = coef.substitute(name, value)
        if out.is_constant:
            return out.constant_value()
        return out
    return coef


def presolve(system: ConstraintSystem) -> ConstraintSystem:
    """Fold parameter-defining rows into the coefficients.

    A defining row is an equality whose terms are exactly one parameter with
    a nonzero scalar coefficient and a scalar rhs. Each one is removed and
    its value substituted throughout. The result must be fully numeric;
    leftover symbolic coefficients raise NonlinearResidue, since a product
    of two unknowns has no linear reading.
    """
    values: Dict[str, Fraction] = {}
    rows: List[Row] = []
    for row in system.rows:
        if isinstance(row, LinearConstraint) and row.relation is Relation.EQ:
            names = list(row.terms.keys())
            if (
                len(names) == 1
                and names[0] in system.parameters
                and isinstance(row.terms[names[0]], Fraction)
                and row.terms[names[0]] != 0
                and isinstance(row.rhs, Fraction)
            ):
                name = names[0]
                if name in values:
                    raise StructuralError(f"parameter {name} defined twice")
                values[name] = row.rhs / row.terms[name]
                continue
        rows.append(row)

    def rewrite(c: LinearConstraint) -> LinearConstraint:
        terms: Dict[str, Coefficient] = {}
        for var, coef in c.terms.items():
            for name, value in values.items():
                coef = _substitute_coef(coef, name, value)
            terms[var] = coef
        rhs = c.rhs
        for name, value in values.items():
            rhs = _substitute_coef(rhs, name, value)
        return LinearConstraint(terms, c.relation, rhs, c.interval_coeffs)

    out_rows: List[Row] = []
    for row in rows:
        if isinstance(row, LinearConstraint):
            out_rows.append(rewrite(row))
        else:
            out_rows.append(
                replace(
                    row,
                    branches=tuple(
                        tuple(rewrite(c) for c in b) for b in row.branches
                    ),
                )
            )
    params = tuple(p for p in system.parameters if p not in values)
    result = ConstraintSystem(
        system.variables, params, tuple(out_rows), system.objective, system.binaries
    )
    if not result.is_numeric:
        for row in result.rows:
            for c in _row_constraints(row):
                if not c.is_numeric:
                    raise NonlinearResidue(
                        f"symbolic coefficient survives presolve: {c.render()}"
                    )
    return result


def with_measurements(
    system: ConstraintSystem, measurements: Mapping[str, Fraction]
) -> ConstraintSystem:
    """Append one pinning equality per measured variable."""
    rows = list(system.rows)
    for name, value in measurements.items():
        if name not in system.variables:
            raise StructuralError(f"unknown variable {name!r}")
        rows.append(
            LinearConstraint({name: Fraction(1)}, Relation.EQ, Fraction(value))
        )
    return ConstraintSystem(
        system.variables, system.parameters, tuple(rows), system.objective, system.binaries
    )


def relax_intervals(system: ConstraintSystem, strict: bool = False) -> ConstraintSystem:
    """Open each toleranced equality into its two endpoint inequalities.

    u1 - u2 - R*i1 = 0 with R in [lo, hi] becomes the pair
    u1 - u2 - lo*i1 >= 0 and u1 - u2 - hi*i1 <= 0 (strict: > and <).
    Rows without interval coefficients pass through unchanged.
    """

    def split(c: LinearConstraint) -> List[LinearConstraint]:
        if not c.has_intervals:
            return [c]
        if c.relation is not Relation.EQ:
            raise StructuralError("interval relaxation needs equality rows")
        lo_terms: Dict[str, Coefficient] = {}
        hi_terms: Dict[str, Coefficient] = {}
        for var, coef in c.terms.items():
            lo, hi = (c.interval_coeffs or {}).get(var, (coef, coef))
            lo_terms[var] = lo
            hi_terms[var] = hi
        ge = Relation.GT if strict else Relation.GE
        le = Relation.LT if strict else Relation.LE
        return [
            LinearConstraint(hi_terms, ge, c.rhs),
            LinearConstraint(lo_terms, le, c.rhs),
        ]

    rows: List[Row] = []
    for row in system.rows:
        if isinstance(row, LinearConstraint):
            rows.extend(split(row))
        else:
            rows.append(
                replace(
                    row,
                    branches=tuple(
                        tuple(x for c in b for x in split(c)) for b in row.branches
                    ),
                )
            )
    return ConstraintSystem(
        system.variables, system.parameters, tuple(rows), system.objective, system.binaries
    )


DEFAULT_BIG_M = Fraction(10**6)


def encode_indicators(
    system: ConstraintSystem, big_m: Fraction = DEFAULT_BIG_M
) -> ConstraintSystem:
    """Big-M encoding: one binary per branch, at least one branch active.

    Branch constraints relax to unconditional rows loosened by M*(1 - y);
    strict branch rows have no finite-M encoding and raise UnsupportedStrict.
    """
    big_m = Fraction(big_m)
    if big_m <= 0:
        raise ValueError("big_m must be positive")
    rows: List[Row] = []
    variables = list(system.variables)
    binaries = list(system.binaries)
    taken = set(variables)
    for row in system.rows:
        if isinstance(row, LinearConstraint):
            rows.append(row)
            continue
        ys: List[str] = []
        for k in range(row.num_branches):
            y = f"y_{row.label}_{k + 1}"
            if y in taken:
                raise StructuralError(f"indicator name {y} collides")
            taken.add(y)
            variables.append(y)
            binaries.append(y)
            ys.append(y)
        for y, branch in zip(ys, row.branches):
            for c in branch:
                if c.relation.is_strict:
                    raise UnsupportedStrict(
                        f"{row.label}: strict relation {c.render()!r} has no big-M form"
                    )
                if not isinstance(c.rhs, Fraction):
                    raise StructuralError("cannot encode symbolic rows")
                le_terms = dict(c.terms)
                le_terms[y] = le_terms.get(y, Fraction(0)) + big_m
                ge_terms = dict(c.terms)
                ge_terms[y] = ge_terms.get(y, Fraction(0)) - big_m
                if c.relation in (Relation.EQ, Relation.LE):
                    rows.append(
                        LinearConstraint(le_terms, Relation.LE, c.rhs + big_m)
                    )
                if c.relation in (Relation.EQ, Relation.GE):
                    rows.append(
                        LinearConstraint(ge_terms, Relation.GE, c.rhs - big_m)
                    )
        rows.append(
            LinearConstraint(
                {y: Fraction(1) for y in ys}, Relation.GE, Fraction(1)
            )
        )
    return ConstraintSystem(
        tuple(variables),
        system.parameters,
        tuple(rows),
        system.objective,
        tuple(binaries),
    )


# -- LP export --------------------------------------------------------------


def _lp_number(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    # exact decimal when the denominator is 2^a * 5^b
    twos = fives = 0
    den = value.denominator
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den == 1:
        digits = max(twos, fives)
        scaled = value.numerator * 10**digits // value.denominator
        text = f"{abs(scaled):0{digits + 1}d}"
        sign = "-" if scaled < 0 else ""
        return f"{sign}{text[:-digits]}.{text[-digits:]}"
    return repr(float(value))


def _lp_terms(terms: Mapping[str, Coefficient]) -> str:
    parts: List[str] = []
    for name, coef in terms.items():
        if not isinstance(coef, Fraction):
            raise LpExportError(f"symbolic coefficient on {name}")
        if coef == 0:
            continue
        mag = _lp_number(abs(coef))
        if not parts:
            sign = "-" if coef < 0 else ""
            parts.append(f"{sign}{mag} {name}")
        else:
            sign = "-" if coef < 0 else "+"
            parts.append(f"{sign} {mag} {name}")
    return " ".join(parts)


def export_lp(system: ConstraintSystem) -> str:
    """Render the system in LP text format.

    Disjunctions must be indicator-encoded first; strict relations, interval
    coefficients, and symbolic coefficients have no LP reading and raise.
    """
    if system.disjunctions:
        raise HasDisjunctions("encode indicator variables before LP export")
    if system.parameters:
        raise LpExportError("system still has symbolic parameters")
    lines: List[str] = []
    obj = system.objective
    lines.append("Maximize" if obj and obj.sense == "max" else "Minimize")
    obj_terms = _lp_terms(dict(obj.terms)) if obj else ""
    lines.append(f" obj: {obj_terms}".rstrip())
    lines.append("Subject To")
    for k, c in enumerate(system.conjuncts, start=1):
        if c.relation.is_strict:
            raise LpExportError(f"strict relation in row {k}: {c.render()}")
        if c.has_intervals:
            raise LpExportError(f"interval coefficients in row {k}: {c.render()}")
        if not isinstance(c.rhs, Fraction):
            raise LpExportError(f"symbolic rhs in row {k}")
        body = _lp_terms(c.terms) or "0 " + system.variables[0]
        lines.append(f" c{k}: {body} {c.relation.value} {_lp_number(c.rhs)}")
    lines.append("Bounds")
    binaries = set(system.binaries)
    for name in system.variables:
        if name not in binaries:
            lines.append(f" {name} free")
    if system.binaries:
        lines.append("Binary")
        for name in system.binaries:
            lines.append(f" {name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


# -- instance files ---------------------------------------------------------

FORMAT_NAME = "netbench-system"
FORMAT_VERSION = 1


def _frac_str(value: Fraction) -> str:
    return str(value)


def _coef_json(coef: Coefficient):
    if isinstance(coef, MultivarPoly):
        body = []
        for exps, c in sorted(
            coef.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True
        ):
            pairs = [
                [coef.params[k], e] for k, e in enumerate(exps) if e
            ]
            body.append([pairs, _frac_str(c)])
        return {"poly": body}
    return _frac_str(coef)


def _constraint_json(c: LinearConstraint):
    data = {
        "terms": {name: _coef_json(coef) for name, coef in c.terms.items()},
        "relation": c.relation.value,
        "rhs": _coef_json(c.rhs),
    }
    if c.interval_coeffs:
        data["interval_coeffs"] = {
            name: [_frac_str(lo), _frac_str(hi)]
            for name, (lo, hi) in c.interval_coeffs.items()
        }
    return data


def dumps_instance(system: ConstraintSystem) -> str:
    rows = []
    for row in system.rows:
        if isinstance(row, LinearConstraint):
            rows.append({"kind": "linear", **_constraint_json(row)})
        else:
            rows.append(
                {
                    "kind": "disjunction",
                    "label": row.label,
                    "tags": list(row.branch_tags),
                    "weights": (
                        [_frac_str(w) for w in row.branch_weights]
                        if row.branch_weights is not None
                        else None
                    ),
                    "branches": [
                        [_constraint_json(c) for c in branch]
                        for branch in row.branches
                    ],
                }
            )
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "variables": list(system.variables),
        "parameters": list(system.parameters),
        "binaries": list(system.binaries),
        "objective": (
            {
                "sense": system.objective.sense,
                "terms": {
                    name: _frac_str(c) for name, c in system.objective.terms.items()
                },
            }
            if system.objective
            else None
        ),
        "rows": rows,
    }
    return json.dumps(doc, indent=2) + "\n"


def save_instance(system: ConstraintSystem, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_instance(system))


def _parse_frac(text, where: str) -> Fraction:
    if not isinstance(text, str):
        raise InstanceFormatError(f"expected a fraction string", field=where)
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InstanceFormatError(f"bad fraction {text!r}", field=where)


def _parse_coef(data, params: Tuple[str, ...], where: str) -> Coefficient:
    if isinstance(data, str):
        return _parse_frac(data, where)
    if isinstance(data, dict) and set(data.keys()) == {"poly"}:
        index = {p: k for k, p in enumerate(params)}
        terms: Dict[Tuple[int, ...], Fraction] = {}
        for entry in data["poly"]:
            if not (isinstance(entry, list) and len(entry) == 2):
                raise InstanceFormatError("bad poly term", field=where)
            pairs, coef_text = entry
            exps = [0] * len(params)
            for pair in pairs:
                if not (isinstance(pair, list) and len(pair) == 2):
                    raise InstanceFormatError("bad poly factor", field=where)
                name, e = pair
                if name not in index:
                    raise InstanceFormatError(
                        f"unknown parameter {name!r}", field=where
                    )
                exps[index[name]] = int(e)
            terms[tuple(exps)] = _parse_frac(coef_text, where)
        return MultivarPoly(params, terms)
    raise InstanceFormatError("bad coefficient", field=where)


def _parse_constraint(data, params: Tuple[str, ...], where: str) -> LinearConstraint:
    if not isinstance(data, dict):
        raise InstanceFormatError("row must be an object", field=where)
    for key in ("terms", "relation", "rhs"):
        if key not in data:
            raise InstanceFormatError(f"missing {key}", field=where)
    try:
        relation = Relation(data["relation"])
    except ValueError:
        raise InstanceFormatError(
            f"bad relation {data['relation']!r}", field=f"{where}.relation"
        )
    if not isinstance(data["terms"], dict):
        raise InstanceFormatError("terms must be an object", field=f"{where}.terms")
    terms = {
        name: _parse_coef(c, params, f"{where}.terms.{name}")
        for name, c in data["terms"].items()
    }
    rhs = _parse_coef(data["rhs"], params, f"{where}.rhs")
    intervals = None
    if data.get("interval_coeffs"):
        intervals = {}
        for name, pair in data["interval_coeffs"].items():
            if not (isinstance(pair, list) and len(pair) == 2):
                raise InstanceFormatError(
                    "interval must be a [lo, hi] pair",
                    field=f"{where}.interval_coeffs.{name}",
                )
            intervals[name] = (
                _parse_frac(pair[0], f"{where}.interval_coeffs.{name}"),
                _parse_frac(pair[1], f"{where}.interval_coeffs.{name}"),
            )
    return LinearConstraint(terms, relation, rhs, intervals)


def loads_instance(text: str) -> ConstraintSystem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"not valid JSON: {exc.msg}", line=exc.lineno)
    if not isinstance(doc, dict):
        raise InstanceFormatError("top level must be an object")
    if doc.get("format") != FORMAT_NAME:
        raise InstanceFormatError(
            f"format must be {FORMAT_NAME!r}, got {doc.get('format')!r}",
            field="format",
        )
    if doc.get("version") != FORMAT_VERSION:
        raise InstanceFormatError(
            f"unsupported version {doc.get('version')!r}", field="version"
        )
    for key in ("variables", "parameters", "rows"):
        if key not in doc:
            raise InstanceFormatError(f"missing {key}", field=key)
        if not isinstance(doc[key], list):
            raise InstanceFormatError(f"{key} must be an array", field=key)
    params = tuple(doc["parameters"])
    rows: List[Row] = []
    for k, entry in enumerate(doc["rows"]):
        where = f"rows[{k}]"
        if not isinstance(entry, dict) or "kind" not in entry:
            raise InstanceFormatError("row needs a kind", field=where)
        if entry["kind"] == "linear":
            rows.append(_parse_constraint(entry, params, where))
        elif entry["kind"] == "disjunction":
            for key in ("label", "tags", "branches"):
                if key not in entry:
                    raise InstanceFormatError(f"missing {key}", field=where)
            branches_data = entry["branches"]
            if not isinstance(branches_data, list):
                raise InstanceFormatError("branches must be an array", field=where)
            branch_rows = tuple(
                tuple(
                    _parse_constraint(c, params, f"{where}.branches[{b}][{j}]")
                    for j, c in enumerate(branch)
                )
                for b, branch in enumerate(branches_data)
            )
            weights = None
            if entry.get("weights") is not None:
                weights = tuple(
                    _parse_frac(w, f"{where}.weights") for w in entry["weights"]
                )
            rows.append(
                Disjunction(
                    str(entry["label"]), branch_rows, tuple(entry["tags"]), weights
                )
            )
        else:
            raise InstanceFormatError(
                f"unknown row kind {entry['kind']!r}", field=f"{where}.kind"
            )
    objective = None
    if doc.get("objective") is not None:
        data = doc["objective"]
        if not isinstance(data, dict) or "sense" not in data or "terms" not in data:
            raise InstanceFormatError("bad objective", field="objective")
        objective = Objective(
            data["sense"],
            {
                name: _parse_frac(c, f"objective.terms.{name}")
                for name, c in data["terms"].items()
            },
        )
    try:
        return ConstraintSystem(
            tuple(doc["variables"]),
            params,
            tuple(rows),
            objective,
            tuple(doc.get("binaries") or ()),
        )
    except StructuralError as exc:
        raise InstanceFormatError(str(exc))


def load_instance(path: str) -> ConstraintSystem:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_instance(fh.read())
