"""Linear optimization and weighted-fault diagnosis.

The workhorse is a small two-phase simplex over exact rationals (plain
Python lists, Bland's rule, free variables split into differences of
nonnegative parts). Everything else is layered on it:

* optimize: LP on a disjunction-free system, branch and bound over the
  declared binaries when there are any;
* optimize_interval: endpoint instantiation of toleranced coefficients,
  guarded by a seeded interior sampling check for monotone dependence;
* optimize_disjunctive: depth-first branch and bound over disjunction
  branches in declaration order, LP relaxation bounds, so the first
  optimum found is the declaration-order-minimal one;
* diagnose: ranked enumeration of weighted fault modes, feasibility
  checked exactly (equality elimination first, a feasibility LP over the
  surviving free variables only when inequalities remain).

Strict inequalities are honest here: optimization over open sets does not
attain its bounds, so strict rows raise UnsupportedStrict; feasibility
checks decide strictness exactly via a slack-maximizing LP.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

from . import interval as interval_mod
from .errors import (
    ExplosionGuard,
    HasDisjunctions,
    Infeasible,
    NonMonotoneInterval,
    StructuralError,
    Unbounded,
    Unsatisfiable,
    UnsupportedInterval,
    UnsupportedStrict,
)
from .ir import (
    ConstraintSystem,
    Disjunction,
    LinearConstraint,
    ModeAssignment,
    Objective,
    Relation,
    branches as all_branches,
    instantiate,
    with_measurements,
)
from .linsolve import Elimination

MAX_ENUMERATION = 4**8


# -- two-phase simplex -------------------------------------------------------

LpRow = Tuple[Mapping[Hashable, Fraction], Relation, Fraction]


def simplex(
    rows: Sequence[LpRow],
    objective: Mapping[Hashable, Fraction],
    sense: str = "min",
) -> Tuple[Fraction, Dict[Hashable, Fraction]]:
    """Optimize a linear objective over free variables.

    Variables are whatever hashable keys appear in the rows and objective.
    Raises Infeasible and Unbounded; strict rows raise UnsupportedStrict.
    """
    if sense not in ("min", "max"):
        raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
    names: List[Hashable] = []
    seen = set()
    for terms, _, _ in rows:
        for name in terms:
            if name not in seen:
                seen.add(name)
                names.append(name)
    for name in objective:
        if name not in seen:
            seen.add(name)
            names.append(name)
    col_of = {}
    for name in names:
        col_of[name] = len(col_of) * 2  # plus part; minus part at +1
    nsplit = 2 * len(names)

    body: List[List[Fraction]] = []
    rel_list: List[Relation] = []
    rhs_list: List[Fraction] = []
    for terms, rel, rhs in rows:
        if rel.is_strict:
            raise UnsupportedStrict(
                "strict inequalities are not optimizable; bounds are not attained"
            )
        coefs = [Fraction(0)] * nsplit
        for name, c in terms.items():
            coefs[col_of[name]] += c
            coefs[col_of[name] + 1] -= c
        if rhs < 0:
            coefs = [-c for c in coefs]
            rhs = -rhs
            rel = {Relation.LE: Relation.GE, Relation.GE: Relation.LE}.get(rel, rel)
        body.append(coefs)
        rel_list.append(rel)
        rhs_list.append(rhs)

    nrows = len(body)
    slack_cols = sum(1 for r in rel_list if r is not Relation.EQ)
    total = nsplit + slack_cols + nrows  # artificials for every row, lazily
    tableau: List[List[Fraction]] = []
    basis: List[int] = []
    art_cols: List[int] = []
    sk = 0
    for i in range(nrows):
        row = body[i] + [Fraction(0)] * (slack_cols + nrows) + [rhs_list[i]]
        if rel_list[i] is Relation.LE:
            row[nsplit + sk] = Fraction(1)
            basis.append(nsplit + sk)
            sk += 1
            tableau.append(row)
            art_cols.append(-1)
        elif rel_list[i] is Relation.GE:
            row[nsplit + sk] = Fraction(-1)
            sk += 1
            art = nsplit + slack_cols + i
            row[art] = Fraction(1)
            basis.append(art)
            tableau.append(row)
            art_cols.append(art)
        else:
            art = nsplit + slack_cols + i
            row[art] = Fraction(1)
            basis.append(art)
            tableau.append(row)
            art_cols.append(art)

    def pivot(r: int, c: int, z: List[Fraction]) -> None:
        prow = tableau[r]
        inv = Fraction(1) / prow[c]
        tableau[r] = [v * inv for v in prow]
        prow = tableau[r]
        for i in range(nrows):
            if i != r and tableau[i][c] != 0:
                f = tableau[i][c]
                tableau[i] = [a - f * b for a, b in zip(tableau[i], prow)]
        if z[c] != 0:
            f = z[c]
            for j in range(total + 1):
                z[j] -= f * prow[j]
        basis[r] = c

    def iterate(z: List[Fraction], allowed: Sequence[int]) -> None:
        # Bland's rule: smallest eligible entering column, then the leaving
        # row with the smallest basis column among the minimal ratios.
        while True:
            enter = -1
            for c in allowed:
                if z[c] < 0:
                    enter = c
                    break
            if enter < 0:
                return
            leave = -1
            best: Optional[Fraction] = None
            for i in range(nrows):
                a = tableau[i][enter]
                if a > 0:
                    ratio = tableau[i][total] / a
                    if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leave]
                    ):
                        best = ratio
                        leave = i
            if leave < 0:
                raise Unbounded("objective improves without bound")
            pivot(leave, enter, z)

    # phase 1: drive the artificials to zero
    z1 = [Fraction(0)] * (total + 1)
    for i, art in enumerate(art_cols):
        if art >= 0:
            z1 = [a - b for a, b in zip(z1, tableau[i])]
            z1[art] += Fraction(1)
    phase1_cols = list(range(nsplit + slack_cols))
    iterate(z1, phase1_cols)
    if -z1[total] > 0:
        raise Infeasible("no assignment satisfies the rows")
    for i in range(nrows):
        if basis[i] >= nsplit + slack_cols:
            # zero-valued artificial still basic: swap it out or drop the row
            swapped = False
            for c in phase1_cols:
                if tableau[i][c] != 0:
                    pivot(i, c, z1)
                    swapped = True
                    break
            if not swapped:
                tableau[i] = [Fraction(0)] * (total + 1)

    # phase 2 over the real objective
    sign = Fraction(1) if sense == "min" else Fraction(-1)
    z2 = [Fraction(0)] * (total + 1)
    for name, c in objective.items():
        z2[col_of[name]] += sign * c
        z2[col_of[name] + 1] -= sign * c
    for i in range(nrows):
        b = basis[i]
        if b < nsplit + slack_cols and z2[b] != 0:
            f = z2[b]
            for j in range(total + 1):
                z2[j] -= f * tableau[i][j]
    iterate(z2, phase1_cols)

    values: Dict[Hashable, Fraction] = {}
    basic_value = {basis[i]: tableau[i][total] for i in range(nrows)}
    for name in names:
        c = col_of[name]
        values[name] = basic_value.get(c, Fraction(0)) - basic_value.get(
            c + 1, Fraction(0)
        )
    objective_value = sign * -z2[total]
    return objective_value, values


def feasible(rows: Sequence[LpRow]) -> bool:
    """Exact feasibility, deciding strict rows via a slack-maximizing LP."""
    weak: List[LpRow] = []
    eps = ("__eps__",)  # tuple key cannot collide with variable names
    has_strict = False
    for terms, rel, rhs in rows:
        if rel is Relation.LT:
            has_strict = True
            weak.append(({**terms, eps: Fraction(1)}, Relation.LE, rhs))
        elif rel is Relation.GT:
            has_strict = True
            weak.append(({**terms, eps: Fraction(-1)}, Relation.GE, rhs))
        else:
            weak.append((terms, rel, rhs))
    try:
        if not has_strict:
            simplex(weak, {}, "min")
            return True
        weak.append(({eps: Fraction(1)}, Relation.GE, Fraction(0)))
        try:
            best, _ = simplex(weak, {eps: Fraction(1)}, "max")
        except Unbounded:
            return True
        return best > 0
    except Infeasible:
        return False


# -- system-level optimization ------------------------------------------------


@dataclass(frozen=True)
class OptResult:
    value: Fraction
    assignment: Mapping[str, Fraction]
    mode: Optional[ModeAssignment] = None
    nodes_explored: int = 0


def _lp_rows(system: ConstraintSystem) -> List[LpRow]:
    out: List[LpRow] = []
    for c in system.conjuncts:
        if not c.is_numeric:
            raise StructuralError(
                "symbolic coefficients remain; presolve the system first"
            )
        if c.has_intervals:
            raise UnsupportedInterval(
                "toleranced rows cannot be optimized directly;"
                " relax them to inequalities or use optimize_interval"
            )
        out.append((c.terms, c.relation, c.rhs))
    return out


def _objective_of(
    system: ConstraintSystem, objective: Optional[Objective]
) -> Objective:
    obj = objective or system.objective
    if obj is None:
        raise ValueError("no objective given")
    for name in obj.terms:
        if name not in system.variables:
            raise StructuralError(f"objective references unknown variable {name!r}")
    return obj


def optimize(
    system: ConstraintSystem, objective: Optional[Objective] = None
) -> OptResult:
    """LP over a disjunction-free system; branch and bound over binaries."""
    if system.disjunctions:
        raise HasDisjunctions("use optimize_disjunctive for OR-ed systems")
    obj = _objective_of(system, objective)
    rows = _lp_rows(system)
    if system.binaries:
        return _optimize_binary(system, rows, obj)
    value, values = simplex(rows, obj.terms, obj.sense)
    assignment = {v: values.get(v, Fraction(0)) for v in system.variables}
    return OptResult(value, assignment, nodes_explored=1)


def _optimize_binary(
    system: ConstraintSystem, rows: List[LpRow], obj: Objective
) -> OptResult:
    binaries = list(system.binaries)
    base = list(rows)
    for y in binaries:
        base.append(({y: Fraction(1)}, Relation.GE, Fraction(0)))
        base.append(({y: Fraction(1)}, Relation.LE, Fraction(1)))
    best: Optional[OptResult] = None
    nodes = 0
    maximizing = obj.sense == "max"

    def better(a: Fraction, b: Fraction) -> bool:
        return a > b if maximizing else a < b

    def descend(fixed: Dict[str, Fraction]) -> None:
        nonlocal best, nodes
        nodes += 1
        rows_here = base + [
            ({y: Fraction(1)}, Relation.EQ, v) for y, v in fixed.items()
        ]
        try:
            bound, values = simplex(rows_here, obj.terms, obj.sense)
        except Infeasible:
            return
        if best is not None and not better(bound, best.value):
            return
        fractional = [
            y
            for y in binaries
            if y not in fixed
            and values.get(y, Fraction(0)) not in (Fraction(0), Fraction(1))
        ]
        if not fractional:
            # integral relaxation: snap the remaining binaries as solved
            assignment = {v: values.get(v, Fraction(0)) for v in system.variables}
            if best is None or better(bound, best.value):
                best = OptResult(bound, assignment, nodes_explored=0)
            return
        y = fractional[0]
        for v in (Fraction(1), Fraction(0)):
            descend({**fixed, y: v})

    descend({})
    if best is None:
        raise Infeasible("no binary assignment satisfies the rows")
    return OptResult(best.value, best.assignment, nodes_explored=nodes)


def optimize_disjunctive(
    system: ConstraintSystem, objective: Optional[Objective] = None
) -> OptResult:
    """Branch and bound over disjunction branches in declaration order.

    The relaxation at a node drops all unchosen disjunctions, so its LP
    value bounds every completion; pruning on "not strictly better" keeps
    the first optimum encountered, which makes the reported mode the
    declaration-order-minimal one among optima.
    """
    obj = _objective_of(system, objective)
    if system.binaries:
        raise StructuralError("mixing binaries and disjunctions is not supported")
    for d in system.disjunctions:
        for branch in d.branches:
            for c in branch:
                if c.relation.is_strict:
                    raise UnsupportedStrict(
                        f"{d.label}: strict branch rows are not optimizable"
                    )
    base = _lp_rows(system)
    disjunctions = system.disjunctions
    labels = [d.label for d in disjunctions]
    maximizing = obj.sense == "max"
    best: Optional[OptResult] = None
    nodes = 0

    def branch_rows(d: Disjunction, idx: int) -> List[LpRow]:
        out = []
        for c in d.branches[idx]:
            if not c.is_numeric:
                raise StructuralError(
                    "symbolic coefficients remain; presolve the system first"
                )
            if c.has_intervals:
                raise UnsupportedInterval(
                    "toleranced branch rows need relaxation or optimize_interval"
                )
            out.append((c.terms, c.relation, c.rhs))
        return out

    def better(a: Fraction, b: Fraction) -> bool:
        return a > b if maximizing else a < b

    def descend(rows: List[LpRow], k: int, chosen: List[int]) -> None:
        nonlocal best, nodes
        nodes += 1
        try:
            bound, values = simplex(rows, obj.terms, obj.sense)
        except Infeasible:
            return
        except Unbounded:
            if k == len(disjunctions):
                raise
            # relaxation without the remaining disjunctions is unbounded:
            # no usable bound, but completions may still be finite
            bound = None
        if bound is not None and best is not None and not better(bound, best.value):
            return
        if k == len(disjunctions):
            assignment = {v: values.get(v, Fraction(0)) for v in system.variables}
            mode = ModeAssignment(tuple(zip(labels, chosen)))
            best = OptResult(bound, assignment, mode)
            return
        for idx in range(disjunctions[k].num_branches):
            descend(rows + branch_rows(disjunctions[k], idx), k + 1, chosen + [idx])

    descend(base, 0, [])
    if best is None:
        raise Infeasible("every branch combination is infeasible")
    return OptResult(best.value, best.assignment, best.mode, nodes)


def optimize_interval(
    system: ConstraintSystem,
    objective: Optional[Objective] = None,
    seed: int = 0,
    samples: int = 12,
) -> OptResult:
    """Optimize over a coefficient box by instantiating its vertices.

    Sound for the benchmark families because each toleranced coefficient
    occupies a single matrix position, making every solution component
    monotone across the box. A seeded set of interior instantiations is
    optimized as a guard: an interior value outside the vertex hull means
    the monotone assumption broke, reported as NonMonotoneInterval.
    """
    obj = _objective_of(system, objective)

    def opt_instance(inst: ConstraintSystem) -> OptResult:
        if inst.disjunctions:
            return optimize_disjunctive(inst, obj)
        return optimize(inst, obj)

    spots = interval_mod.interval_positions(system)
    if not spots:
        return opt_instance(system)
    results = [opt_instance(v) for v in interval_mod.vertex_instantiations(system)]
    values = [r.value for r in results]
    lo, hi = min(values), max(values)
    rng = random.Random(seed)
    for _ in range(samples):
        inner = opt_instance(interval_mod.sample_instantiation(system, rng))
        if not lo <= inner.value <= hi:
            raise NonMonotoneInterval(
                f"interior optimum {inner.value} escapes the vertex hull"
                f" [{lo}, {hi}]"
            )
    want = max if obj.sense == "max" else min
    winner = results[values.index(want(values))]
    return OptResult(winner.value, winner.assignment, winner.mode, len(results))


# -- feasibility of mixed systems ---------------------------------------------


def system_feasible(system: ConstraintSystem) -> bool:
    """Exact satisfiability of a disjunction-free numeric system.

    Equalities are eliminated first; the inequality rows are rewritten over
    the surviving free variables, and only a residual LP (if any inequality
    still involves free variables) goes to the simplex.
    """
    if system.disjunctions:
        raise HasDisjunctions("instantiate a mode before checking feasibility")
    index = system.variable_index()
    elim = Elimination(len(system.variables))
    inequalities: List[LinearConstraint] = []
    for c in system.conjuncts:
        if not c.is_numeric:
            raise StructuralError("symbolic coefficients have no feasibility check")
        if c.relation is Relation.EQ:
            elim.add_row({index[n]: v for n, v in c.terms.items()}, c.rhs)
        else:
            inequalities.append(c)
    elim.run()
    if elim.infeasible:
        return False
    residual: List[LpRow] = []
    for c in inequalities:
        terms, rhs = elim.reduce({index[n]: v for n, v in c.terms.items()}, c.rhs)
        if not terms:
            zero = Fraction(0)
            ok = {
                Relation.LE: zero <= rhs,
                Relation.GE: zero >= rhs,
                Relation.LT: zero < rhs,
                Relation.GT: zero > rhs,
            }[c.relation]
            if not ok:
                return False
        else:
            residual.append((terms, c.relation, rhs))
    if not residual:
        return True
    return feasible(residual)


# -- diagnosis ----------------------------------------------------------------

OK_WEIGHT = Fraction(9, 10)
FAULT_WEIGHT = Fraction(1, 10)
FAULT_TAG = "Faulty"


@dataclass(frozen=True)
class DiagnosisModel:
    """A system whose component behaviors carry prior weights."""

    system: ConstraintSystem
    suspects: Tuple[str, ...]


@dataclass(frozen=True)
class DiagnosisResult:
    probability: Fraction
    faults: Tuple[str, ...]
    mode: ModeAssignment


def _law_component(c: LinearConstraint) -> Optional[str]:
    """Component id if the row is a resistor law u1_X - u2_X = R*i1_X."""
    if c.relation is not Relation.EQ or len(c.terms) != 3 or c.rhs != 0:
        return None
    names = sorted(c.terms)
    tails = set()
    for prefix in ("i1_", "u1_", "u2_"):
        match = [n for n in names if n.startswith(prefix)]
        if len(match) != 1:
            return None
        tails.add(match[0][len(prefix):])
    if len(tails) != 1:
        return None
    return tails.pop()


def build_diagnosis(
    system: ConstraintSystem,
    ok_weight: Fraction = OK_WEIGHT,
    fault_weight: Fraction = FAULT_WEIGHT,
) -> DiagnosisModel:
    """Attach weighted fault behavior to every resistor law and diode.

    A resistor law becomes Correct (the law, weight 0.9) or Faulty (open:
    i1 = 0, weight 0.1). A diode's mode disjunction gains a Faulty-open
    branch: Conducting and Blocking keep weight 0.9 each, Faulty gets 0.1.
    """
    ok_weight, fault_weight = Fraction(ok_weight), Fraction(fault_weight)
    rows = []
    suspects: List[str] = []
    for row in system.rows:
        if isinstance(row, Disjunction):
            if row.branch_tags == ("Conducting", "Blocking"):
                label = row.label
                i1 = f"i1_{label}"
                faulty = (
                    LinearConstraint({i1: Fraction(1)}, Relation.EQ, Fraction(0)),
                )
                rows.append(
                    Disjunction(
                        label,
                        row.branches + (faulty,),
                        row.branch_tags + (FAULT_TAG,),
                        (ok_weight, ok_weight, fault_weight),
                    )
                )
                suspects.append(label)
            else:
                rows.append(row)
            continue
        cid = _law_component(row)
        if cid is None:
            rows.append(row)
            continue
        faulty = (
            LinearConstraint({f"i1_{cid}": Fraction(1)}, Relation.EQ, Fraction(0)),
        )
        rows.append(
            Disjunction(
                cid,
                ((row,), faulty),
                ("Correct", FAULT_TAG),
                (ok_weight, fault_weight),
            )
        )
        suspects.append(cid)
    out = ConstraintSystem(
        system.variables, system.parameters, tuple(rows), system.objective, system.binaries
    )
    return DiagnosisModel(out, tuple(suspects))


def enumerate_diagnoses(
    model: DiagnosisModel,
    measurements: Optional[Mapping[str, Fraction]] = None,
    limit: Optional[int] = None,
) -> List[DiagnosisResult]:
    """Feasible fault modes, most probable first.

    Candidates are ranked by (probability descending, fault set ascending),
    so ties prefer the lexicographically smallest fault set; each candidate
    is checked exactly, measurements included.
    """
    system = model.system
    if measurements:
        system = with_measurements(system, measurements)
    total = 1
    for d in system.disjunctions:
        total *= d.num_branches
        if total > MAX_ENUMERATION:
            raise ExplosionGuard(
                f"{total}+ fault combinations exceeds the"
                f" {MAX_ENUMERATION} enumeration cap"
            )
    weights = {
        d.label: d.branch_weights or tuple(Fraction(1) for _ in d.branches)
        for d in system.disjunctions
    }
    tags = {d.label: d.branch_tags for d in system.disjunctions}
    scored = []
    for mode in all_branches(system):
        prob = Fraction(1)
        faults = []
        for label, idx in mode.choices:
            prob *= weights[label][idx]
            if tags[label][idx] == FAULT_TAG:
                faults.append(label)
        scored.append((-prob, tuple(faults), mode))
    scored.sort(key=lambda t: (t[0], t[1]))
    out: List[DiagnosisResult] = []
    for negp, faults, mode in scored:
        if limit is not None and len(out) >= limit:
            break
        if system_feasible(instantiate(system, mode)):
            out.append(DiagnosisResult(-negp, faults, mode))
    return out


def diagnose(
    model: DiagnosisModel,
    measurements: Optional[Mapping[str, Fraction]] = None,
) -> DiagnosisResult:
    """The most probable feasible fault mode."""
    results = enumerate_diagnoses(model, measurements, limit=1)
    if not results:
        raise Unsatisfiable("no fault mode explains the measurements")
    return results[0]
