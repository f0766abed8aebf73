"""Branch search over disjunctive systems.

Each disjunction (a diode's conduction states, a resistor's alternate
values) multiplies the candidate modes, so the diode chains have 4^n of
them. The search walks disjunctions in declaration order, carrying an
exact elimination of all equality rows chosen so far; a branch is
tentatively added by eliminating its equality rows incrementally and
rewriting the inequality rows seen so far over the surviving free
columns. A prefix dies as soon as the equalities turn inconsistent, a
rewritten inequality becomes a violated constant, or the residual
inequalities fail a small feasibility LP. Whatever the prefix checks miss
the leaf check catches exactly: unique solutions are verified against
every inequality with strict relations decided by Fraction comparison,
underdetermined leaves get a strictness-aware LP witness.

The default strategy tries Blocking first for diodes in position 1 and
Conducting first for position 4, which is the feasible pattern of the
diode-chain family in its drawn orientation, so the happy path does no
backtracking. Pins restrict a disjunction to one named branch.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import opt
from .errors import (
    ExplosionGuard,
    Infeasible,
    StructuralError,
    Unsatisfiable,
    UnsupportedInterval,
)
from .ir import (
    ConstraintSystem,
    Disjunction,
    LinearConstraint,
    ModeAssignment,
    Relation,
    instantiate,
)
from .linsolve import Elimination, ExactAssignment

MAX_ENUMERATION = opt.MAX_ENUMERATION

DEFAULT_PREFERENCES: Tuple[Tuple[str, str], ...] = (
    ("D1", "Blocking"),
    ("D4", "Conducting"),
)


@dataclass(frozen=True)
class SearchStrategy:
    """Branch ordering: pins force one branch, preferences go first.

    A preference (name, tag) applies to the disjunction labeled name and
    to suffixed copies of it (name_B2, ...), moving the tagged branch to
    the front of the trial order.
    """

    pins: Mapping[str, str] = field(default_factory=dict)
    preferences: Tuple[Tuple[str, str], ...] = DEFAULT_PREFERENCES

    def order(self, d: Disjunction) -> List[int]:
        if d.label in self.pins:
            tag = self.pins[d.label]
            if tag not in d.branch_tags:
                raise StructuralError(
                    f"{d.label} has no branch tagged {tag!r};"
                    f" choices are {', '.join(d.branch_tags)}"
                )
            return [d.branch_tags.index(tag)]
        out = list(range(d.num_branches))
        for name, tag in self.preferences:
            applies = d.label == name or d.label.startswith(name + "_")
            if applies and tag in d.branch_tags:
                first = d.branch_tags.index(tag)
                out.remove(first)
                out.insert(0, first)
                break
        return out

    def pinned(self, **pins: str) -> "SearchStrategy":
        return replace(self, pins={**self.pins, **pins})


@dataclass
class SearchStats:
    branches_explored: int = 0
    leaves_checked: int = 0
    prunes: int = 0


@dataclass(frozen=True)
class SearchResult:
    mode: ModeAssignment
    assignment: ExactAssignment
    stats: SearchStats


IndexedRow = Tuple[Dict[int, Fraction], Relation, Fraction]


def _indexed(c: LinearConstraint, index: Mapping[str, int]) -> Tuple[Dict[int, Fraction], Fraction]:
    if not c.is_numeric:
        raise StructuralError("symbolic coefficients; presolve the system first")
    if c.has_intervals:
        raise UnsupportedInterval(
            "toleranced rows have no single truth value; relax them first"
        )
    return {index[n]: v for n, v in c.terms.items()}, c.rhs


def _base_state(
    system: ConstraintSystem,
) -> Tuple[Dict[str, int], Elimination, List[IndexedRow]]:
    index = system.variable_index()
    elim = Elimination(len(system.variables))
    inequalities: List[IndexedRow] = []
    for c in system.conjuncts:
        terms, rhs = _indexed(c, index)
        if c.relation is Relation.EQ:
            elim.add_row(terms, rhs)
        else:
            inequalities.append((terms, c.relation, rhs))
    elim.run()
    return index, elim, inequalities


def _constant_holds(rel: Relation, rhs: Fraction) -> bool:
    zero = Fraction(0)
    return {
        Relation.EQ: zero == rhs,
        Relation.LE: zero <= rhs,
        Relation.GE: zero >= rhs,
        Relation.LT: zero < rhs,
        Relation.GT: zero > rhs,
    }[rel]


def _prefix_alive(elim: Elimination, inequalities: Sequence[IndexedRow]) -> bool:
    """Cheap necessary condition for the current prefix to extend."""
    if elim.infeasible:
        return False
    residual = []
    for terms, rel, rhs in inequalities:
        red, rr = elim.reduce(terms, rhs)
        if not red:
            if not _constant_holds(rel, rr):
                return False
        else:
            residual.append((red, rel, rr))
    if not residual:
        return True
    return opt.feasible(residual)


def _inequality_witness(
    rows: Sequence[IndexedRow],
) -> Optional[Dict[int, Fraction]]:
    """A point satisfying the rows, strict ones strictly, or None."""
    eps = ("__eps__",)
    weak = []
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
        if has_strict:
            weak.append(({eps: Fraction(1)}, Relation.GE, Fraction(0)))
            weak.append(({eps: Fraction(1)}, Relation.LE, Fraction(1)))
            best, values = opt.simplex(weak, {eps: Fraction(1)}, "max")
            if best <= 0:
                return None
        else:
            _, values = opt.simplex(weak, {}, "min")
    except Infeasible:
        return None
    values.pop(eps, None)
    return {c: v for c, v in values.items() if isinstance(c, int)}


def _leaf_assignment(
    system: ConstraintSystem,
    elim: Elimination,
    inequalities: Sequence[IndexedRow],
) -> Optional[ExactAssignment]:
    """Exact witness for a fully chosen mode, or None if infeasible."""
    if elim.infeasible:
        return None
    vector = elim.solution()
    if vector is None:
        residual: List[IndexedRow] = []
        for terms, rel, rhs in inequalities:
            red, rr = elim.reduce(terms, rhs)
            if not red:
                if not _constant_holds(rel, rr):
                    return None
            else:
                residual.append((red, rel, rr))
        witness = _inequality_witness(residual) if residual else {}
        if witness is None:
            return None
        free = {c: witness.get(c, Fraction(0)) for c in elim.free_cols}
        vector = elim.complete(free)
    values = {name: vector[i] for name, i in system.variable_index().items()}
    assignment = ExactAssignment(values)
    for terms, rel, rhs in inequalities:
        lhs = sum((v * vector[c] for c, v in terms.items()), Fraction(0))
        gap = rhs - lhs
        if not _constant_holds(rel, gap):
            return None
    return assignment


def check_branch(
    system: ConstraintSystem, mode: ModeAssignment
) -> Optional[ExactAssignment]:
    """Exact feasibility witness for one complete mode choice."""
    inst = instantiate(system, mode)
    _, elim, inequalities = _base_state(inst)
    return _leaf_assignment(inst, elim, inequalities)


def search_first(
    system: ConstraintSystem, strategy: Optional[SearchStrategy] = None
) -> SearchResult:
    """Depth-first search for the first feasible mode under the strategy."""
    strategy = strategy or SearchStrategy()
    index, elim, base_ineqs = _base_state(system)
    disjunctions = system.disjunctions
    labels = [d.label for d in disjunctions]
    stats = SearchStats()

    def descend(
        elim: Elimination, inequalities: List[IndexedRow], k: int, chosen: List[int]
    ) -> Optional[SearchResult]:
        if k == len(disjunctions):
            stats.leaves_checked += 1
            assignment = _leaf_assignment(system, elim, inequalities)
            if assignment is None:
                stats.prunes += 1
                return None
            mode = ModeAssignment(tuple(zip(labels, chosen)))
            return SearchResult(mode, assignment, stats)
        d = disjunctions[k]
        for idx in strategy.order(d):
            stats.branches_explored += 1
            twin = elim.clone()
            more = list(inequalities)
            for c in d.branches[idx]:
                terms, rhs = _indexed(c, index)
                if c.relation is Relation.EQ:
                    twin.add_and_run(terms, rhs)
                else:
                    more.append((terms, c.relation, rhs))
            if not _prefix_alive(twin, more):
                stats.prunes += 1
                continue
            hit = descend(twin, more, k + 1, chosen + [idx])
            if hit is not None:
                return hit
        return None

    if not _prefix_alive(elim, base_ineqs):
        raise Unsatisfiable("conjunct rows alone are inconsistent", stats)
    hit = descend(elim, base_ineqs, 0, [])
    if hit is None:
        raise Unsatisfiable("every branch combination is infeasible", stats)
    return hit


def enumerate_feasible(
    system: ConstraintSystem, strategy: Optional[SearchStrategy] = None
) -> List[SearchResult]:
    """All feasible modes in strategy order, each with its exact witness."""
    strategy = strategy or SearchStrategy()
    total = 1
    for d in system.disjunctions:
        total *= d.num_branches
        if total > MAX_ENUMERATION:
            raise ExplosionGuard(
                f"{total}+ modes exceeds the {MAX_ENUMERATION} enumeration cap"
            )
    index, elim, base_ineqs = _base_state(system)
    disjunctions = system.disjunctions
    labels = [d.label for d in disjunctions]
    stats = SearchStats()
    out: List[SearchResult] = []

    def descend(
        elim: Elimination, inequalities: List[IndexedRow], k: int, chosen: List[int]
    ) -> None:
        if k == len(disjunctions):
            stats.leaves_checked += 1
            assignment = _leaf_assignment(system, elim, inequalities)
            if assignment is not None:
                mode = ModeAssignment(tuple(zip(labels, chosen)))
                out.append(SearchResult(mode, assignment, stats))
            return
        d = disjunctions[k]
        for idx in strategy.order(d):
            stats.branches_explored += 1
            twin = elim.clone()
            more = list(inequalities)
            for c in d.branches[idx]:
                terms, rhs = _indexed(c, index)
                if c.relation is Relation.EQ:
                    twin.add_and_run(terms, rhs)
                else:
                    more.append((terms, c.relation, rhs))
            if not _prefix_alive(twin, more):
                stats.prunes += 1
                continue
            descend(twin, more, k + 1, chosen + [idx])

    if _prefix_alive(elim, base_ineqs):
        descend(elim, base_ineqs, 0, [])
    return out
