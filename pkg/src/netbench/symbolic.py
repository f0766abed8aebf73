"""Closed-form network functions over symbolic parameters.

solve_symbolic turns a square all-equality system whose coefficients may
be polynomials in the declared parameters into one rational function per
variable, all sharing the elimination determinant as denominator. Two
phases keep the polynomial arithmetic small:

* substitution: rows with at most two terms and plain Fraction
  coefficients (ground pins, wire equalities, pairwise current sums) are
  folded away first; on the benchmark netlists this removes most of the
  system without any polynomial products;
* fraction-free elimination: the residual square block is reduced by
  one-step Bareiss, whose divisions are exact by construction, followed by
  fraction-free back substitution against the final pivot (the
  determinant), so intermediate blowup never leaves the polynomial ring.

Everything downstream consumes RationalFunction values: point evaluation,
randomized equivalence checking, and interval range evaluation.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple, Union

from .errors import (
    DenominatorStraddlesZero,
    DenominatorZero,
    HasDisjunctions,
    NotSquare,
    SingularSymbolic,
    SizeCap,
    StructuralError,
)
from .interval import Interval
from .ir import (
    Coefficient,
    ConstraintSystem,
    LinearConstraint,
    ModeAssignment,
    Relation,
    instantiate,
)
from .polys import MultivarPoly, RationalFunction

SYMBOLIC_SIZE_LIMIT = 224

SymbolicSolution = Dict[str, RationalFunction]


def _as_poly(c: Coefficient, params: Tuple[str, ...]) -> MultivarPoly:
    if isinstance(c, MultivarPoly):
        return c
    return MultivarPoly.const(params, c)


def _normalize(c: Coefficient) -> Coefficient:
    if isinstance(c, MultivarPoly) and c.is_constant:
        return c.constant_value()
    return c


def _c_is_zero(c: Coefficient) -> bool:
    if isinstance(c, MultivarPoly):
        return c.is_zero
    return c == 0


def _c_mul(a: Coefficient, b: Coefficient, params: Tuple[str, ...]) -> Coefficient:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a * b
    return _normalize(_as_poly(a, params) * _as_poly(b, params))


def _c_sub(a: Coefficient, b: Coefficient, params: Tuple[str, ...]) -> Coefficient:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a - b
    return _normalize(_as_poly(a, params) - _as_poly(b, params))


# A substitution var := alpha*other + beta, with numeric alpha. beta may
# carry parameters; other is None when the row had a single term.
_Substitution = Tuple[str, Fraction, Optional[str], Coefficient]


def solve_symbolic(system: ConstraintSystem) -> SymbolicSolution:
    """Solve a square equality system into rational functions.

    Tolerance annotations on rows are ignored here: the symbolic path
    reads the exact coefficient, and ranges come later by evaluating the
    result over a parameter box (rf_interval_eval).
    """
    if system.disjunctions:
        raise HasDisjunctions(
            "system has disjunctions; pick a mode first (solve_branch_symbolic)"
        )
    n = len(system.variables)
    if n > SYMBOLIC_SIZE_LIMIT:
        raise SizeCap(
            f"{n} variables exceeds the symbolic limit of {SYMBOLIC_SIZE_LIMIT}"
        )
    if len(system.conjuncts) != n:
        raise NotSquare(f"{len(system.conjuncts)} equations for {n} variables")
    params = system.parameters
    rows: List[Optional[Dict[str, Coefficient]]] = []
    rhs: List[Coefficient] = []
    for c in system.conjuncts:
        if c.relation is not Relation.EQ:
            raise StructuralError("symbolic solving needs equality rows only")
        rows.append({v: _normalize(k) for v, k in c.terms.items()})
        rhs.append(_normalize(c.rhs))

    occurs: Dict[str, set] = {v: set() for v in system.variables}
    for i, row in enumerate(rows):
        for v in row:
            occurs[v].add(i)

    def substitutable(row: Dict[str, Coefficient]) -> bool:
        return 1 <= len(row) <= 2 and all(
            isinstance(c, Fraction) for c in row.values()
        )

    substitutions: List[_Substitution] = []
    queue = [i for i, row in enumerate(rows) if substitutable(row)]
    while queue:
        i = queue.pop(0)
        row = rows[i]
        if row is None or not substitutable(row):
            continue
        names = list(row)
        var = names[0]
        coef = row[var]
        if len(names) == 2:
            other: Optional[str] = names[1]
            alpha = -row[other] / coef
        else:
            other, alpha = None, Fraction(0)
        beta = (
            rhs[i] / coef
            if isinstance(rhs[i], Fraction)
            else _as_poly(rhs[i], params) / coef
        )
        substitutions.append((var, alpha, other, beta))
        rows[i] = None
        occurs[var].discard(i)
        if other is not None:
            occurs[other].discard(i)
        for j in sorted(occurs[var]):
            target = rows[j]
            c = target.pop(var)
            if other is not None:
                merged = _normalize(
                    _c_sub(
                        target.get(other, Fraction(0)),
                        _c_mul(c, -alpha, params),
                        params,
                    )
                )
                if _c_is_zero(merged):
                    target.pop(other, None)
                    occurs[other].discard(j)
                else:
                    target[other] = merged
                    occurs[other].add(j)
            rhs[j] = _c_sub(rhs[j], _c_mul(c, beta, params), params)
            if not target:
                if not _c_is_zero(rhs[j]):
                    raise SingularSymbolic("equality rows are inconsistent")
                rows[j] = None
            elif substitutable(target):
                queue.append(j)
        occurs[var] = set()

    eliminated = {var for var, _, _, _ in substitutions}
    residual_vars = [v for v in system.variables if v not in eliminated]
    residual_rows = [i for i, row in enumerate(rows) if row is not None]
    if len(residual_rows) != len(residual_vars):
        raise SingularSymbolic(
            f"rank defect: {len(residual_rows)} independent rows for"
            f" {len(residual_vars)} remaining variables"
        )

    solution: SymbolicSolution = {}
    one = MultivarPoly.const(params, 1)
    if residual_vars:
        col = {v: k for k, v in enumerate(residual_vars)}
        m = len(residual_vars)
        order = list(residual_vars)
        A = [[MultivarPoly.zero(params) for _ in range(m)] for _ in range(m)]
        b = [MultivarPoly.zero(params) for _ in range(m)]
        for r, i in enumerate(residual_rows):
            for v, c in rows[i].items():
                A[r][col[v]] = _as_poly(c, params)
            b[r] = _as_poly(rhs[i], params)

        prev = one
        for k in range(m):
            # full pivoting, constants before polynomials, then Markowitz
            # fill count: keeps parameter entries out of the updates for as
            # long as possible, which is what bounds the term growth
            row_nnz = [
                sum(1 for c in range(k, m) if not A[r][c].is_zero)
                for r in range(k, m)
            ]
            col_nnz = [
                sum(1 for r in range(k, m) if not A[r][c].is_zero)
                for c in range(k, m)
            ]
            best = None
            for r in range(k, m):
                for c in range(k, m):
                    entry = A[r][c]
                    if entry.is_zero:
                        continue
                    score = (
                        0 if entry.is_constant else 1,
                        (row_nnz[r - k] - 1) * (col_nnz[c - k] - 1),
                        len(entry.terms),
                        r,
                        c,
                    )
                    if best is None or score < best:
                        best = score
            if best is None:
                raise SingularSymbolic("rank defect: determinant is zero")
            _, _, _, pr, pc = best
            if pr != k:
                A[k], A[pr] = A[pr], A[k]
                b[k], b[pr] = b[pr], b[k]
            if pc != k:
                for row_k in A:
                    row_k[k], row_k[pc] = row_k[pc], row_k[k]
                order[k], order[pc] = order[pc], order[k]
            pk = A[k][k]
            for r in range(k + 1, m):
                fr = A[r][k]
                for c in range(k + 1, m):
                    A[r][c] = (pk * A[r][c] - fr * A[k][c]).exact_div(prev)
                b[r] = (pk * b[r] - fr * b[k]).exact_div(prev)
                A[r][k] = MultivarPoly.zero(params)
            prev = pk
        det = A[m - 1][m - 1]

        q: List[Optional[MultivarPoly]] = [None] * m
        q[m - 1] = b[m - 1]
        for i in range(m - 2, -1, -1):
            acc = b[i] * det
            for j in range(i + 1, m):
                if not A[i][j].is_zero:
                    acc = acc - A[i][j] * q[j]
            q[i] = acc.exact_div(A[i][i])
        for i, v in enumerate(order):
            solution[v] = RationalFunction.of(q[i], det)

    for var, alpha, other, beta in reversed(substitutions):
        value = RationalFunction.of(_as_poly(beta, params), one)
        if other is not None and alpha != 0:
            value = value + solution[other] * RationalFunction.const(params, alpha)
        solution[var] = value
    return solution


def solve_branch_symbolic(
    system: ConstraintSystem, mode: ModeAssignment
) -> SymbolicSolution:
    """Symbolic solution of one mode's equality part.

    The chosen branches' inequality rows (conduction direction, blocking
    voltage) are the validity region of the returned functions; checking
    them is up to the caller, at whatever parameter values are of interest.
    """
    inst = instantiate(system, mode)
    eq = tuple(c for c in inst.conjuncts if c.relation is Relation.EQ)
    square = ConstraintSystem(inst.variables, inst.parameters, eq)
    return solve_symbolic(square)


def rf_eval(rf: RationalFunction, point: Mapping[str, Fraction]) -> Fraction:
    """Exact value at a parameter point."""
    den = rf.den.eval(point)
    if den == 0:
        raise DenominatorZero(f"denominator vanishes at {dict(point)}")
    return rf.num.eval(point) / den


def rf_equivalent(
    f: RationalFunction,
    g: RationalFunction,
    trials: int = 20,
    seed: int = 0,
    low: int = 10**3,
    high: int = 10**6,
) -> bool:
    """Randomized identity test by exact cross-multiplication.

    Samples integer parameter points and compares f.num*g.den with
    g.num*f.den exactly; points where either denominator vanishes are
    redrawn. Distinct rational functions of benchmark-sized degree agree
    on 20 such points with vanishing probability.
    """
    names = sorted(set(f.params) | set(g.params))
    rng = random.Random(seed)
    done = 0
    attempts = 0
    while done < trials:
        attempts += 1
        if attempts > 100 * trials:
            raise DenominatorZero("could not sample nonvanishing denominators")
        point = {p: Fraction(rng.randint(low, high)) for p in names}
        fd, gd = f.den.eval(point), g.den.eval(point)
        if fd == 0 or gd == 0:
            continue
        if f.num.eval(point) * gd != g.num.eval(point) * fd:
            return False
        done += 1
    return True


def _poly_interval(p: MultivarPoly, box: Mapping[str, Interval]) -> Interval:
    total = Interval.point(0.0)
    for exps, coef in p.terms.items():
        term = Interval.from_fraction(coef)
        for name, e in zip(p.params, exps):
            if e == 0:
                continue
            if name not in box:
                raise StructuralError(f"no interval given for parameter {name}")
            term = term * (box[name] ** e)
        total = total + term
    return total


def rf_interval_eval(
    rf: RationalFunction, box: Mapping[str, Interval]
) -> Interval:
    """Outward-rounded range enclosure of rf over a parameter box."""
    num = _poly_interval(rf.num, box)
    den = _poly_interval(rf.den, box)
    try:
        return num / den
    except ZeroDivisionError:
        raise DenominatorStraddlesZero(
            f"denominator range {den.render()} contains zero"
        ) from None
