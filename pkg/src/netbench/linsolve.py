"""Linear equation solving over exact rationals and doubles.

Two backends share the row extraction logic:

* solve_exact runs sparse Gauss-Jordan elimination over Fractions, with a
  Markowitz-style pivot rule (fewest-entry row, then fewest-occurrence
  column, then lowest index). On the chain-shaped benchmark systems fill-in
  stays local and the cost grows roughly linearly with the box count.
* solve_f64 assembles a scipy CSC matrix and factors it with SuperLU, then
  gates the result on the infinity-norm residual; anything above
  1e-9 * scale is reported as singular rather than returned.

The Elimination class is exposed for callers that need more than square
solving: feasibility of overdetermined equality systems, and rewriting
inequality rows over the free variables that survive elimination.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import splu

from .errors import (
    HasDisjunctions,
    NotSquare,
    SingularSystem,
    StructuralError,
)
from .ir import ConstraintSystem, LinearConstraint, Relation

RESIDUAL_RTOL = 1e-9


@dataclass(frozen=True)
class Assignment:
    """Float-valued solution keyed by variable name."""

    values: Mapping[str, float]
    residual_norm: float = 0.0

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def __contains__(self, name: str) -> bool:
        return name in self.values

    def __len__(self) -> int:
        return len(self.values)

    def items(self):
        return self.values.items()

    def get(self, name: str, default=None):
        return self.values.get(name, default)

    def as_dict(self) -> Dict[str, float]:
        return dict(self.values)


@dataclass(frozen=True)
class ExactAssignment:
    """Fraction-valued solution keyed by variable name."""

    values: Mapping[str, Fraction]

    def __getitem__(self, name: str) -> Fraction:
        return self.values[name]

    def __contains__(self, name: str) -> bool:
        return name in self.values

    def __len__(self) -> int:
        return len(self.values)

    def items(self):
        return self.values.items()

    def get(self, name: str, default=None):
        return self.values.get(name, default)

    def as_dict(self) -> Dict[str, Fraction]:
        return dict(self.values)

    def to_float(self) -> Assignment:
        return Assignment({k: float(v) for k, v in self.values.items()})


SparseRow = Dict[int, Fraction]


class Elimination:
    """Sparse exact Gauss-Jordan elimination with incremental row entry.

    Add equality rows (as column-index dicts), call run(), then inspect:
    infeasible, free_cols, solution(), or reduce() an extra row over the
    remaining free columns. Pivot rows end up containing only their pivot
    column plus free columns, which is what makes reduce() a single pass.
    """

    def __init__(self, num_cols: int):
        self.num_cols = num_cols
        self.rows: List[SparseRow] = []
        self.rhs: List[Fraction] = []
        self.col_rows: Dict[int, set] = {}
        self.pivot_row_of_col: Dict[int, int] = {}
        self.pivot_col_of_row: Dict[int, int] = {}
        self.infeasible = False
        self._heap: List[Tuple[int, int]] = []
        self._dropped: set = set()

    def add_row(self, terms: Mapping[int, Fraction], rhs: Fraction) -> None:
        row = {c: v for c, v in terms.items() if v != 0}
        if not row:
            if rhs != 0:
                self.infeasible = True
            return
        rid = len(self.rows)
        self.rows.append(row)
        self.rhs.append(rhs)
        for c in row:
            self.col_rows.setdefault(c, set()).add(rid)
        heapq.heappush(self._heap, (len(row), rid))

    def _is_open(self, rid: int) -> bool:
        return rid not in self.pivot_col_of_row and rid not in self._dropped

    def run(self) -> "Elimination":
        while self._heap and not self.infeasible:
            nnz, rid = heapq.heappop(self._heap)
            if not self._is_open(rid) or len(self.rows[rid]) != nnz:
                continue
            row = self.rows[rid]
            col = min(row, key=lambda c: (len(self.col_rows[c]), c))
            self._pivot(rid, col)
        return self

    def _pivot(self, rid: int, col: int) -> None:
        self.pivot_row_of_col[col] = rid
        self.pivot_col_of_row[rid] = col
        prow, pval = self.rows[rid], self.rows[rid][col]
        for other in sorted(self.col_rows[col] - {rid}):
            if other in self._dropped:
                continue
            orow = self.rows[other]
            factor = orow[col] / pval
            for c, v in prow.items():
                new = orow.get(c, Fraction(0)) - factor * v
                if new == 0:
                    if c in orow:
                        del orow[c]
                        self.col_rows[c].discard(other)
                else:
                    if c not in orow:
                        self.col_rows.setdefault(c, set()).add(other)
                    orow[c] = new
            self.rhs[other] -= factor * self.rhs[rid]
            if not orow:
                if self.rhs[other] != 0:
                    self.infeasible = True
                    return
                self._dropped.add(other)
            elif self._is_open(other):
                heapq.heappush(self._heap, (len(orow), other))

    @property
    def free_cols(self) -> List[int]:
        return [c for c in range(self.num_cols) if c not in self.pivot_row_of_col]

    @property
    def rank(self) -> int:
        return len(self.pivot_row_of_col)

    def solution(self) -> Optional[List[Fraction]]:
        """Unique solution vector, or None if infeasible or underdetermined."""
        if self.infeasible or len(self.pivot_row_of_col) != self.num_cols:
            return None
        out = [Fraction(0)] * self.num_cols
        for col, rid in self.pivot_row_of_col.items():
            out[col] = self.rhs[rid] / self.rows[rid][col]
        return out

    def complete(self, free_values: Mapping[int, Fraction]) -> List[Fraction]:
        """Full vector from values for every free column."""
        if self.infeasible:
            raise SingularSystem("inconsistent equality rows")
        out = [Fraction(0)] * self.num_cols
        for c in self.free_cols:
            out[c] = Fraction(free_values[c])
        for col, rid in self.pivot_row_of_col.items():
            total = self.rhs[rid]
            for c, v in self.rows[rid].items():
                if c != col:
                    total -= v * out[c]
            out[col] = total / self.rows[rid][col]
        return out

    def reduce(
        self, terms: Mapping[int, Fraction], rhs: Fraction
    ) -> Tuple[SparseRow, Fraction]:
        """Rewrite a row over the free columns by substituting pivots."""
        out: SparseRow = {}
        for c, v in terms.items():
            if v != 0:
                out[c] = out.get(c, Fraction(0)) + v
        for c in [c for c in out if c in self.pivot_row_of_col]:
            t = out.pop(c)
            rid = self.pivot_row_of_col[c]
            pval = self.rows[rid][c]
            for f, a in self.rows[rid].items():
                if f == c:
                    continue
                nv = out.get(f, Fraction(0)) - t * a / pval
                if nv == 0:
                    out.pop(f, None)
                else:
                    out[f] = nv
            rhs = rhs - t * self.rhs[rid] / pval
        return out, rhs

    def clone(self) -> "Elimination":
        """Independent copy; lets a search branch without re-eliminating."""
        twin = Elimination(self.num_cols)
        twin.rows = [dict(r) for r in self.rows]
        twin.rhs = list(self.rhs)
        twin.col_rows = {c: set(rs) for c, rs in self.col_rows.items()}
        twin.pivot_row_of_col = dict(self.pivot_row_of_col)
        twin.pivot_col_of_row = dict(self.pivot_col_of_row)
        twin.infeasible = self.infeasible
        twin._heap = list(self._heap)
        twin._dropped = set(self._dropped)
        return twin

    def add_and_run(self, terms: Mapping[int, Fraction], rhs: Fraction) -> "Elimination":
        """Eliminate one more row against the already-finished state."""
        reduced, rhs = self.reduce(terms, rhs)
        self.add_row(reduced, rhs)
        return self.run()


def _require_plain(system: ConstraintSystem) -> None:
    if system.disjunctions:
        raise HasDisjunctions(
            "system has disjunctions; pick a mode or search before solving"
        )
    if not system.is_numeric:
        raise StructuralError("system has symbolic coefficients")


def equality_rows(
    system: ConstraintSystem,
) -> Tuple[List[SparseRow], List[Fraction]]:
    """Extract all rows, which must be numeric equalities."""
    index = system.variable_index()
    rows: List[SparseRow] = []
    rhs: List[Fraction] = []
    for c in system.conjuncts:
        if c.relation is not Relation.EQ:
            raise StructuralError(
                f"non-equality row {c.render()!r}; use the mode search or optimizer"
            )
        rows.append({index[name]: coef for name, coef in c.terms.items()})
        rhs.append(c.rhs)
    return rows, rhs


def solve_exact(system: ConstraintSystem) -> ExactAssignment:
    """Solve a square numeric equality system over the rationals."""
    _require_plain(system)
    rows, rhs = equality_rows(system)
    n = len(system.variables)
    if len(rows) != n:
        raise NotSquare(f"{len(rows)} equations over {n} variables")
    elim = Elimination(n)
    for row, b in zip(rows, rhs):
        elim.add_row(row, b)
    elim.run()
    if elim.infeasible:
        raise SingularSystem("equality rows are inconsistent")
    x = elim.solution()
    if x is None:
        raise SingularSystem("coefficient matrix is rank deficient")
    return ExactAssignment(
        {name: x[k] for k, name in enumerate(system.variables)}
    )


def solve_f64(system: ConstraintSystem) -> Assignment:
    """Solve a square numeric equality system in double precision.

    The SuperLU solution is accepted only if the infinity-norm residual
    stays within RESIDUAL_RTOL relative to the system scale.
    """
    _require_plain(system)
    rows, rhs = equality_rows(system)
    n = len(system.variables)
    if len(rows) != n:
        raise NotSquare(f"{len(rows)} equations over {n} variables")
    data: List[float] = []
    row_idx: List[int] = []
    col_idx: List[int] = []
    for r, row in enumerate(rows):
        for c, v in row.items():
            row_idx.append(r)
            col_idx.append(c)
            data.append(float(v))
    matrix = csc_matrix((data, (row_idx, col_idx)), shape=(n, n))
    b = np.array([float(v) for v in rhs])
    try:
        factor = splu(matrix.tocsc())
        x = factor.solve(b)
    except RuntimeError as exc:
        raise SingularSystem(f"factorization failed: {exc}")
    residual = matrix @ x - b
    norm = float(np.max(np.abs(residual))) if n else 0.0
    gate = RESIDUAL_RTOL * float(system.scale())
    if not np.all(np.isfinite(x)) or norm > gate:
        raise SingularSystem(
            f"residual {norm:.3e} exceeds {gate:.3e}; matrix is numerically singular"
        )
    return Assignment(
        {name: float(x[k]) for k, name in enumerate(system.variables)},
        residual_norm=norm,
    )


def residual(system: ConstraintSystem, assignment: Mapping[str, float]) -> float:
    """Infinity-norm equality residual of a candidate float assignment."""
    worst = 0.0
    for c in system.conjuncts:
        if c.relation is not Relation.EQ:
            continue
        total = -float(c.rhs)
        for name, coef in c.terms.items():
            total += float(coef) * float(assignment[name])
        worst = max(worst, abs(total))
    return worst


def feasible_equalities(
    rows: Sequence[SparseRow], rhs: Sequence[Fraction], num_cols: int
) -> Elimination:
    """Eliminate an arbitrary stack of equality rows; caller inspects state."""
    elim = Elimination(num_cols)
    for row, b in zip(rows, rhs):
        elim.add_row(row, b)
        if elim.infeasible:
            break
    return elim.run()
