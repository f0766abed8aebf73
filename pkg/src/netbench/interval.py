"""Outward-rounded interval arithmetic and interval linear solving.

Toleranced instances carry [lo, hi] bounds on some coefficients. The solver
returns an enclosure of the united solution set: for every choice of
coefficients inside their intervals, the exact solution of that system lies
inside the reported boxes. Soundness comes from one-ulp outward nudges
after every floating-point operation and from directed rational-to-float
conversion of the bounds.

Pipeline: invert the midpoint matrix, precondition, run interval Gaussian
elimination with mignitude pivoting, then tighten with interval
Gauss-Seidel sweeps, first on the preconditioned system and then on the
original one (intersection never widens, and on substitution-shaped rows
the original-system sweep recovers the exact hull).

The module also provides the sampling helpers used to witness enclosures
from the inside: exact instantiations at box vertices and at seeded
rational points.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DivergentEnclosure,
    HasDisjunctions,
    SingularSystem,
    SizeCap,
    StructuralError,
    UnsupportedInterval,
)
from .ir import ConstraintSystem, LinearConstraint, Relation
from .linsolve import solve_exact

INTERVAL_SIZE_LIMIT = 2000
_GS_MAX_SWEEPS = 200


def _dn(x: float) -> float:
    return math.nextafter(x, -math.inf)


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


def float_down(value: Fraction) -> float:
    """Largest double <= value."""
    f = float(value)
    return _dn(f) if Fraction(f) > value else f


def float_up(value: Fraction) -> float:
    """Smallest double >= value."""
    f = float(value)
    return _up(f) if Fraction(f) < value else f


@dataclass(frozen=True)
class Interval:
    """Closed float interval with outward-rounded arithmetic."""

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise ValueError(f"bad interval [{self.lo}, {self.hi}]")

    @staticmethod
    def point(value: float) -> "Interval":
        return Interval(value, value)

    @staticmethod
    def from_fraction(lo: Fraction, hi: Optional[Fraction] = None) -> "Interval":
        hi = lo if hi is None else hi
        return Interval(float_down(Fraction(lo)), float_up(Fraction(hi)))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return (self.lo + self.hi) / 2

    @property
    def mig(self) -> float:
        """Mignitude: smallest absolute value over the interval."""
        if self.lo <= 0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def contains(self, value) -> bool:
        return self.lo <= value <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise DivergentEnclosure(
                f"empty intersection of [{self.lo}, {self.hi}]"
                f" and [{other.lo}, {other.hi}]"
            )
        return Interval(lo, hi)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(_dn(self.lo + other.lo), _up(self.hi + other.hi))

    def __sub__(self, other: "Interval") -> "Interval":
        return Interval(_dn(self.lo - other.hi), _up(self.hi - other.lo))

    def __mul__(self, other: "Interval") -> "Interval":
        cands = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(_dn(min(cands)), _up(max(cands)))

    def __truediv__(self, other: "Interval") -> "Interval":
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError(
                f"division by an interval containing zero [{other.lo}, {other.hi}]"
            )
        cands = (
            self.lo / other.lo,
            self.lo / other.hi,
            self.hi / other.lo,
            self.hi / other.hi,
        )
        return Interval(_dn(min(cands)), _up(max(cands)))

    def __pow__(self, exponent: int) -> "Interval":
        if exponent < 0:
            raise ValueError("negative powers are not supported")
        out = Interval(1.0, 1.0)
        for _ in range(exponent):
            out = out * self
        # even powers are nonnegative even when the base crosses zero
        if exponent > 0 and exponent % 2 == 0 and out.lo < 0:
            out = Interval(0.0, out.hi)
        return out

    def render(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


@dataclass(frozen=True)
class IntervalAssignment:
    """Per-variable solution enclosures for a toleranced system."""

    values: Mapping[str, Interval]

    def __getitem__(self, name: str) -> Interval:
        return self.values[name]

    def __contains__(self, name: str) -> bool:
        return name in self.values

    def items(self):
        return self.values.items()

    def contains_point(self, point: Mapping[str, Fraction]) -> bool:
        return all(self.values[k].contains(v) for k, v in point.items())

    def max_width(self) -> float:
        return max((iv.width for iv in self.values.values()), default=0.0)


# -- vectorized kernels (arrays of lows and highs) ---------------------------


def _vdn(a: np.ndarray) -> np.ndarray:
    return np.nextafter(a, -np.inf)


def _vup(a: np.ndarray) -> np.ndarray:
    return np.nextafter(a, np.inf)


def _vmul(alo, ahi, blo, bhi) -> Tuple[np.ndarray, np.ndarray]:
    p1, p2, p3, p4 = alo * blo, alo * bhi, ahi * blo, ahi * bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return _vdn(lo), _vup(hi)


def _vdiv(alo, ahi, blo, bhi) -> Tuple[np.ndarray, np.ndarray]:
    # callers guarantee the divisor does not straddle zero
    p1, p2, p3, p4 = alo / blo, alo / bhi, ahi / blo, ahi / bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return _vdn(lo), _vup(hi)


def _vmig(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(np.abs(lo), np.abs(hi)))


def _interval_rows(
    system: ConstraintSystem,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Directed-rounded interval matrix and rhs of a square equality system."""
    if system.disjunctions:
        raise HasDisjunctions("pick a mode before interval solving")
    if system.parameters or not all(c.is_numeric for c in system.conjuncts):
        raise UnsupportedInterval("symbolic coefficients have no interval reading")
    n = len(system.variables)
    if len(system.conjuncts) != n:
        from .errors import NotSquare

        raise NotSquare(f"{len(system.conjuncts)} equations over {n} variables")
    if n > INTERVAL_SIZE_LIMIT:
        raise SizeCap(
            f"interval solving is dense; {n} variables exceeds the"
            f" {INTERVAL_SIZE_LIMIT}-variable limit"
        )
    index = system.variable_index()
    Alo = np.zeros((n, n))
    Ahi = np.zeros((n, n))
    blo = np.zeros(n)
    bhi = np.zeros(n)
    for r, c in enumerate(system.conjuncts):
        if c.relation is not Relation.EQ:
            raise StructuralError("interval solving needs equality rows")
        for name, coef in c.terms.items():
            lo, hi = (c.interval_coeffs or {}).get(name, (coef, coef))
            Alo[r, index[name]] = float_down(lo)
            Ahi[r, index[name]] = float_up(hi)
        blo[r] = float_down(c.rhs)
        bhi[r] = float_up(c.rhs)
    return Alo, Ahi, blo, bhi


def _point_times_interval_matrix(
    R: np.ndarray, Alo: np.ndarray, Ahi: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    n = R.shape[0]
    Mlo = np.zeros((n, Alo.shape[1]))
    Mhi = np.zeros_like(Mlo)
    for k in range(n):
        col = R[:, k][:, None]
        plo, phi = _vmul(col, col, Alo[k, :][None, :], Ahi[k, :][None, :])
        Mlo = _vdn(Mlo + plo)
        Mhi = _vup(Mhi + phi)
    return Mlo, Mhi


def _point_times_interval_vector(
    R: np.ndarray, vlo: np.ndarray, vhi: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    n = R.shape[0]
    out_lo = np.zeros(n)
    out_hi = np.zeros(n)
    for k in range(R.shape[1]):
        plo, phi = _vmul(R[:, k], R[:, k], np.full(n, vlo[k]), np.full(n, vhi[k]))
        out_lo = _vdn(out_lo + plo)
        out_hi = _vup(out_hi + phi)
    return out_lo, out_hi


def _ige(
    Mlo: np.ndarray, Mhi: np.ndarray, rlo: np.ndarray, rhi: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Interval Gaussian elimination with mignitude partial pivoting."""
    Ml, Mh = Mlo.copy(), Mhi.copy()
    rl, rh = rlo.copy(), rhi.copy()
    n = Ml.shape[0]
    for k in range(n):
        migs = _vmig(Ml[k:, k], Mh[k:, k])
        best = k + int(np.argmax(migs))
        if migs[best - k] == 0.0:
            raise DivergentEnclosure(
                f"interval pivot straddles zero in column {k};"
                " the coefficient box is too wide for elimination"
            )
        if best != k:
            Ml[[k, best]] = Ml[[best, k]]
            Mh[[k, best]] = Mh[[best, k]]
            rl[[k, best]] = rl[[best, k]]
            rh[[k, best]] = rh[[best, k]]
        if k + 1 == n:
            break
        flo, fhi = _vdiv(
            Ml[k + 1 :, k], Mh[k + 1 :, k], np.full(n - k - 1, Ml[k, k]), np.full(n - k - 1, Mh[k, k])
        )
        plo, phi = _vmul(
            flo[:, None], fhi[:, None], Ml[k, k:][None, :], Mh[k, k:][None, :]
        )
        Ml[k + 1 :, k:] = _vdn(Ml[k + 1 :, k:] - phi)
        Mh[k + 1 :, k:] = _vup(Mh[k + 1 :, k:] - plo)
        qlo, qhi = _vmul(flo, fhi, np.full(n - k - 1, rl[k]), np.full(n - k - 1, rh[k]))
        rl[k + 1 :] = _vdn(rl[k + 1 :] - qhi)
        rh[k + 1 :] = _vup(rh[k + 1 :] - qlo)
        Ml[k + 1 :, k] = 0.0
        Mh[k + 1 :, k] = 0.0
    # back substitution with scalar intervals
    out = [Interval(0.0, 0.0)] * n
    for k in range(n - 1, -1, -1):
        acc = Interval(rl[k], rh[k])
        for j in range(k + 1, n):
            acc = acc - Interval(Ml[k, j], Mh[k, j]) * out[j]
        out[k] = acc / Interval(Ml[k, k], Mh[k, k])
    lo = np.array([iv.lo for iv in out])
    hi = np.array([iv.hi for iv in out])
    return lo, hi


def _gauss_seidel(
    Alo: np.ndarray,
    Ahi: np.ndarray,
    blo: np.ndarray,
    bhi: np.ndarray,
    xlo: np.ndarray,
    xhi: np.ndarray,
    row_of_col: Sequence[int],
) -> Tuple[np.ndarray, np.ndarray]:
    """Sweep x_c := x_c  intersect  (b_r - sum A_rj x_j) / A_rc.

    Rows whose matched diagonal straddles zero are skipped; intersection
    keeps every sweep sound, so the boxes only ever shrink.
    """
    n = Alo.shape[0]
    xlo, xhi = xlo.copy(), xhi.copy()
    for _ in range(_GS_MAX_SWEEPS):
        changed = False
        for c in range(n):
            r = row_of_col[c]
            if r < 0:
                continue
            dlo, dhi = Alo[r, c], Ahi[r, c]
            if dlo <= 0 <= dhi:
                continue
            acc = Interval(blo[r], bhi[r])
            for j in np.nonzero((Alo[r] != 0) | (Ahi[r] != 0))[0]:
                if j == c:
                    continue
                acc = acc - Interval(Alo[r, j], Ahi[r, j]) * Interval(xlo[j], xhi[j])
            cand = acc / Interval(dlo, dhi)
            lo, hi = max(xlo[c], cand.lo), min(xhi[c], cand.hi)
            if lo > hi:
                raise DivergentEnclosure(
                    f"Gauss-Seidel emptied the box of column {c}"
                )
            if lo != xlo[c] or hi != xhi[c]:
                xlo[c], xhi[c] = lo, hi
                changed = True
        if not changed:
            break
    return xlo, xhi


def _transversal(Alo: np.ndarray, Ahi: np.ndarray) -> List[int]:
    """Match each column to a row whose entry there does not straddle zero.

    Rows with a single unmatched candidate column are matched first, which
    peels substitution-shaped systems in causal order; cycles are broken by
    taking the largest-mignitude entry. Columns with no usable row are left
    unmatched (-1) and simply receive no Gauss-Seidel update.
    """
    n = Alo.shape[0]
    mig = _vmig(Alo, Ahi)
    candidates = [set(np.nonzero(mig[r] > 0)[0].tolist()) for r in range(n)]
    row_of_col = [-1] * n
    open_rows = set(range(n))
    while open_rows:
        forced = sorted(r for r in open_rows if len(candidates[r]) == 1)
        if forced:
            r = forced[0]
            c = next(iter(candidates[r]))
        else:
            best = None
            for r in sorted(open_rows):
                for c in sorted(candidates[r]):
                    key = (mig[r, c], -r, -c)
                    if best is None or key > best[0]:
                        best = (key, r, c)
            if best is None:
                break
            _, r, c = best
        open_rows.discard(r)
        if not candidates[r]:
            continue
        row_of_col[c] = r
        for other in open_rows:
            candidates[other].discard(c)
    return row_of_col


def solve_interval(system: ConstraintSystem) -> IntervalAssignment:
    """Enclose the united solution set of a square toleranced system."""
    Alo, Ahi, blo, bhi = _interval_rows(system)
    n = Alo.shape[0]
    Ac = (Alo + Ahi) / 2.0
    bc = (blo + bhi) / 2.0
    try:
        R = np.linalg.inv(Ac)
    except np.linalg.LinAlgError:
        raise SingularSystem("midpoint matrix is singular")
    xc = R @ bc
    if not np.all(np.isfinite(xc)):
        raise SingularSystem("midpoint solve produced non-finite values")
    # residual rhs r = R*(b - A*xc), then M*d = r with M = R*[A]
    axlo = np.zeros(n)
    axhi = np.zeros(n)
    for k in range(n):
        plo, phi = _vmul(Alo[:, k], Ahi[:, k], np.full(n, xc[k]), np.full(n, xc[k]))
        axlo = _vdn(axlo + plo)
        axhi = _vup(axhi + phi)
    reslo = _vdn(blo - axhi)
    reshi = _vup(bhi - axlo)
    rlo, rhi = _point_times_interval_vector(R, reslo, reshi)
    Mlo, Mhi = _point_times_interval_matrix(R, Alo, Ahi)
    dlo, dhi = _ige(Mlo, Mhi, rlo, rhi)
    dlo, dhi = _gauss_seidel(Mlo, Mhi, rlo, rhi, dlo, dhi, list(range(n)))
    xlo = _vdn(xc + dlo)
    xhi = _vup(xc + dhi)
    row_of_col = _transversal(Alo, Ahi)
    xlo, xhi = _gauss_seidel(Alo, Ahi, blo, bhi, xlo, xhi, row_of_col)
    return IntervalAssignment(
        {
            name: Interval(float(xlo[k]), float(xhi[k]))
            for k, name in enumerate(system.variables)
        }
    )


# -- instantiation helpers ---------------------------------------------------


def interval_positions(system: ConstraintSystem) -> List[Tuple[int, str]]:
    """(row, variable) pairs that carry interval coefficients, in row order."""
    out = []
    for r, c in enumerate(system.conjuncts):
        for name in sorted((c.interval_coeffs or {}).keys()):
            out.append((r, name))
    return out


def _with_coefficients(
    system: ConstraintSystem, choice: Mapping[Tuple[int, str], Fraction]
) -> ConstraintSystem:
    rows = []
    r = 0
    for row in system.rows:
        if not isinstance(row, LinearConstraint):
            rows.append(row)
            continue
        if row.interval_coeffs:
            terms = dict(row.terms)
            for name in row.interval_coeffs:
                terms[name] = choice[(r, name)]
            rows.append(LinearConstraint(terms, row.relation, row.rhs))
        else:
            rows.append(row)
        r += 1
    return ConstraintSystem(
        system.variables, system.parameters, tuple(rows), system.objective, system.binaries
    )


def vertex_instantiations(
    system: ConstraintSystem, limit: int = 20
) -> Iterator[ConstraintSystem]:
    """Exact systems at every corner of the coefficient box (2^k of them)."""
    spots = interval_positions(system)
    if len(spots) > limit:
        raise SizeCap(
            f"{len(spots)} interval coefficients means {2 ** len(spots)} vertices"
        )
    conjuncts = system.conjuncts
    bounds = [(conjuncts[r].interval_coeffs or {})[name] for r, name in spots]
    for corner in product(*(range(2) for _ in spots)):
        choice = {
            spot: bounds[k][corner[k]] for k, spot in enumerate(spots)
        }
        yield _with_coefficients(system, choice)


def sample_instantiation(
    system: ConstraintSystem, rng: random.Random, grid: int = 10**6
) -> ConstraintSystem:
    """Exact system with coefficients drawn uniformly from a rational grid."""
    spots = interval_positions(system)
    conjuncts = system.conjuncts
    choice = {}
    for r, name in spots:
        lo, hi = (conjuncts[r].interval_coeffs or {})[name]
        choice[(r, name)] = lo + (hi - lo) * Fraction(rng.randrange(grid + 1), grid)
    return _with_coefficients(system, choice)


def range_oracle(
    system: ConstraintSystem, seed: int = 0, samples: int = 40
) -> Dict[str, Tuple[Fraction, Fraction]]:
    """Inner bounds on each variable's true range, from exact solves.

    Every corner of the coefficient box plus seeded interior samples is
    solved exactly; the hull of those solutions lies inside the united
    solution set's hull, so any sound enclosure must contain it.
    """
    rng = random.Random(seed)
    points = list(vertex_instantiations(system))
    points.extend(sample_instantiation(system, rng) for _ in range(samples))
    lo: Dict[str, Fraction] = {}
    hi: Dict[str, Fraction] = {}
    for inst in points:
        x = solve_exact(inst)
        for name, value in x.items():
            if name not in lo or value < lo[name]:
                lo[name] = value
            if name not in hi or value > hi[name]:
                hi[name] = value
    return {name: (lo[name], hi[name]) for name in lo}
