"""Batch benchmark runs over the network families.

run_suite builds each instance of a size sweep, solves it with the
configured backends, and reports values, absolute errors against the
closed form, and median wall times. One row is emitted per (n, backend)
pair, plus one enclosure row per nonzero tolerance; a row that fails
(size caps, unsupported combinations) carries the failure text instead of
aborting the sweep.

Error discipline: the abs_err column always compares against the family's
closed form evaluated exactly, never against another backend's output.
Timing discipline: monotonic clock, one warm-up solve that also produces
the reported value, then `repetitions` timed runs with the median kept.

render_report turns a Report into an aligned text table, CSV, or JSON;
write_figures draws timing and error scaling plots next to whatever
delimited output the caller keeps.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from . import ir, linsolve, modes, netgen
from .errors import NetbenchError
from .interval import solve_interval
from .netgen import Family, FamilySpec, Orientation, ResistorSpec, default_resistors

DEFAULT_SWEEP: Tuple[int, ...] = (1, 2, 3, 4, 5, 10, 20, 40, 80, 100, 200, 500)
DEFAULT_TOLERANCES: Tuple[Fraction, ...] = (
    Fraction(0),
    Fraction(1, 10),
    Fraction(1, 5),
)
BACKENDS = ("exact", "f64")

OBSERVED = "i_GND"


@dataclass(frozen=True)
class SuiteConfig:
    family: Family = Family.FE
    n_list: Tuple[int, ...] = DEFAULT_SWEEP
    backends: Tuple[str, ...] = BACKENDS
    tolerances: Tuple[Fraction, ...] = DEFAULT_TOLERANCES
    repetitions: int = 5
    seed: int = 0
    orientation: Orientation = Orientation.FIGURE

    def __post_init__(self):
        if not self.n_list:
            raise ValueError("n_list must not be empty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        for b in self.backends:
            if b not in BACKENDS:
                raise ValueError(f"unknown backend {b!r}; choices are {BACKENDS}")


@dataclass(frozen=True)
class BenchRow:
    """One (n, backend) measurement; tolerance rows use backend 'interval'."""

    n: int
    backend: str
    num_vars: int = 0
    num_constraints: int = 0
    exact: Optional[Fraction] = None
    value: Optional[Union[Fraction, float]] = None
    abs_err: Optional[float] = None
    time_s: Optional[float] = None
    branches: Optional[int] = None
    tolerance: Optional[Fraction] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    note: str = ""


@dataclass(frozen=True)
class Report:
    config: SuiteConfig
    rows: Tuple[BenchRow, ...]
    environment: Dict[str, str] = field(default_factory=dict)
    notes: Tuple[str, ...] = ()


def closed_form(spec: FamilySpec) -> Optional[Fraction]:
    """Exact ground current for a default-resistor instance, if known."""
    if spec.symbolic_resistors or spec.symbolic_source:
        return None
    if spec.resistors != default_resistors(spec.family):
        return None
    u = spec.source_voltage
    if spec.family is Family.BE:
        return u / Fraction(100)
    if spec.family is Family.FE:
        return u * Fraction(71, 17000) / spec.n
    if spec.orientation is Orientation.FIGURE:
        return u / (Fraction(100) * spec.n)
    return None  # literal diode hookup has no single closed form


def environment_info() -> Dict[str, str]:
    return {
        "python": sys.version.split()[0],
        "implementation": platform.python_implementation(),
        "platform": platform.platform(),
        "machine": platform.machine(),
        "processor": platform.processor() or "unknown",
    }


def _spec_for(config: SuiteConfig, n: int, tolerance: Fraction) -> FamilySpec:
    resistors = None
    if tolerance:
        resistors = {
            pos: ResistorSpec(r.nominal, tolerance)
            for pos, r in default_resistors(config.family).items()
        }
    if config.family is Family.BE:
        one = resistors[1] if resistors else None
        return FamilySpec.be(one)
    if config.family is Family.FE:
        return FamilySpec.fe(n, resistors)
    return FamilySpec.se(n, config.orientation, resistors)


def _timed(fn: Callable[[], object], repetitions: int) -> Tuple[object, float]:
    """Warm-up call produces the value; the median of timed runs follows."""
    result = fn()
    times = []
    for _ in range(repetitions):
        t0 = time.monotonic()
        fn()
        times.append(time.monotonic() - t0)
    times.sort()
    return result, times[len(times) // 2]


def _solve_backend(
    system: ir.ConstraintSystem, backend: str, mode_hint: Optional[ir.ModeAssignment]
):
    """Returns (value of OBSERVED, branches or None)."""
    if system.disjunctions:
        if backend == "exact":
            hit = modes.search_first(system)
            return hit.assignment[OBSERVED], hit.stats.branches_explored
        inst = ir.equality_part(ir.instantiate(system, mode_hint))
        return linsolve.solve_f64(inst)[OBSERVED], None
    if backend == "exact":
        return linsolve.solve_exact(system)[OBSERVED], None
    return linsolve.solve_f64(system)[OBSERVED], None


def run_suite(config: SuiteConfig) -> Report:
    rows: List[BenchRow] = []
    notes: List[str] = []
    max_branch_ratio = 0.0
    for n in config.n_list:
        spec = _spec_for(config, n, Fraction(0))
        try:
            system = ir.lower(netgen.build(spec))
        except NetbenchError as e:
            rows.append(BenchRow(n, "build", note=str(e)))
            continue
        shape = (len(system.variables), system.num_constraints)
        exact_value = closed_form(spec)
        mode_hint: Optional[ir.ModeAssignment] = None
        if system.disjunctions and "f64" in config.backends:
            mode_hint = modes.search_first(system).mode
        for backend in config.backends:
            try:
                (value, branches), median = _timed(
                    lambda: _solve_backend(system, backend, mode_hint),
                    config.repetitions,
                )
            except NetbenchError as e:
                rows.append(BenchRow(n, backend, *shape, exact_value, note=str(e)))
                continue
            err = None
            if exact_value is not None:
                err = abs(float(Fraction(value) - exact_value))
            note = ""
            if branches is not None:
                max_branch_ratio = max(max_branch_ratio, branches / (8 * n))
            if system.disjunctions and backend == "f64":
                note = "mode found by exact search; final system timed in floats"
            rows.append(
                BenchRow(
                    n, backend, *shape, exact_value, value, err, median, branches,
                    note=note,
                )
            )
        for tol in config.tolerances:
            if not tol:
                continue
            tspec = _spec_for(config, n, tol)
            try:
                tsystem = ir.lower(netgen.build(tspec))
                enclosure, median = _timed(
                    lambda: solve_interval(tsystem), config.repetitions
                )
                box = enclosure[OBSERVED]
                rows.append(
                    BenchRow(
                        n, "interval", len(tsystem.variables),
                        tsystem.num_constraints, exact_value,
                        time_s=median, tolerance=tol, lo=box.lo, hi=box.hi,
                    )
                )
            except NetbenchError as e:
                rows.append(
                    BenchRow(n, "interval", *shape, tolerance=tol, note=str(e))
                )
    if config.family is Family.SE:
        if config.orientation is Orientation.FIGURE:
            notes.append(
                "diode chain drawn orientation: one feasible mode per box,"
                " i_GND = 12/(100n); the literal hookup of D1 instead gives"
                " 0.36 at n=1"
            )
        if max_branch_ratio:
            notes.append(
                f"mode search visited at most {max_branch_ratio:.2f} * 8n"
                " branches across the sweep"
            )
    return Report(config, tuple(rows), environment_info(), tuple(notes))


# -- rendering ----------------------------------------------------------------

TABLE_HEADER = "n | exact | solved | abs_err | time"


def fmt8(x) -> str:
    """Fixed 8-decimal rendering with the negative-zero artifact removed."""
    s = f"{float(x):.8f}"
    return "0.00000000" if s == "-0.00000000" else s


def _cell(value, formatter) -> str:
    return "-" if value is None else formatter(value)


def _table(report: Report) -> str:
    out = io.StringIO()
    if not report.rows:
        print(TABLE_HEADER, file=out)
        return out.getvalue()
    for key, text in report.environment.items():
        print(f"# {key}: {text}", file=out)
    for note in report.notes:
        print(f"# note: {note}", file=out)
    sizes = {}
    for row in report.rows:
        if row.num_vars:
            sizes.setdefault(row.n, (row.num_vars, row.num_constraints))
    print("# sizes: n -> variables = constraints", file=out)
    for n, (nv, nc) in sorted(sizes.items()):
        print(f"#   {n}: {nv} = {nc}", file=out)
    backends = []
    for row in report.rows:
        if row.backend not in backends:
            backends.append(row.backend)
    for backend in backends:
        got = [r for r in report.rows if r.backend == backend]
        print(f"\nbackend: {backend}", file=out)
        if backend == "interval":
            print("n | tol | lo | hi | width | time", file=out)
            for r in got:
                tol = f"{float(r.tolerance or 0):.0%}"
                if r.lo is None:
                    print(f"{r.n} | {tol} | - | - | - | -  {r.note}", file=out)
                else:
                    width = r.hi - r.lo
                    print(
                        f"{r.n} | {tol} | {fmt8(r.lo)} | {fmt8(r.hi)}"
                        f" | {width:.2e} | {_cell(r.time_s, lambda t: f'{t:.3f}')}",
                        file=out,
                    )
            continue
        print(TABLE_HEADER, file=out)
        for r in got:
            line = " | ".join(
                [
                    str(r.n),
                    _cell(r.exact, fmt8),
                    _cell(r.value, fmt8),
                    _cell(r.abs_err, lambda e: f"{e:.1e}"),
                    _cell(r.time_s, lambda t: f"{t:.3f}"),
                ]
            )
            if r.note:
                line += f"  # {r.note}"
            print(line, file=out)
    return out.getvalue()


CSV_COLUMNS = (
    "n", "backend", "num_vars", "num_constraints", "exact_frac", "exact",
    "solved", "abs_err", "time_s", "branches", "tolerance", "lo", "hi", "note",
)


def _csv(report: Report) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in report.rows:
        writer.writerow(
            [
                r.n,
                r.backend,
                r.num_vars,
                r.num_constraints,
                "" if r.exact is None else str(r.exact),
                "" if r.exact is None else repr(float(r.exact)),
                "" if r.value is None else repr(float(r.value)),
                "" if r.abs_err is None else repr(r.abs_err),
                "" if r.time_s is None else repr(r.time_s),
                "" if r.branches is None else r.branches,
                "" if r.tolerance is None else str(r.tolerance),
                "" if r.lo is None else repr(r.lo),
                "" if r.hi is None else repr(r.hi),
                r.note,
            ]
        )
    return out.getvalue()


def _json(report: Report) -> str:
    payload = {
        "family": report.config.family.value,
        "orientation": report.config.orientation.value,
        "environment": report.environment,
        "notes": list(report.notes),
        "rows": [
            {
                "n": r.n,
                "backend": r.backend,
                "num_vars": r.num_vars,
                "num_constraints": r.num_constraints,
                "exact": None if r.exact is None else str(r.exact),
                "exact_float": None if r.exact is None else float(r.exact),
                "solved": None if r.value is None else float(r.value),
                "abs_err": r.abs_err,
                "time_s": r.time_s,
                "branches": r.branches,
                "tolerance": None if r.tolerance is None else str(r.tolerance),
                "lo": r.lo,
                "hi": r.hi,
                "note": r.note,
            }
            for r in report.rows
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


def render_report(report: Report, format: str = "table") -> str:
    if format == "table":
        return _table(report)
    if format == "csv":
        return _csv(report)
    if format == "json":
        return _json(report)
    raise ValueError(f"unknown report format {format!r}; use table, csv, or json")


def write_figures(report: Report, out_dir: str) -> List[str]:
    """Draw timing and error scaling plots as PNG files in out_dir."""
    import os

    from matplotlib.figure import Figure

    os.makedirs(out_dir, exist_ok=True)
    written: List[str] = []

    def series(backend: str, attr: str):
        pts = [
            (r.n, getattr(r, attr))
            for r in report.rows
            if r.backend == backend and getattr(r, attr) is not None
        ]
        return [p[0] for p in pts], [p[1] for p in pts]

    backends = []
    for row in report.rows:
        if row.backend not in backends and row.backend != "build":
            backends.append(row.backend)

    fig = Figure(figsize=(6.4, 4.4))
    ax = fig.add_subplot(111)
    for backend in backends:
        ns, ts = series(backend, "time_s")
        if ns:
            ax.plot(ns, ts, marker="o", label=backend)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n (boxes)")
    ax.set_ylabel("median solve time [s]")
    ax.set_title(f"{report.config.family.value} family: time scaling")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    path = os.path.join(out_dir, "timing.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    written.append(path)

    fig = Figure(figsize=(6.4, 4.4))
    ax = fig.add_subplot(111)
    drew = False
    for backend in backends:
        if backend == "interval":
            rows = [
                r for r in report.rows
                if r.backend == "interval" and r.lo is not None
            ]
            if rows:
                ax.plot(
                    [r.n for r in rows],
                    [r.hi - r.lo for r in rows],
                    marker="s",
                    label="enclosure width",
                )
                drew = True
            continue
        ns, errs = series(backend, "abs_err")
        pts = [(x, e) for x, e in zip(ns, errs) if e > 0]
        if pts:
            ax.plot(
                [p[0] for p in pts],
                [p[1] for p in pts],
                marker="o",
                label=f"{backend} abs err",
            )
            drew = True
    ax.set_xscale("log")
    if drew:
        ax.set_yscale("log")
    ax.set_xlabel("n (boxes)")
    ax.set_ylabel("absolute error vs closed form")
    ax.set_title(f"{report.config.family.value} family: error scaling")
    ax.grid(True, which="both", alpha=0.3)
    if drew:
        ax.legend()
    path = os.path.join(out_dir, "error.png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    written.append(path)
    return written
