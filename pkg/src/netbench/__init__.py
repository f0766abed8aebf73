"""Benchmark generator and constraint solvers for chained network families.

The package builds three families of electrical-network constraint
systems (a one-resistor baby example, a resistor-bridge chain, and a
diode-bridge chain), then solves them with exact rational, float,
interval, disjunctive, optimizing, and symbolic backends. The harness
module sweeps instance sizes and reports values, errors, and timings;
the cli module exposes everything as the `netbench` command.
"""

from .errors import (
    DenominatorStraddlesZero,
    DenominatorZero,
    ExplosionGuard,
    HasDisjunctions,
    Infeasible,
    NetbenchError,
    NonMonotoneInterval,
    NotSquare,
    SingularSymbolic,
    SingularSystem,
    SizeCap,
    StructuralError,
    Unbounded,
    Unsatisfiable,
    UnsupportedInterval,
    UnsupportedStrict,
)
from .harness import BenchRow, Report, SuiteConfig, render_report, run_suite, write_figures
from .interval import Interval, solve_interval
from .ir import (
    ConstraintSystem,
    Disjunction,
    LinearConstraint,
    ModeAssignment,
    Objective,
    Relation,
    encode_indicators,
    equality_part,
    export_lp,
    instantiate,
    load_instance,
    lower,
    presolve,
    relax_intervals,
    save_instance,
    with_measurements,
)
from .linsolve import solve_exact, solve_f64
from .modes import (
    SearchResult,
    SearchStats,
    SearchStrategy,
    check_branch,
    enumerate_feasible,
    search_first,
)
from .netgen import Family, FamilySpec, Orientation, ResistorSpec, build, stats
from .opt import (
    DiagnosisModel,
    DiagnosisResult,
    OptResult,
    build_diagnosis,
    diagnose,
    enumerate_diagnoses,
    optimize,
    optimize_disjunctive,
    optimize_interval,
    simplex,
    system_feasible,
)
from .polys import MultivarPoly, RationalFunction
from .symbolic import (
    rf_equivalent,
    rf_eval,
    rf_interval_eval,
    solve_branch_symbolic,
    solve_symbolic,
)

__version__ = "0.1.0"

__all__ = [
    "BenchRow",
    "ConstraintSystem",
    "DenominatorStraddlesZero",
    "DenominatorZero",
    "DiagnosisModel",
    "DiagnosisResult",
    "Disjunction",
    "ExplosionGuard",
    "Family",
    "FamilySpec",
    "HasDisjunctions",
    "Infeasible",
    "Interval",
    "LinearConstraint",
    "ModeAssignment",
    "MultivarPoly",
    "NetbenchError",
    "NonMonotoneInterval",
    "NotSquare",
    "Objective",
    "OptResult",
    "Orientation",
    "RationalFunction",
    "Relation",
    "Report",
    "ResistorSpec",
    "SearchResult",
    "SearchStats",
    "SearchStrategy",
    "SingularSymbolic",
    "SingularSystem",
    "SizeCap",
    "StructuralError",
    "SuiteConfig",
    "Unbounded",
    "Unsatisfiable",
    "UnsupportedInterval",
    "UnsupportedStrict",
    "build",
    "build_diagnosis",
    "check_branch",
    "diagnose",
    "encode_indicators",
    "enumerate_diagnoses",
    "enumerate_feasible",
    "equality_part",
    "export_lp",
    "instantiate",
    "load_instance",
    "lower",
    "optimize",
    "optimize_disjunctive",
    "optimize_interval",
    "presolve",
    "relax_intervals",
    "render_report",
    "rf_equivalent",
    "rf_eval",
    "rf_interval_eval",
    "run_suite",
    "save_instance",
    "search_first",
    "simplex",
    "solve_branch_symbolic",
    "solve_exact",
    "solve_f64",
    "solve_interval",
    "solve_symbolic",
    "stats",
    "system_feasible",
    "with_measurements",
    "__version__",
]
