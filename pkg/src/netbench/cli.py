"""netbench command line.

Subcommands mirror the library: generate builds and saves instances,
solve/interval/modes/optimize/diagnose/symbolic run the corresponding
solvers on a freshly built family instance (or a file loaded with
--instance), and bench runs the scaling suite, writing scaling figures
next to the delimited report.

Numbers print with 8 decimals; --backend exact appends the exact
rational. Exit codes: 0 success, 1 infeasible or unsatisfiable, 2 usage
errors and requests the engine refuses by design (strict optimization,
size caps), 3 unexpected internal failures.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import harness, ir, linsolve, modes, netgen, opt, symbolic
from .errors import Infeasible, NetbenchError, Unsatisfiable
from .harness import fmt8
from .interval import Interval, solve_interval
from .netgen import Family, FamilySpec, Orientation, ResistorSpec

USAGE_EXIT = 2
INTERNAL_EXIT = 3


class CliError(Exception):
    """A bad flag combination or value; reported as a usage error."""


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise CliError(f"expected a number (decimals and p/q allowed), got {text!r}")


def _parse_measure(pairs: Sequence[str]) -> Dict[str, Fraction]:
    out: Dict[str, Fraction] = {}
    for pair in pairs:
        name, eq, value = pair.partition("=")
        if not eq or not name:
            raise CliError(f"--measure wants var=value, got {pair!r}")
        out[name] = _frac(value)
    return out


def _parse_pins(pairs: Sequence[str]) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for pair in pairs:
        name, eq, tag = pair.partition("=")
        if not eq or not name or not tag:
            raise CliError(f"--pin wants LABEL=Tag, got {pair!r}")
        out[name] = tag
    return out


def _spec(
    args: argparse.Namespace,
    symbolic_parts: bool = False,
    zero_tolerance: bool = False,
) -> FamilySpec:
    family = Family(args.family)
    tolerance = Fraction(0) if zero_tolerance else _frac(args.tolerance)
    resistors = None
    if tolerance or getattr(args, "alternates", None):
        resistors = {}
        for pos, r in netgen.default_resistors(family).items():
            resistors[pos] = ResistorSpec(r.nominal, tolerance)
        if getattr(args, "alternates", None):
            if family is not Family.BE:
                raise CliError("--alternates only applies to --family be")
            alts = tuple(_frac(v) for v in args.alternates.split(","))
            resistors[1] = ResistorSpec(resistors[1].nominal, tolerance, alts)
    voltage = _frac(args.source_voltage)
    symbolic_r = symbolic_parts or getattr(args, "bilinear", False)
    symbolic_u = symbolic_parts
    if family is Family.BE:
        one = resistors[1] if resistors else None
        return FamilySpec.be(one, voltage, symbolic_r, symbolic_u)
    if family is Family.FE:
        if args.n < 1:
            raise CliError("--n must be at least 1")
        return FamilySpec.fe(args.n, resistors, voltage, symbolic_r, symbolic_u)
    return FamilySpec.se(
        args.n,
        Orientation(args.orientation),
        resistors,
        voltage,
        symbolic_r,
        symbolic_u,
    )


def _load_or_build(args: argparse.Namespace) -> ir.ConstraintSystem:
    if getattr(args, "instance", None):
        return ir.load_instance(args.instance)
    spec = _spec(args)
    system = ir.lower(netgen.build(spec))
    if getattr(args, "bilinear", False):
        values = {
            spec.symbol_for(pos): r.nominal for pos, r in spec.resistors.items()
        }
        system = ir.add_parameter_definitions(system, values)
    return system


def _numeric(system: ir.ConstraintSystem) -> ir.ConstraintSystem:
    """Presolve away defined parameters; symbolic leftovers are a usage error."""
    if system.is_numeric:
        return system
    try:
        return ir.presolve(system)
    except NetbenchError as e:
        raise CliError(f"{e}; use the symbolic subcommand for closed forms")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _value_line(name: str, value, exact: bool) -> str:
    if exact:
        return f"{name} = {fmt8(value)} ({Fraction(value)})"
    return f"{name} = {fmt8(value)}"


def _render_assignment(system, assignment, exact: bool) -> str:
    lines = [
        _value_line(name, assignment[name], exact) for name in system.variables
    ]
    return "\n".join(lines) + "\n"


# -- subcommands ---------------------------------------------------------------


def cmd_generate(args) -> int:
    system = _load_or_build(args)
    netlist = None
    if not getattr(args, "instance", None):
        netlist = netgen.build(_spec(args))
        stats = netgen.stats(netlist)
        print(
            f"ports={stats.num_ports} variables={stats.num_variables}"
            f" constraints={stats.num_constraints}"
            f" disjunctions={stats.num_disjunctions}",
            file=sys.stderr,
        )
    if args.lp:
        _emit(ir.export_lp(system), args.out)
        return 0
    if args.out:
        ir.save_instance(system, args.out)
        return 0
    sys.stdout.write(ir.dumps_instance(system))
    return 0


def cmd_solve(args) -> int:
    system = _numeric(_load_or_build(args))
    if system.disjunctions:
        raise CliError(
            "system has disjunctions; use the modes subcommand to search them"
        )
    if args.backend == "exact":
        assignment = linsolve.solve_exact(system)
    else:
        assignment = linsolve.solve_f64(system)
    _emit(_render_assignment(system, assignment, args.backend == "exact"), args.out)
    return 0


def _box_lines(system, boxes) -> List[str]:
    return [
        f"{name} = [{fmt8(boxes[name].lo)}, {fmt8(boxes[name].hi)}]"
        for name in system.variables
    ]


def cmd_interval(args) -> int:
    system = _numeric(_load_or_build(args))
    if not system.disjunctions:
        _emit("\n".join(_box_lines(system, solve_interval(system))) + "\n", args.out)
        return 0
    # per-branch enclosures: modes come from searching the zero-tolerance
    # twin, so each printed box encloses that branch's equality system
    if getattr(args, "instance", None):
        raise CliError(
            "interval over a disjunctive instance file; rebuild from family"
            " flags so the nominal mode search can run"
        )
    nominal = argparse.Namespace(**vars(args))
    nominal.tolerance = "0"
    twin = _numeric(_load_or_build(nominal))
    if Family(args.family) is Family.BE:
        hits = modes.enumerate_feasible(twin)
    else:
        hits = [modes.search_first(twin)]
    lines: List[str] = []
    for hit in hits:
        fixed = ir.equality_part(ir.instantiate(system, hit.mode))
        lines.append("mode: " + hit.mode.render(twin))
        lines.extend(_box_lines(fixed, solve_interval(fixed)))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_modes(args) -> int:
    system = _numeric(_load_or_build(args))
    strategy = modes.SearchStrategy()
    if args.pin:
        strategy = strategy.pinned(**_parse_pins(args.pin))
    exact = args.backend == "exact"
    out: List[str] = []
    if args.all:
        found = modes.enumerate_feasible(system, strategy)
        out.append(f"feasible modes: {len(found)}")
        for hit in found:
            out.append("mode: " + hit.mode.render(system))
            out.append("  " + _value_line("i_GND", hit.assignment["i_GND"], exact))
        stats = found[-1].stats if found else None
    else:
        hit = modes.search_first(system, strategy)
        out.append("mode: " + hit.mode.render(system))
        out.append(_value_line("i_GND", hit.assignment["i_GND"], exact))
        if args.full:
            out.append(_render_assignment(system, hit.assignment, exact).rstrip())
        stats = hit.stats
    if stats is not None:
        out.append(
            f"branches explored: {stats.branches_explored}"
            f" (leaves checked: {stats.leaves_checked}, prunes: {stats.prunes})"
        )
    _emit("\n".join(out) + "\n", args.out)
    return 0


def cmd_optimize(args) -> int:
    system = _numeric(_load_or_build(args))
    objective = ir.Objective(args.sense, {args.objective: Fraction(1)})
    if args.relax or args.strict:
        system = ir.relax_intervals(system, strict=args.strict)
    if args.encode_indicators:
        system = ir.encode_indicators(system)
    if system.has_intervals and not system.disjunctions:
        result = opt.optimize_interval(system, objective, seed=args.seed)
    elif system.disjunctions:
        result = opt.optimize_disjunctive(system, objective)
    else:
        result = opt.optimize(system, objective)
    exact = args.backend == "exact"
    out = [_value_line(f"{args.sense} {args.objective}", result.value, exact)]
    if result.mode is not None:
        out.append("mode: " + result.mode.render(system))
    out.append(f"nodes explored: {result.nodes_explored}")
    _emit("\n".join(out) + "\n", args.out)
    return 0


def cmd_diagnose(args) -> int:
    system = _numeric(_load_or_build(args))
    model = opt.build_diagnosis(system)
    measurements = _parse_measure(args.measure)
    exact = args.backend == "exact"
    out: List[str] = []
    if args.all:
        results = opt.enumerate_diagnoses(model, measurements)
        out.append(f"feasible diagnoses: {len(results)}")
        shown = results if args.limit is None else results[: args.limit]
        for res in shown:
            faults = "{" + ", ".join(res.faults) + "}"
            out.append(
                f"{_value_line('probability', res.probability, exact)}"
                f"  faults: {faults}"
            )
    else:
        res = opt.diagnose(model, measurements)
        out.append(_value_line("probability", res.probability, exact))
        out.append("faults: {" + ", ".join(res.faults) + "}")
        out.append("mode: " + res.mode.render(model.system))
    _emit("\n".join(out) + "\n", args.out)
    return 0


def _symbolic_box(spec: FamilySpec) -> Dict[str, Interval]:
    """Parameter box over the spec's tolerance bands.

    Branch formulas already carry any alternate scaling, so the bands sit
    around the nominals for every mode.
    """
    volt = float(spec.source_voltage)
    box = {"u_SRC": Interval(volt, volt)}
    for pos, r in spec.resistors.items():
        lo, hi = r.interval()
        box[spec.symbol_for(pos)] = Interval(float(lo), float(hi))
    return box


def cmd_symbolic(args) -> int:
    spec = _spec(args, symbolic_parts=True)
    system = ir.lower(netgen.build(spec))
    sections: List[Tuple[str, symbolic.SymbolicSolution]] = []
    if system.disjunctions:
        nominal = argparse.Namespace(**vars(args))
        nominal.tolerance = "0"
        numeric = _numeric(_load_or_build(nominal))
        if Family(args.family) is Family.BE:
            hits = modes.enumerate_feasible(numeric)
        else:
            hits = [modes.search_first(numeric)]
        for hit in hits:
            sections.append(
                (
                    "mode: " + hit.mode.render(numeric),
                    symbolic.solve_branch_symbolic(system, hit.mode),
                )
            )
    else:
        sections.append(("", symbolic.solve_symbolic(system)))
    names = list(system.variables) if args.all else ["i_GND"]
    tolerance = _frac(args.tolerance)
    out: List[str] = []
    for header, solution in sections:
        if header:
            out.append(header)
        for name in names:
            rf = solution[name]
            out.append(f"{name} = ({rf.num.render()}) / ({rf.den.render()})")
        if args.at:
            point = _parse_measure(args.at)
            for name in names:
                value = symbolic.rf_eval(solution[name], point)
                out.append(_value_line(f"{name} @ point", value, True))
        if tolerance:
            box = _symbolic_box(spec)
            for name in names:
                hull = symbolic.rf_interval_eval(solution[name], box)
                out.append(f"{name} in [{fmt8(hull.lo)}, {fmt8(hull.hi)}]")
    _emit("\n".join(out) + "\n", args.out)
    return 0


def cmd_bench(args) -> int:
    sizes = tuple(int(s) for s in args.sizes.split(",")) if args.sizes else \
        harness.DEFAULT_SWEEP
    tolerances: Tuple[Fraction, ...] = (Fraction(0),)
    if args.tolerance and _frac(args.tolerance):
        tolerances += (_frac(args.tolerance),)
    config = harness.SuiteConfig(
        family=Family(args.family),
        n_list=sizes,
        tolerances=tolerances,
        repetitions=args.repetitions,
        seed=args.seed,
        orientation=Orientation(args.orientation),
    )
    report = harness.run_suite(config)
    _emit(harness.render_report(report, args.format), args.out)
    fig_dir = args.figures or (os.path.dirname(args.out) if args.out else ".")
    for path in harness.write_figures(report, fig_dir or "."):
        print(f"wrote {path}", file=sys.stderr)
    return 0


# -- parser --------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netbench",
        description="electrical-network constraint benchmarks and solvers",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", choices=[f.value for f in Family], default="be")
    common.add_argument("--n", type=int, default=1, help="number of chained boxes")
    common.add_argument(
        "--tolerance", default="0", help="resistor tolerance, e.g. 0.1 or 1/10"
    )
    common.add_argument(
        "--orientation",
        choices=[o.value for o in Orientation],
        default="figure",
        help="diode hookup of the se family",
    )
    common.add_argument("--source-voltage", default="12")
    common.add_argument("--instance", help="load this instance file instead")
    common.add_argument("--out", help="write output to this file")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument(
        "--threads",
        type=int,
        default=1,
        help="reserved; all solvers run single-threaded",
    )
    common.add_argument(
        "--backend",
        choices=["f64", "exact"],
        default="exact",
        help="numeric backend; exact also prints rationals",
    )
    common.add_argument(
        "--bilinear",
        action="store_true",
        help="emit R*i laws with defining rows R = value (presolve target)",
    )
    common.add_argument(
        "--alternates",
        help="comma-separated alternate values for the be resistor",
    )

    p = sub.add_parser("generate", parents=[common], help="build and save an instance")
    p.add_argument("--lp", action="store_true", help="write LP format instead")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("solve", parents=[common], help="solve a square system")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser(
        "interval", parents=[common], help="enclose all solutions over tolerances"
    )
    p.set_defaults(handler=cmd_interval)

    p = sub.add_parser("modes", parents=[common], help="search disjunction branches")
    p.add_argument("--all", action="store_true", help="enumerate every feasible mode")
    p.add_argument("--full", action="store_true", help="print the whole assignment")
    p.add_argument(
        "--pin", action="append", default=[], metavar="LABEL=TAG",
        help="force a disjunction branch, e.g. D1=Blocking",
    )
    p.set_defaults(handler=cmd_modes)

    p = sub.add_parser("optimize", parents=[common], help="optimize a variable")
    p.add_argument("--objective", default="i_GND", help="variable to optimize")
    p.add_argument("--sense", choices=["min", "max"], default="min")
    p.add_argument(
        "--relax",
        action="store_true",
        help="relax interval coefficients to two-sided bounds first",
    )
    p.add_argument(
        "--strict",
        action="store_true",
        help="open-interval relaxation; optimization over it is refused",
    )
    p.add_argument(
        "--encode-indicators",
        action="store_true",
        help="big-M binary encoding of disjunctions before optimizing",
    )
    p.set_defaults(handler=cmd_optimize)

    p = sub.add_parser("diagnose", parents=[common], help="most probable fault mode")
    p.add_argument(
        "--measure", action="append", default=[], metavar="VAR=VALUE",
        help="observed value, repeatable",
    )
    p.add_argument("--all", action="store_true", help="list every feasible diagnosis")
    p.add_argument("--limit", type=int, default=None, help="cap the --all listing")
    p.set_defaults(handler=cmd_diagnose)

    p = sub.add_parser("symbolic", parents=[common], help="closed-form solutions")
    p.add_argument("--all", action="store_true", help="print every variable")
    p.add_argument(
        "--at", action="append", default=[], metavar="PARAM=VALUE",
        help="also evaluate at this parameter point, repeatable",
    )
    p.set_defaults(handler=cmd_symbolic)

    p = sub.add_parser("bench", parents=[common], help="scaling suite with figures")
    p.add_argument("--sizes", help="comma-separated n values, e.g. 1,2,5,10")
    p.add_argument("--format", choices=["table", "csv", "json"], default="table")
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--figures", help="directory for the scaling figures")
    p.set_defaults(handler=cmd_bench)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.handler(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_EXIT
    except (Infeasible, Unsatisfiable) as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return 1
    except NetbenchError as e:
        print(f"unsupported: {e}", file=sys.stderr)
        return USAGE_EXIT
    except Exception as e:  # noqa: BLE001 - last-resort report, exit code 3
        print(f"internal error: {e!r}", file=sys.stderr)
        return INTERNAL_EXIT


if __name__ == "__main__":
    sys.exit(main())
