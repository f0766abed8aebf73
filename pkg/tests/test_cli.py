"""Command-line surface: outputs, exit codes, file round-trips."""

import pytest

from netbench.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_fe_one_box(capsys):
    code, out, _ = run(capsys, "solve", "--family", "fe", "--n", "1")
    assert code == 0
    assert "i_GND = 0.05011765" in out
    assert "(213/4250)" in out
    assert len(out.strip().splitlines()) == 48


def test_solve_float_backend_omits_rationals(capsys):
    code, out, _ = run(capsys, "solve", "--family", "be", "--backend", "f64")
    assert code == 0
    assert "i_GND = 0.12000000\n" in out
    assert "(" not in out


def test_modes_two_boxes(capsys):
    code, out, _ = run(
        capsys, "modes", "--family", "se", "--n", "2", "--orientation", "figure"
    )
    assert code == 0
    assert "i_GND = 0.06000000" in out
    assert "D1_B1=Blocking,D4_B1=Conducting,D1_B2=Blocking,D4_B2=Conducting" in out
    assert "branches explored: 4" in out


def test_modes_all_lists_the_single_feasible_mode(capsys):
    code, out, _ = run(capsys, "modes", "--family", "se", "--n", "1", "--all")
    assert code == 0
    assert "feasible modes: 1" in out


def test_diagnose_healthy(capsys):
    code, out, _ = run(capsys, "diagnose", "--family", "be")
    assert code == 0
    assert "probability = 0.90000000" in out
    assert "faults: {}" in out


def test_diagnose_zero_current(capsys):
    code, out, _ = run(capsys, "diagnose", "--family", "be", "--measure", "i2_R=0")
    assert code == 0
    assert "probability = 0.10000000" in out
    assert "faults: {R}" in out


def test_optimize_square_system(capsys):
    code, out, _ = run(capsys, "optimize", "--family", "be", "--sense", "max")
    assert code == 0
    assert "max i_GND = 0.12000000" in out


def test_optimize_toleranced(capsys):
    code, out, _ = run(
        capsys, "optimize", "--family", "be", "--tolerance", "0.1",
        "--sense", "min",
    )
    assert code == 0
    assert "min i_GND = 0.10909091" in out


def test_optimize_strict_is_refused(capsys):
    code, _, err = run(
        capsys, "optimize", "--family", "be", "--tolerance", "0.1", "--strict"
    )
    assert code == 2
    assert "unsupported" in err


def test_optimize_alternates(capsys):
    code, out, _ = run(
        capsys, "optimize", "--family", "be", "--alternates", "90,110",
        "--sense", "max",
    )
    assert code == 0
    assert "max i_GND = 0.13333333" in out
    assert "mode: R=90" in out


def test_bilinear_solve_equals_plain(capsys):
    code, plain, _ = run(capsys, "solve", "--family", "be")
    code2, folded, _ = run(capsys, "solve", "--family", "be", "--bilinear")
    assert code == code2 == 0
    assert plain == folded


def test_interval_subcommand(capsys):
    code, out, _ = run(capsys, "interval", "--family", "be", "--tolerance", "0.1")
    assert code == 0
    assert "i_GND = [0.10909091, 0.13333333]" in out


def test_interval_over_alternates_prints_per_mode_boxes(capsys):
    code, out, _ = run(
        capsys, "interval", "--family", "be", "--alternates", "90,110",
        "--tolerance", "0.1",
    )
    assert code == 0
    assert "mode: R=90" in out and "mode: R=110" in out
    # bands sit around each alternate: [81, 99] and [99, 121]
    assert "i_GND = [0.12121212, 0.14814815]" in out
    assert "i_GND = [0.09917355, 0.12121212]" in out


def test_interval_se_reports_the_searched_mode(capsys):
    code, out, _ = run(
        capsys, "interval", "--family", "se", "--n", "1", "--tolerance", "0.1"
    )
    assert code == 0
    assert "mode: D1=Blocking,D4=Conducting" in out
    assert "i1_R2 = [0.10909091, 0.13333333]" in out


def test_interval_disjunctive_instance_file_is_refused(tmp_path, capsys):
    path = str(tmp_path / "se1.json")
    code, _, _ = run(
        capsys, "generate", "--family", "se", "--n", "1", "--tolerance", "0.1",
        "--out", path,
    )
    assert code == 0
    code, _, err = run(capsys, "interval", "--instance", path)
    assert code == 2
    assert "rebuild" in err


def test_symbolic_subcommand(capsys):
    code, out, _ = run(capsys, "symbolic", "--family", "be")
    assert code == 0
    assert "i_GND = (u_SRC) / (R)" in out


def test_symbolic_toleranced_prints_enclosure(capsys):
    code, out, _ = run(capsys, "symbolic", "--family", "be", "--tolerance", "0.1")
    assert code == 0
    assert "i_GND = (u_SRC) / (R)" in out
    assert "i_GND in [0.10909091, 0.13333333]" in out


def test_symbolic_alternates_enumerates_both_modes(capsys):
    code, out, _ = run(
        capsys, "symbolic", "--family", "be", "--alternates", "90,110",
        "--at", "R=100", "--at", "u_SRC=12",
    )
    assert code == 0
    assert "mode: R=90" in out
    assert "i_GND = (10*u_SRC) / (9*R)" in out
    assert "i_GND @ point = 0.13333333 (2/15)" in out
    assert "mode: R=110" in out
    assert "i_GND = (10*u_SRC) / (11*R)" in out
    assert "i_GND @ point = 0.10909091 (6/55)" in out


def test_symbolic_evaluates_points(capsys):
    code, out, _ = run(
        capsys, "symbolic", "--family", "be", "--at", "R=50", "--at", "u_SRC=12"
    )
    assert code == 0
    assert "i_GND @ point = 0.24000000 (6/25)" in out


def test_generate_and_reload(tmp_path, capsys):
    path = str(tmp_path / "fe2.json")
    code, _, err = run(
        capsys, "generate", "--family", "fe", "--n", "2", "--out", path
    )
    assert code == 0
    assert "variables=92" in err
    code, out, _ = run(capsys, "solve", "--instance", path)
    assert code == 0
    assert "i_GND = 0.02505882" in out


def test_generate_lp_format(capsys):
    code, out, _ = run(capsys, "generate", "--family", "be", "--lp")
    assert code == 0
    assert "Subject To" in out


def test_infeasible_pin_exits_one(capsys):
    code, _, err = run(
        capsys, "modes", "--family", "se", "--n", "1", "--pin", "D1=Conducting"
    )
    assert code == 1
    assert "infeasible" in err


def test_unknown_measure_variable_exits_two(capsys):
    code, _, err = run(
        capsys, "diagnose", "--family", "be", "--measure", "bogus=0"
    )
    assert code == 2


def test_malformed_measure_exits_two(capsys):
    code, _, err = run(capsys, "diagnose", "--family", "be", "--measure", "i2_R")
    assert code == 2
    assert "var=value" in err


def test_solve_on_disjunctive_system_exits_two(capsys):
    code, _, err = run(capsys, "solve", "--family", "se")
    assert code == 2
    assert "modes" in err


def test_usage_errors_from_argparse(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--backend", "quantum"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_threads_must_be_positive(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--family", "be", "--threads", "0"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_bench_writes_report_and_figures(tmp_path, capsys):
    out = str(tmp_path / "report.csv")
    code, _, err = run(
        capsys, "bench", "--family", "fe", "--sizes", "1", "--repetitions", "1",
        "--format", "csv", "--out", out, "--figures", str(tmp_path),
    )
    assert code == 0
    assert "timing.png" in err and "error.png" in err
    with open(out) as fh:
        header = fh.readline()
    assert header.startswith("n,backend,")
    assert (tmp_path / "timing.png").exists()


def test_output_to_file(tmp_path, capsys):
    path = str(tmp_path / "solution.txt")
    code, out, _ = run(capsys, "solve", "--family", "be", "--out", path)
    assert code == 0
    assert out == ""
    with open(path) as fh:
        assert "i_GND = 0.12000000" in fh.read()
