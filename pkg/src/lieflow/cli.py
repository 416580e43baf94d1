"""Command-line interface.

Subcommands: check-involutive, solve-gamma, verify-aut, compare-exponential,
all.  Exit codes: 0 pass, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from .cocycle import commutativity_defect, solve_fundamental_and_naive
from .errors import DomainExitError, LieflowError, ScenarioError, StructureNotFound
from .module_algebra import involutivity_check, solve_structure_matrix
from .scenario_io import load_scenario
from .verifier import format_number, verify_inverse, verify_scenario

COMMUTING_DEFECT_TOL = 1e-10


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lieflow",
        description="Verify that flows of module elements preserve the module "
        "of polynomial vector fields described by a scenario file.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = [
        ("check-involutive", "certify pairwise generator brackets in the module"),
        ("solve-gamma", "solve the structure-coefficient matrix for field_x"),
        ("verify-aut", "full per-point verification of flow invariance"),
        ("compare-exponential", "fundamental solution vs naive matrix exponential"),
        ("all", "run every check"),
    ]
    for name, help_text in commands:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("scenario", help="path to a scenario file")
        p.add_argument("--method", choices=["rk4", "rk45"], help="integrator method override")
        p.add_argument("--step", type=float, help="rk4 step size override")
        p.add_argument("--abs-tol", type=float, help="absolute tolerance override")
        p.add_argument("--rel-tol", type=float, help="relative tolerance override")
        p.add_argument("--max-steps", type=int, help="step budget override")
        if name in ("verify-aut", "all"):
            p.add_argument("--report", metavar="PATH", help="write the machine-readable record file")
    return parser


def _apply_overrides(scenario, args):
    overrides = {}
    for field, attr in [
        ("method", "method"),
        ("step", "step"),
        ("abs_tol", "abs_tol"),
        ("rel_tol", "rel_tol"),
        ("max_steps", "max_steps"),
    ]:
        value = getattr(args, field)
        if value is not None:
            overrides[attr] = value
    if not overrides:
        return scenario
    cfg = dataclasses.replace(scenario.integrator, **overrides)
    return scenario.with_integrator(cfg)


def _print_involutivity(scenario, table):
    names = scenario.variable_names
    total = 0
    certified = 0
    N = len(scenario.generators)
    for i in range(N):
        for j in range(i + 1, N):
            total += 1
            cert = table.entries[i][j]
            label = f"[Y{i + 1}, Y{j + 1}]"
            if cert is None:
                print(f"{label}: no certificate up to degree {table.degree_bound}")
            else:
                certified += 1
                coeffs = ", ".join(p.text(names) for p in cert.coefficients)
                print(f"{label} certified: ({coeffs})")
    print(f"involutivity: {certified}/{total} pairs certified (bound {table.degree_bound})")
    return certified == total


def _print_structure(scenario, structure):
    names = scenario.variable_names
    for i, row in enumerate(structure.entries):
        print(f"row {i + 1}: (" + ", ".join(p.text(names) for p in row) + ")")


def _run_compare(scenario):
    """Per-point fundamental-vs-naive comparison; returns True when every
    commuting point (defect below threshold) has matching matrices."""
    try:
        structure = solve_structure_matrix(
            scenario.field, scenario.generators, scenario.degree_bound
        )
    except StructureNotFound as exc:
        print(f"structure matrix: {exc}")
        return False
    ok = True
    for point in scenario.sample_points:
        label = "[" + ", ".join(format_number(v) for v in point) + "]"
        try:
            fund, naive = solve_fundamental_and_naive(
                structure, scenario.field, point, scenario.horizon,
                scenario.integrator, scenario.box,
            )
            defect = commutativity_defect(
                structure, scenario.field, point, scenario.horizon,
                cfg=scenario.integrator, box=scenario.box,
            )
        except DomainExitError as exc:
            print(f"point {label}: skipped ({exc})")
            continue
        gap = float(np.linalg.norm(naive.matrix - fund.matrix, "fro"))
        det = float(np.linalg.det(fund.matrix))
        cond = float(np.linalg.cond(fund.matrix))
        print(
            f"point {label}: naive_gap={format_number(gap)} "
            f"defect={format_number(defect)} det={format_number(det)} "
            f"cond={format_number(cond)}"
        )
        if defect <= COMMUTING_DEFECT_TOL and gap > scenario.agreement_tol:
            print(
                f"point {label}: FAIL naive exponential disagrees "
                f"({format_number(gap)}) despite commuting coefficients"
            )
            ok = False
    return ok


def _print_report_summary(report, scenario):
    print(
        f"scenario: {report.scenario} "
        f"(n={scenario.dimension}, N={len(scenario.generators)}, "
        f"T={format_number(scenario.horizon)}, bound {report.degree_bound})"
    )
    if not report.involutivity.certified:
        pairs = ", ".join(f"({i},{j})" for i, j in report.involutivity.failures())
        print(
            f"involutivity: pairs {pairs} have no certificate up to degree "
            f"{report.degree_bound}"
        )
    else:
        print("involutivity: all pairs certified")
    if report.structure is None:
        print(f"structure matrix: {report.structure_error}")
    else:
        print("structure matrix: solved")
    print(f"points: {report.points_completed}/{report.points_total} completed")
    for name, value in [
        ("max span residual", report.max_residual),
        ("max reconstruction gap", report.max_reconstruction_gap),
        ("max naive-vs-fundamental gap", report.max_naive_gap),
        ("max commutativity defect", report.max_defect),
        ("min det V", report.min_determinant),
        ("max cond V", report.max_condition),
        ("coefficient Lipschitz estimate", report.smoothness_lipschitz),
    ]:
        if value is not None:
            print(f"{name}: {format_number(value)}")
    skipped = [r for r in report.records if r.status.startswith("skipped")]
    for record in skipped[: len(scenario.generators)]:
        print(f"point {record.point_index}: {record.status}")
    print(f"elapsed: {report.elapsed_seconds:.3f}s")
    print(f"result: {'PASS' if report.passed else 'FAIL'}")


def _write_report(report, path):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(report.machine_text())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
    except (OSError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    scenario = _apply_overrides(scenario, args)

    try:
        if args.command == "check-involutive":
            table = involutivity_check(scenario.generators, scenario.degree_bound)
            return 0 if _print_involutivity(scenario, table) else 1

        if args.command == "solve-gamma":
            try:
                structure = solve_structure_matrix(
                    scenario.field, scenario.generators, scenario.degree_bound
                )
            except StructureNotFound as exc:
                print(f"structure matrix: {exc}")
                return 1
            _print_structure(scenario, structure)
            return 0

        if args.command == "verify-aut":
            report = verify_scenario(scenario)
            _print_report_summary(report, scenario)
            if args.report:
                _write_report(report, args.report)
            return 0 if report.passed else 1

        if args.command == "compare-exponential":
            return 0 if _run_compare(scenario) else 1

        # all
        table = involutivity_check(scenario.generators, scenario.degree_bound)
        involutive_ok = _print_involutivity(scenario, table)
        report = verify_scenario(scenario)
        if report.structure is not None:
            _print_structure(scenario, report.structure)
        _print_report_summary(report, scenario)
        inverse_ok, deviation = verify_inverse(scenario)
        print(f"inverse identity: max deviation {format_number(deviation)}")
        compare_ok = _run_compare(scenario)
        if args.report:
            _write_report(report, args.report)
        return 0 if (involutive_ok and report.passed and inverse_ok and compare_ok) else 1
    except LieflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
