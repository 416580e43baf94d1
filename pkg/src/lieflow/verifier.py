"""End-to-end verification that module elements' flows preserve the module.

For a scenario (chart box, generator family, flowing field, sample points)
the verifier certifies involutivity and the structure matrix symbolically,
then at every sample point compares three routes to the pushed-forward
generators:

  * direct:   backward flow + variational transport of the generator value,
  * cocycle:  reconstruction through the fundamental solution's rows,
  * naive:    reconstruction through exp(int A).

Membership evidence at a point is the least-squares residual of the pushed
vector against the span of generator values there.  Sample points where
all generators vanish are legal and meaningful: the pushforward vanishes
too (the flow fixes such points), so the residual still must pass.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .cocycle import commutativity_defect, solve_fundamental_and_naive
from .errors import DomainExitError, StructureNotFound
from .flow import DEFAULT_CONFIG, IntegratorConfig, flow, pushforward_direct
from .module_algebra import (
    GeneratorSet,
    InvolutivityTable,
    StructureMatrix,
    involutivity_check,
    solve_structure_matrix,
)
from .polyfield import ChartBox, Polynomial, PolyVectorField

__all__ = [
    "Scenario",
    "PointGeneratorRecord",
    "VerificationReport",
    "span_membership_residual",
    "verify_scenario",
    "verify_inverse",
    "verify_module_morphism",
    "DEFECT_SAMPLE_COUNT",
]

DEFECT_SAMPLE_COUNT = 9


@dataclass(frozen=True)
class Scenario:
    """One chart-local verification problem."""

    name: str
    box: ChartBox
    generators: GeneratorSet
    field: PolyVectorField
    degree_bound: int
    horizon: float = 1.0
    sample_points: tuple = ()
    integrator: IntegratorConfig = DEFAULT_CONFIG
    residual_tol: float = 1e-6
    agreement_tol: float = 1e-6
    variable_names: tuple = ()

    @property
    def dimension(self):
        return self.generators.dimension

    def with_integrator(self, cfg: IntegratorConfig) -> "Scenario":
        return replace(self, integrator=cfg)


@dataclass(frozen=True)
class PointGeneratorRecord:
    """One (sample point, generator) comparison; vectors are None when skipped."""

    point_index: int
    generator: int  # 1-based
    point: np.ndarray
    direct: Optional[np.ndarray]
    cocycle: Optional[np.ndarray]
    naive: Optional[np.ndarray]
    residual: Optional[float]
    naive_gap: Optional[float]
    defect: Optional[float]
    status: str


@dataclass
class VerificationReport:
    """Aggregated outcome of verify_scenario."""

    scenario: str
    degree_bound: int
    involutivity: InvolutivityTable
    structure: Optional[StructureMatrix]
    structure_error: Optional[str]
    records: list
    points_total: int
    points_completed: int
    max_residual: Optional[float]
    max_reconstruction_gap: Optional[float]
    max_naive_gap: Optional[float]
    max_defect: Optional[float]
    min_determinant: Optional[float]
    max_condition: Optional[float]
    smoothness_lipschitz: Optional[float]
    passed: bool
    elapsed_seconds: float

    def machine_lines(self):
        """One structured record per (point, generator); byte-stable."""
        return [_record_line(r) for r in self.records]

    def machine_text(self):
        return "".join(line + "\n" for line in self.machine_lines())


def format_number(value) -> str:
    """Report formatting rule: 15 significant digits, lowercase exponent."""
    return f"{float(value):.15g}"


def _json_value(value):
    if value is None:
        return "null"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(value)
    if isinstance(value, np.ndarray):
        return "[" + ", ".join(format_number(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value)!r}")


def _record_line(record: PointGeneratorRecord) -> str:
    fields = [
        ("point", record.point),
        ("generator", record.generator),
        ("direct", record.direct),
        ("cocycle", record.cocycle),
        ("naive", record.naive),
        ("residual", record.residual),
        ("naive_gap", record.naive_gap),
        ("defect", record.defect),
        ("status", record.status),
    ]
    body = ", ".join(f'"{name}": {_json_value(value)}' for name, value in fields)
    return "{" + body + "}"


def span_membership_residual(v, gens: GeneratorSet, x):
    """Distance of a tangent vector from the span of generator values at x.

    Returns (residual, coefficients): the Euclidean norm of v minus its
    least-squares fit, and the minimum-norm coefficient vector of that fit.
    A rank-deficient span (e.g. all generators vanishing) is handled by the
    minimum-norm convention of the least-squares solve.
    """
    v = np.asarray(v, dtype=float)
    matrix = gens.value_matrix(x)
    coefficients, *_ = np.linalg.lstsq(matrix, v, rcond=None)
    residual = float(np.linalg.norm(v - matrix @ coefficients))
    return residual, coefficients


def verify_scenario(scenario: Scenario) -> VerificationReport:
    """Run the full per-scenario verification and aggregate pass/fail.

    A sample point whose trajectories leave the box is skipped with a
    reason; the scenario fails if fewer than half the points complete.
    An uncertified structure matrix aborts the per-point phase entirely.
    """
    start = time.perf_counter()
    gens = scenario.generators
    cfg = scenario.integrator
    box = scenario.box
    horizon = scenario.horizon

    table = involutivity_check(gens, scenario.degree_bound)

    structure = None
    structure_error = None
    try:
        structure = solve_structure_matrix(scenario.field, gens, scenario.degree_bound)
    except StructureNotFound as exc:
        structure_error = str(exc)

    records = []
    fundamental_by_point = {}
    points_completed = 0
    if structure is not None:
        for pi, point in enumerate(scenario.sample_points):
            point = np.asarray(point, dtype=float)
            try:
                fund, naive = solve_fundamental_and_naive(
                    structure, scenario.field, point, horizon, cfg, box
                )
                defect = commutativity_defect(
                    structure,
                    scenario.field,
                    point,
                    horizon,
                    DEFECT_SAMPLE_COUNT,
                    cfg,
                    box,
                )
                back = flow(scenario.field, point, -horizon, cfg, box)
                if back.left_domain:
                    raise DomainExitError("backward trajectory left the chart box")
                forward = flow(scenario.field, back.endpoint, horizon, cfg, box)
                if forward.left_domain:
                    raise DomainExitError("forward trajectory left the chart box")
            except DomainExitError as exc:
                for gi in range(len(gens)):
                    records.append(
                        PointGeneratorRecord(
                            pi, gi + 1, point, None, None, None, None, None, None,
                            f"skipped: {exc}",
                        )
                    )
                continue
            naive_gap = float(np.linalg.norm(naive.matrix - fund.matrix, "fro"))
            generator_values = gens.value_matrix(point)
            for gi in range(len(gens)):
                direct = forward.differential @ gens[gi].evaluate(back.endpoint)
                reconstruction = generator_values @ fund.matrix[gi]
                naive_reconstruction = generator_values @ naive.matrix[gi]
                residual, _ = span_membership_residual(direct, gens, point)
                ok = (
                    residual <= scenario.residual_tol
                    and float(np.linalg.norm(direct - reconstruction))
                    <= scenario.agreement_tol
                )
                records.append(
                    PointGeneratorRecord(
                        pi,
                        gi + 1,
                        point,
                        direct,
                        reconstruction,
                        naive_reconstruction,
                        residual,
                        naive_gap,
                        defect,
                        "ok" if ok else "fail",
                    )
                )
            fundamental_by_point[pi] = fund.matrix
            points_completed += 1

    completed = [r for r in records if r.direct is not None]
    max_residual = max((r.residual for r in completed), default=None)
    max_reconstruction_gap = (
        max(float(np.linalg.norm(r.direct - r.cocycle)) for r in completed)
        if completed
        else None
    )
    max_naive_gap = max((r.naive_gap for r in completed), default=None)
    max_defect = max((r.defect for r in completed), default=None)

    min_determinant = None
    max_condition = None
    if fundamental_by_point:
        determinants = [float(np.linalg.det(v)) for v in fundamental_by_point.values()]
        conditions = [float(np.linalg.cond(v)) for v in fundamental_by_point.values()]
        min_determinant = min(determinants)
        max_condition = max(conditions)

    # Continuity evidence for the reconstruction coefficients: a Lipschitz
    # proxy over the fundamental matrices at completed points.
    smoothness = None
    indices = sorted(fundamental_by_point)
    for a in range(len(indices)):
        for b in range(a + 1, len(indices)):
            pa = np.asarray(scenario.sample_points[indices[a]], dtype=float)
            pb = np.asarray(scenario.sample_points[indices[b]], dtype=float)
            gap = np.linalg.norm(pa - pb)
            if gap == 0:
                continue
            rate = float(
                np.linalg.norm(
                    fundamental_by_point[indices[a]] - fundamental_by_point[indices[b]],
                    "fro",
                )
                / gap
            )
            smoothness = rate if smoothness is None else max(smoothness, rate)

    points_total = len(scenario.sample_points)
    passed = (
        table.certified
        and structure is not None
        and points_total > 0
        and 2 * points_completed >= points_total
        and all(r.status == "ok" for r in completed)
        and points_completed > 0
    )
    return VerificationReport(
        scenario=scenario.name,
        degree_bound=scenario.degree_bound,
        involutivity=table,
        structure=structure,
        structure_error=structure_error,
        records=records,
        points_total=points_total,
        points_completed=points_completed,
        max_residual=max_residual,
        max_reconstruction_gap=max_reconstruction_gap,
        max_naive_gap=max_naive_gap,
        max_defect=max_defect,
        min_determinant=min_determinant,
        max_condition=max_condition,
        smoothness_lipschitz=smoothness,
        passed=passed,
        elapsed_seconds=time.perf_counter() - start,
    )


def verify_inverse(scenario: Scenario, cfg=None, box=None):
    """Check that pushing forward by -X and then X restores each generator.

    Returns (ok, max_deviation) over all completed (point, generator)
    pairs; points whose trajectories leave the box are skipped.
    """
    cfg = cfg or scenario.integrator
    box = box or scenario.box
    X = scenario.field
    horizon = scenario.horizon
    max_deviation = 0.0
    for point in scenario.sample_points:
        point = np.asarray(point, dtype=float)
        try:
            back = flow(X, point, -horizon, cfg, box)
            if back.left_domain:
                raise DomainExitError("backward trajectory left the chart box")
            forward = flow(X, back.endpoint, horizon, cfg, box)
            if forward.left_domain:
                raise DomainExitError("forward trajectory left the chart box")
            for gen in scenario.generators:
                intermediate = pushforward_direct(
                    -X, gen, back.endpoint, horizon, cfg, box
                )
                restored = forward.differential @ intermediate
                deviation = float(np.linalg.norm(restored - gen.evaluate(point)))
                max_deviation = max(max_deviation, deviation)
        except DomainExitError:
            continue
    return max_deviation <= scenario.agreement_tol, max_deviation


def verify_module_morphism(
    scenario: Scenario, f: Polynomial, generator_index: int, point
) -> float:
    """Deviation in the module-morphism identity for the time-T flow.

    Compares the pushforward of f*Y against (f composed with the backward
    flow) times the pushforward of Y, at one point; generator_index is
    1-based.
    """
    cfg = scenario.integrator
    box = scenario.box
    X = scenario.field
    horizon = scenario.horizon
    gen = scenario.generators[generator_index - 1]
    point = np.asarray(point, dtype=float)
    left = pushforward_direct(X, f * gen, point, horizon, cfg, box)
    back = flow(X, point, -horizon, cfg, box)
    if back.left_domain:
        raise DomainExitError("backward trajectory left the chart box")
    right = f.evaluate(back.endpoint) * pushforward_direct(X, gen, point, horizon, cfg, box)
    return float(np.linalg.norm(left - right))
