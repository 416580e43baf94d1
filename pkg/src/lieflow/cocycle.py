"""The linear nonautonomous system behind flow invariance of the module.

Along the backward trajectory b(s) of the flowing field (b(0) = x, b
follows the reversed field), the structure matrix evaluated there,
A(s) = S(b(s)), drives the matrix ODE

    V'(s) = A(s) V(s),   V(0) = I.

The fundamental solution V(T) is the ground truth here: its rows
reconstruct pushed-forward generators from generator values at x.  The
matrix exponential of the time integral, exp(int_0^T A), is the naive
closed form; it solves the ODE only when the A(s) commute pairwise, and
``commutativity_defect`` measures how far a scenario is from that regime.

One kernel pass co-integrates the trajectory, the matrix ODE and the
quadrature of int A, so fundamental and naive solutions consume identical
trajectory data and their gap isolates the mathematical (commutativity)
difference, not integration noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from ._compile import field_polyset, matrix_polyset
from .errors import DimensionMismatch, DomainExitError
from .flow import DEFAULT_CONFIG, flow, run_kernel
from .module_algebra import StructureMatrix
from .polyfield import PolyVectorField

__all__ = [
    "CocycleSolution",
    "fundamental_solution",
    "naive_exponential",
    "solve_fundamental_and_naive",
    "structure_matrix_along_flow",
    "commutativity_defect",
    "expm",
]


@dataclass(frozen=True)
class CocycleSolution:
    """Terminal matrix of the cocycle problem at one base point.

    ``matrix`` maps generator values at the base point to pushed-forward
    generator values: row i holds the coefficients of generator i's
    pushforward in terms of the generators evaluated at the base point.
    ``integral_of_a`` is the accumulated time integral of A, kept for
    diagnostics and for the naive closed form.
    """

    base_point: np.ndarray
    horizon: float
    matrix: np.ndarray
    method: str  # "fundamental" | "naive_exponential"
    integral_of_a: np.ndarray
    steps_taken: int


def _integrate_cocycle(structure: StructureMatrix, X, x, horizon, cfg, box):
    if X.dimension != structure.generators.dimension:
        raise DimensionMismatch("flowing field and structure matrix on different charts")
    horizon = float(horizon)
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    N = structure.size
    status, _, v, q, steps = run_kernel(
        field_polyset(X),
        matrix_polyset(structure.entries, X.dimension),
        N,
        np.asarray(x, dtype=float),
        np.eye(N),
        horizon,
        -1.0,
        1.0,
        True,
        cfg,
        box,
    )
    if status == kernels.STATUS_LEFT_DOMAIN:
        raise DomainExitError("backward trajectory left the chart box")
    return v, q, steps


def fundamental_solution(
    structure: StructureMatrix, X: PolyVectorField, x, horizon, cfg=DEFAULT_CONFIG, box=None
) -> CocycleSolution:
    """Terminal value V(horizon) of the matrix ODE, the ground truth."""
    v, q, steps = _integrate_cocycle(structure, X, x, horizon, cfg, box)
    return CocycleSolution(
        np.asarray(x, dtype=float), float(horizon), v, "fundamental", q, steps
    )


def naive_exponential(
    structure: StructureMatrix, X: PolyVectorField, x, horizon, cfg=DEFAULT_CONFIG, box=None
) -> CocycleSolution:
    """exp(int_0^horizon A): exact only for pairwise-commuting A(s)."""
    _, q, steps = _integrate_cocycle(structure, X, x, horizon, cfg, box)
    return CocycleSolution(
        np.asarray(x, dtype=float), float(horizon), expm(q), "naive_exponential", q, steps
    )


def solve_fundamental_and_naive(
    structure: StructureMatrix, X: PolyVectorField, x, horizon, cfg=DEFAULT_CONFIG, box=None
):
    """Both solutions from a single integration pass."""
    v, q, steps = _integrate_cocycle(structure, X, x, horizon, cfg, box)
    x = np.asarray(x, dtype=float)
    horizon = float(horizon)
    return (
        CocycleSolution(x, horizon, v, "fundamental", q, steps),
        CocycleSolution(x, horizon, expm(q), "naive_exponential", q, steps),
    )


def structure_matrix_along_flow(
    structure: StructureMatrix, X: PolyVectorField, x, t, cfg=DEFAULT_CONFIG, box=None
) -> np.ndarray:
    """A(t): every structure-matrix entry evaluated at the backward-flowed point."""
    back = flow(X, x, -t, cfg, box)
    if back.left_domain:
        raise DomainExitError("backward trajectory left the chart box")
    return structure.value_at(back.endpoint)


def commutativity_defect(
    structure: StructureMatrix,
    X: PolyVectorField,
    x,
    horizon,
    sample_count=9,
    cfg=DEFAULT_CONFIG,
    box=None,
) -> float:
    """Max Frobenius norm of [A(s), A(t)] over a uniform time sample of [0, horizon].

    Zero (up to integration error) exactly when the naive exponential is
    trustworthy on this trajectory.
    """
    sample_count = int(sample_count)
    if sample_count < 2:
        raise ValueError("sample_count must be >= 2")
    horizon = float(horizon)
    times = np.linspace(0.0, horizon, sample_count)
    point = np.asarray(x, dtype=float)
    matrices = [structure.value_at(point)]
    current = point
    for previous, now in zip(times[:-1], times[1:]):
        leg = flow(X, current, -(now - previous), cfg, box)
        if leg.left_domain:
            raise DomainExitError("backward trajectory left the chart box")
        current = leg.endpoint
        matrices.append(structure.value_at(current))
    defect = 0.0
    for i in range(sample_count):
        for j in range(i + 1, sample_count):
            commutator = matrices[i] @ matrices[j] - matrices[j] @ matrices[i]
            defect = max(defect, float(np.linalg.norm(commutator, "fro")))
    return defect


def expm(matrix: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a truncated series.

    The matrix is scaled below norm 1/2, where the order-16 Taylor
    truncation has relative error well under 1e-13, then squared back.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expm needs a square matrix")
    norm = float(np.linalg.norm(a, np.inf))
    squarings = 0
    if norm > 0.5:
        squarings = int(np.ceil(np.log2(norm / 0.5)))
        a = a / (2.0 ** squarings)
    identity = np.eye(a.shape[0])
    result = identity.copy()
    for order in range(16, 0, -1):
        result = identity + (a @ result) / order
    for _ in range(squarings):
        result = result @ result
    return result
