"""Numerical flows of polynomial vector fields and direct pushforwards.

The flow differential is transported by co-integrating the variational
equation M' = J(x(t)) M with the exact symbolic Jacobian J of the field,
rather than finite-differencing the flow map.  Trajectories are confined
to a chart box: leaving it is flagged, not fatal, because polynomial
fields are generally incomplete (x^2 d/dx blows up in finite time).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import BACKEND, kernels
from ._compile import field_polyset, jacobian_polyset
from .errors import (
    DimensionMismatch,
    DomainExitError,
    IntegrationError,
    StepLimitExceeded,
)
from .polyfield import ChartBox, PolyVectorField

__all__ = [
    "BACKEND",
    "IntegratorConfig",
    "FlowResult",
    "DEFAULT_CONFIG",
    "flow",
    "pushforward_direct",
]

_METHOD_CODES = {"rk4": kernels.METHOD_RK4, "rk45": kernels.METHOD_RK45}


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator settings: fixed-step classical RK4 or adaptive Fehlberg 4(5)."""

    method: str = "rk45"
    step: float = 1e-2
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.method not in _METHOD_CODES:
            raise ValueError(f"unknown method {self.method!r}; use 'rk4' or 'rk45'")
        if self.method == "rk4" and not self.step > 0:
            raise ValueError("rk4 needs a positive step")
        if self.method == "rk45" and not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("rk45 needs positive tolerances")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class FlowResult:
    """Flow endpoint with the transported differential.

    When ``left_domain`` is set the endpoint and differential belong to the
    step that escaped the box and must not be used as values of the flow.
    """

    endpoint: np.ndarray
    differential: np.ndarray
    left_domain: bool
    steps_taken: int


def box_bounds(box, dimension):
    if box is None:
        return np.full(dimension, -np.inf), np.full(dimension, np.inf)
    if box.dimension != dimension:
        raise DimensionMismatch(
            f"box of dimension {box.dimension} for a chart of dimension {dimension}"
        )
    return np.asarray(box.lower, dtype=float), np.asarray(box.upper, dtype=float)


def run_kernel(fset, gset, k, x0, m0, duration, traj_sign, mat_sign, track_integral, cfg, box):
    """Shared kernel invocation; translates status codes into exceptions."""
    n = fset.count
    lo, hi = box_bounds(box, n)
    status, x, m, q, steps = kernels.integrate_matrix_ode(
        n,
        k,
        fset.offsets,
        fset.exps,
        fset.coefs,
        gset.offsets,
        gset.exps,
        gset.coefs,
        np.asarray(x0, dtype=float),
        np.asarray(m0, dtype=float).ravel(),
        float(duration),
        float(traj_sign),
        float(mat_sign),
        bool(track_integral),
        _METHOD_CODES[cfg.method],
        float(cfg.step),
        float(cfg.abs_tol),
        float(cfg.rel_tol),
        int(cfg.max_steps),
        lo,
        hi,
    )
    if status == kernels.STATUS_STEP_LIMIT:
        raise StepLimitExceeded(f"integration exceeded {cfg.max_steps} steps")
    if status == kernels.STATUS_NO_PROGRESS:
        raise IntegrationError(
            "integrator could not make progress (non-finite state or underflowing step)"
        )
    return status, x, m.reshape(k, k), q.reshape(k, k), steps


def flow(X: PolyVectorField, x0, t, cfg=DEFAULT_CONFIG, box=None) -> FlowResult:
    """Flow ``x0`` for time ``t`` along X, transporting the flow differential.

    Negative ``t`` integrates the reversed field.  The differential is the
    derivative of the time-t flow map at ``x0``.
    """
    x0 = np.asarray(x0, dtype=float)
    n = X.dimension
    if x0.shape != (n,):
        raise DimensionMismatch(f"start point of shape {x0.shape} on a chart of dimension {n}")
    if box is not None and not box.contains(x0):
        raise ValueError(f"start point {x0.tolist()} outside the chart box")
    sign = 1.0 if t >= 0 else -1.0
    status, x, m, _, steps = run_kernel(
        field_polyset(X),
        jacobian_polyset(X),
        n,
        x0,
        np.eye(n),
        abs(float(t)),
        sign,
        sign,
        False,
        cfg,
        box,
    )
    return FlowResult(x, m, status == kernels.STATUS_LEFT_DOMAIN, steps)


def pushforward_direct(
    X: PolyVectorField, Y: PolyVectorField, x, t, cfg=DEFAULT_CONFIG, box=None
) -> np.ndarray:
    """Value at ``x`` of Y pushed forward by the time-t flow of X.

    One backward flow fetches p = (time -t flow of x); one forward flow
    from p transports Y(p) through the variational differential.
    """
    X._check_same_chart(Y)
    back = flow(X, x, -t, cfg, box)
    if back.left_domain:
        raise DomainExitError("backward trajectory left the chart box")
    fwd = flow(X, back.endpoint, t, cfg, box)
    if fwd.left_domain:
        raise DomainExitError("forward trajectory left the chart box")
    return fwd.differential @ Y.evaluate(back.endpoint)
