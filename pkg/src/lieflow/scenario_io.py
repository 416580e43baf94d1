"""Scenario files: YAML documents validated into Scenario objects.

Recognized keys: ``dimension``, ``box``, ``variables`` (optional renames),
``generators``, ``field_x``, ``degree_bound``, ``horizon``, ``samples``
(``points`` and/or ``grid``), ``integrator`` and ``tolerances`` blocks.
Parse errors carry the YAML line/column; validation errors name the
offending key.  Loading also certifies that ``field_x`` belongs to the
generated module at the degree bound.
"""

from __future__ import annotations

import os
from itertools import product

import numpy as np
import yaml

from .errors import ParseError, ScenarioError
from .flow import IntegratorConfig
from .module_algebra import GeneratorSet, default_degree_bound, polynomial_membership
from .parsing import parse_polynomial, parse_vector_field
from .polyfield import ChartBox, default_variable_names
from .verifier import Scenario

SCENARIO_KEYS = {
    "dimension",
    "box",
    "variables",
    "generators",
    "field_x",
    "degree_bound",
    "horizon",
    "samples",
    "integrator",
    "tolerances",
}
INTEGRATOR_KEYS = {"method", "step", "abs_tol", "rel_tol", "max_steps"}
TOLERANCE_KEYS = {"residual_tol", "agreement_tol"}
SAMPLES_KEYS = {"points", "grid"}
GRID_KEYS = {"counts", "lo", "hi"}


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_scenario_text(text, name)


def parse_scenario_text(text, name) -> Scenario:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"scenario parse error: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError("scenario file must be a mapping of keys to values")

    unknown = set(data) - SCENARIO_KEYS
    if unknown:
        raise ScenarioError(f"unknown key {sorted(unknown)[0]!r}")
    for key in ("dimension", "box", "generators", "field_x"):
        if key not in data:
            raise ScenarioError(f"missing required key {key!r}")

    dimension = data["dimension"]
    if not isinstance(dimension, int) or dimension < 1:
        raise ScenarioError("dimension: must be an integer >= 1")

    box = _parse_box(data["box"], dimension)
    names = _parse_variables(data.get("variables"), dimension)

    generators = data["generators"]
    if not isinstance(generators, list) or not generators:
        raise ScenarioError("generators: must be a nonempty list of field expressions")
    fields = []
    for i, expr in enumerate(generators):
        try:
            fields.append(parse_vector_field(str(expr), dimension, names))
        except ParseError as exc:
            raise ScenarioError(f"generators[{i}]: {exc}") from exc
    gens = GeneratorSet(tuple(fields))

    try:
        field = parse_vector_field(str(data["field_x"]), dimension, names)
    except ParseError as exc:
        raise ScenarioError(f"field_x: {exc}") from exc

    degree_bound = data.get("degree_bound")
    if degree_bound is None:
        degree_bound = default_degree_bound(field, gens)
    elif not isinstance(degree_bound, int) or degree_bound < 0:
        raise ScenarioError("degree_bound: must be an integer >= 0")

    horizon = data.get("horizon", 1.0)
    if not isinstance(horizon, (int, float)) or isinstance(horizon, bool) or horizon < 0:
        raise ScenarioError("horizon: must be a number >= 0")

    points = _parse_samples(data.get("samples"), dimension, box)

    integrator = _parse_integrator(data.get("integrator"))
    residual_tol, agreement_tol = _parse_tolerances(data.get("tolerances"))

    if polynomial_membership(field, gens, degree_bound) is None:
        raise ScenarioError(
            f"field_x: no membership certificate with coefficients of degree <= {degree_bound}"
        )

    return Scenario(
        name=name,
        box=box,
        generators=gens,
        field=field,
        degree_bound=degree_bound,
        horizon=float(horizon),
        sample_points=points,
        integrator=integrator,
        residual_tol=residual_tol,
        agreement_tol=agreement_tol,
        variable_names=names,
    )


def _parse_box(raw, dimension):
    if not isinstance(raw, list) or len(raw) != dimension:
        raise ScenarioError(f"box: must list {dimension} [lo, hi] intervals")
    intervals = []
    for i, pair in enumerate(raw):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)
        ):
            raise ScenarioError(f"box[{i}]: must be a [lo, hi] pair of numbers")
        if not pair[0] < pair[1]:
            raise ScenarioError(f"box[{i}]: needs lo < hi")
        intervals.append((float(pair[0]), float(pair[1])))
    return ChartBox.from_intervals(intervals)


def _parse_variables(raw, dimension):
    if raw is None:
        return default_variable_names(dimension)
    if (
        not isinstance(raw, list)
        or len(raw) != dimension
        or not all(isinstance(v, str) and v.isidentifier() for v in raw)
    ):
        raise ScenarioError(f"variables: must list {dimension} identifier names")
    if len(set(raw)) != dimension:
        raise ScenarioError("variables: names must be distinct")
    for v in raw:
        if v.startswith("d") and v[1:] in raw:
            raise ScenarioError(
                f"variables: {v!r} collides with the derivative symbol of {v[1:]!r}"
            )
    return tuple(raw)


def _parse_point(raw, dimension, label):
    if (
        not isinstance(raw, list)
        or len(raw) != dimension
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw)
    ):
        raise ScenarioError(f"{label}: must be a point with {dimension} coordinates")
    return np.array([float(v) for v in raw])


def _parse_samples(raw, dimension, box):
    if raw is None:
        raise ScenarioError("samples: at least one sample point is required")
    if not isinstance(raw, dict) or not set(raw) <= SAMPLES_KEYS:
        raise ScenarioError("samples: expected a block with 'points' and/or 'grid'")
    points = []
    if "points" in raw:
        if not isinstance(raw["points"], list):
            raise ScenarioError("samples.points: must be a list of points")
        for i, entry in enumerate(raw["points"]):
            points.append(_parse_point(entry, dimension, f"samples.points[{i}]"))
    if "grid" in raw:
        grid = raw["grid"]
        if not isinstance(grid, dict) or not set(grid) <= GRID_KEYS or "counts" not in grid:
            raise ScenarioError("samples.grid: expected a block with 'counts' (and lo/hi)")
        counts = grid["counts"]
        if (
            not isinstance(counts, list)
            or len(counts) != dimension
            or not all(isinstance(c, int) and c >= 1 for c in counts)
        ):
            raise ScenarioError(f"samples.grid.counts: must list {dimension} integers >= 1")
        lo = (
            _parse_point(grid["lo"], dimension, "samples.grid.lo")
            if "lo" in grid
            else np.array(box.lower)
        )
        hi = (
            _parse_point(grid["hi"], dimension, "samples.grid.hi")
            if "hi" in grid
            else np.array(box.upper)
        )
        axes = []
        for k in range(dimension):
            if counts[k] == 1:
                axes.append([0.5 * (lo[k] + hi[k])])
            else:
                axes.append(list(np.linspace(lo[k], hi[k], counts[k])))
        for combo in product(*axes):
            points.append(np.array(combo))
    if not points:
        raise ScenarioError("samples: at least one sample point is required")
    for i, point in enumerate(points):
        if not box.contains(point):
            raise ScenarioError(f"samples: point {i} {point.tolist()} lies outside the box")
    return tuple(points)


def _parse_integrator(raw):
    if raw is None:
        return IntegratorConfig()
    if not isinstance(raw, dict) or not set(raw) <= INTEGRATOR_KEYS:
        raise ScenarioError(
            "integrator: allowed keys are method, step, abs_tol, rel_tol, max_steps"
        )
    kwargs = {}
    if "method" in raw:
        kwargs["method"] = str(raw["method"])
    for key in ("step", "abs_tol", "rel_tol"):
        if key in raw:
            value = raw[key]
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ScenarioError(f"integrator.{key}: must be a number")
            kwargs[key] = float(value)
    if "max_steps" in raw:
        if not isinstance(raw["max_steps"], int):
            raise ScenarioError("integrator.max_steps: must be an integer")
        kwargs["max_steps"] = raw["max_steps"]
    try:
        return IntegratorConfig(**kwargs)
    except ValueError as exc:
        raise ScenarioError(f"integrator: {exc}") from exc


def _parse_tolerances(raw):
    if raw is None:
        return 1e-6, 1e-6
    if not isinstance(raw, dict) or not set(raw) <= TOLERANCE_KEYS:
        raise ScenarioError("tolerances: allowed keys are residual_tol, agreement_tol")
    out = {}
    for key in TOLERANCE_KEYS:
        value = raw.get(key, 1e-6)
        if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
            raise ScenarioError(f"tolerances.{key}: must be a positive number")
        out[key] = float(value)
    return out["residual_tol"], out["agreement_tol"]
