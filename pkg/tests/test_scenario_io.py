import numpy as np
import pytest

from lieflow import ScenarioError, load_scenario, parse_scenario_text

MINIMAL = """
dimension: 1
box: [[-2.0, 2.0]]
generators: ["dx", "x*dx"]
field_x: "x*dx"
samples:
  points: [[0.5]]
"""


def test_bundled_scenario_a_round_trip(scenario_dir):
    s = load_scenario(scenario_dir / "scenario_a.yaml")
    assert s.name == "scenario_a"
    assert s.dimension == 1
    assert len(s.generators) == 2
    assert s.degree_bound == 2
    assert s.horizon == 1.0
    assert len(s.sample_points) == 3
    assert s.integrator.method == "rk45"
    assert s.residual_tol == 1e-6


def test_minimal_scenario_defaults():
    s = parse_scenario_text(MINIMAL, "minimal")
    # default bound: deg(X) + max generator degree + 2
    assert s.degree_bound == 1 + 1 + 2
    assert s.horizon == 1.0
    assert s.integrator.method == "rk45"
    assert s.integrator.abs_tol == 1e-10
    assert s.agreement_tol == 1e-6


def test_grid_samples():
    text = """
dimension: 2
box: [[-2.0, 2.0], [-2.0, 2.0]]
generators: ["x*dx", "x*dy", "y*dx", "y*dy"]
field_x: "x*dy - y*dx"
samples:
  grid:
    counts: [3, 3]
    lo: [-1.0, -1.0]
    hi: [1.0, 1.0]
"""
    s = parse_scenario_text(text, "grid")
    assert len(s.sample_points) == 9
    assert any(np.allclose(p, [0.0, 0.0]) for p in s.sample_points)
    assert any(np.allclose(p, [-1.0, 1.0]) for p in s.sample_points)


def test_grid_single_count_uses_midpoint():
    text = """
dimension: 1
box: [[0.0, 2.0]]
generators: ["x*dx"]
field_x: "x*dx"
samples:
  grid:
    counts: [1]
"""
    s = parse_scenario_text(text, "mid")
    assert np.allclose(s.sample_points[0], [1.0])


def test_custom_variable_names():
    text = """
dimension: 2
box: [[-1.0, 1.0], [-1.0, 1.0]]
variables: ["u", "v"]
generators: ["u*du", "v*dv"]
field_x: "u*du"
samples:
  points: [[0.1, 0.2]]
"""
    s = parse_scenario_text(text, "custom")
    assert s.variable_names == ("u", "v")


@pytest.mark.parametrize(
    "mutation, fragment",
    [
        ("dimension: 0", "dimension"),
        ("box: [[2.0, -2.0]]", "box[0]"),
        ("degree_bound: -1", "degree_bound"),
        ("horizon: -2.0", "horizon"),
        ("unknown_key: 1", "unknown_key"),
    ],
)
def test_validation_errors_name_the_key(mutation, fragment):
    key = mutation.split(":")[0]
    lines = [
        line
        for line in MINIMAL.strip().splitlines()
        if not line.startswith(key)
    ]
    lines.append(mutation)
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text("\n".join(lines), "broken")
    assert fragment in str(info.value)


def test_missing_required_key():
    text = MINIMAL.replace('field_x: "x*dx"\n', "")
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(text, "broken")
    assert "field_x" in str(info.value)


def test_point_outside_box_names_index():
    text = MINIMAL.replace("[[0.5]]", "[[0.5], [3.0]]")
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(text, "broken")
    assert "point 1" in str(info.value)


def test_field_not_in_span_is_a_validation_error():
    text = MINIMAL.replace('field_x: "x*dx"', 'field_x: "x^3*dx"').replace(
        'generators: ["dx", "x*dx"]', 'generators: ["dx"]'
    )
    text += "degree_bound: 1\n"
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(text, "broken")
    assert "field_x" in str(info.value)
    assert "degree <= 1" in str(info.value)


def test_bad_generator_expression_names_index():
    text = MINIMAL.replace('"x*dx"]', '"x*qq"]')
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(text, "broken")
    assert "generators[1]" in str(info.value)


def test_yaml_error_carries_location(scenario_dir):
    with pytest.raises(ScenarioError) as info:
        load_scenario(scenario_dir / "malformed.yaml")
    assert "line" in str(info.value) and "column" in str(info.value)


def test_integrator_and_tolerance_blocks():
    text = MINIMAL + """
integrator:
  method: rk4
  step: 0.001
  max_steps: 5000
tolerances:
  residual_tol: 1.0e-7
  agreement_tol: 1.0e-5
"""
    s = parse_scenario_text(text, "custom")
    assert s.integrator.method == "rk4"
    assert s.integrator.step == 0.001
    assert s.integrator.max_steps == 5000
    assert s.residual_tol == 1e-7
    assert s.agreement_tol == 1e-5


def test_unknown_integrator_key_rejected():
    text = MINIMAL + """
integrator:
  timestep: 0.001
"""
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(text, "broken")
    assert "integrator" in str(info.value)
