"""The compiled and pure-Python kernels must agree to rounding noise."""

import numpy as np
import pytest

from lieflow import GeneratorSet, parse_vector_field, solve_structure_matrix
from lieflow._compile import field_polyset, jacobian_polyset, matrix_polyset
from lieflow import _kernels_py

compiled = pytest.importorskip(
    "lieflow._kernels", reason="compiled extension not built"
)


def field(text, dim=1):
    return parse_vector_field(text, dim)


def test_status_constants_match():
    for name in (
        "STATUS_OK",
        "STATUS_LEFT_DOMAIN",
        "STATUS_STEP_LIMIT",
        "STATUS_NO_PROGRESS",
        "METHOD_RK4",
        "METHOD_RK45",
    ):
        assert getattr(compiled, name) == getattr(_kernels_py, name)


def test_pure_polyset_evaluation_matches_exact():
    vf = field("x^2*dx + x*y*dy - 1/3*dy", 2)
    ps = field_polyset(vf)
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.uniform(-2, 2, size=2)
        pure = _kernels_py.eval_polyset(ps.offsets, ps.exps, ps.coefs, x)
        assert np.allclose(pure, vf.evaluate(x), rtol=1e-13, atol=1e-13)


def test_zero_duration_returns_initial_state():
    vf = field("x^2*dx + x*y*dy - 1/3*dy", 2)
    x = np.array([0.3, -0.7])
    for result in run_both(variational_args(vf, x, 0.0, 1.0, compiled.METHOD_RK45)):
        status, endpoint, m, _, steps = result
        assert status == compiled.STATUS_OK and steps == 0
        assert np.array_equal(endpoint, x)
        assert np.array_equal(m, np.eye(2).ravel())


def run_both(kernel_args):
    results = []
    for kernels in (compiled, _kernels_py):
        results.append(kernels.integrate_matrix_ode(*kernel_args))
    return results


def variational_args(vf, x0, duration, sign, method, step=1e-2):
    n = vf.dimension
    fset = field_polyset(vf)
    gset = jacobian_polyset(vf)
    return (
        n, n,
        fset.offsets, fset.exps, fset.coefs,
        gset.offsets, gset.exps, gset.coefs,
        np.asarray(x0, dtype=float), np.eye(n).ravel(),
        duration, sign, sign, False,
        method, step, 1e-10, 1e-10, 10**6,
        np.full(n, -np.inf), np.full(n, np.inf),
    )


@pytest.mark.parametrize("method_name", ["rk4", "rk45"])
def test_variational_flow_agrees(method_name):
    vf = field("x*dy - y*dx + 1/10*x^2*dx", 2)
    method = compiled.METHOD_RK4 if method_name == "rk4" else compiled.METHOD_RK45
    (s1, x1, m1, _, n1), (s2, x2, m2, _, n2) = run_both(
        variational_args(vf, [0.4, -0.3], 1.0, 1.0, method)
    )
    assert s1 == s2 == compiled.STATUS_OK
    assert n1 == n2
    assert np.allclose(x1, x2, rtol=1e-12, atol=1e-14)
    assert np.allclose(m1, m2, rtol=1e-12, atol=1e-14)


def test_cocycle_system_agrees():
    gens = GeneratorSet((field("dx"), field("x*dx")))
    X = field("x^2*dx")
    sm = solve_structure_matrix(X, gens, 3)
    fset = field_polyset(X)
    gset = matrix_polyset(sm.entries, 1)
    args = (
        1, 2,
        fset.offsets, fset.exps, fset.coefs,
        gset.offsets, gset.exps, gset.coefs,
        np.array([0.5]), np.eye(2).ravel(),
        1.0, -1.0, 1.0, True,
        compiled.METHOD_RK45, 1e-2, 1e-10, 1e-10, 10**6,
        np.array([-0.9]), np.array([0.9]),
    )
    (s1, x1, v1, q1, n1), (s2, x2, v2, q2, n2) = run_both(args)
    assert s1 == s2 == compiled.STATUS_OK
    assert n1 == n2
    assert np.allclose(v1, v2, rtol=1e-12, atol=1e-14)
    assert np.allclose(q1, q2, rtol=1e-12, atol=1e-14)


def test_left_domain_agrees():
    vf = field("x*dx")
    args = list(variational_args(vf, [0.9], 1.0, 1.0, compiled.METHOD_RK45))
    args[-2:] = [np.array([-1.0]), np.array([1.0])]
    (s1, x1, *_), (s2, x2, *_) = run_both(tuple(args))
    assert s1 == s2 == compiled.STATUS_LEFT_DOMAIN
    assert np.allclose(x1, x2, rtol=1e-12)
