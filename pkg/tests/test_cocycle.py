import math

import numpy as np
import pytest
import scipy.linalg

from lieflow import (
    ChartBox,
    GeneratorSet,
    IntegratorConfig,
    commutativity_defect,
    expm,
    flow,
    fundamental_solution,
    naive_exponential,
    parse_vector_field,
    pushforward_direct,
    solve_fundamental_and_naive,
    solve_structure_matrix,
    structure_matrix_along_flow,
)

CFG = IntegratorConfig(abs_tol=1e-10, rel_tol=1e-10)


def field(text, dim=1):
    return parse_vector_field(text, dim)


@pytest.fixture
def linear_setup():
    gens = GeneratorSet((field("dx"), field("x*dx")))
    X = field("x*dx")
    return solve_structure_matrix(X, gens, 2), X


@pytest.fixture
def quadratic_setup():
    gens = GeneratorSet((field("dx"), field("x*dx")))
    X = field("x^2*dx")
    box = ChartBox.from_intervals([(-0.9, 0.9)])
    return solve_structure_matrix(X, gens, 3), X, box


# -- structure matrix along the backward flow --------------------------------


def test_constant_structure_along_flow(linear_setup):
    sm, X = linear_setup
    for x, t in [([0.4], 0.8), ([-1.0], 0.0), ([0.9], 1.0)]:
        a = structure_matrix_along_flow(sm, X, x, t, CFG)
        assert np.allclose(a, [[1.0, 0.0], [0.0, 0.0]], atol=1e-12)


def test_structure_at_time_zero_is_pointwise(quadratic_setup):
    sm, X, box = quadratic_setup
    a = structure_matrix_along_flow(sm, X, [0.7], 0.0, CFG, box)
    assert np.allclose(a, sm.value_at([0.7]))


def test_quadratic_structure_along_flow(quadratic_setup):
    # backward flow of 0.5 for time 1 lands at 1/3, so A = [[0, 2], [0, 1/3]]
    sm, X, box = quadratic_setup
    a = structure_matrix_along_flow(sm, X, [0.5], 1.0, CFG, box)
    assert np.allclose(a, [[0.0, 2.0], [0.0, 1 / 3]], atol=1e-9)


# -- fundamental solution ----------------------------------------------------


def test_fundamental_constant_coefficients(linear_setup):
    # constant A = [[1,0],[0,0]]: V(1) is its matrix exponential
    sm, X = linear_setup
    sol = fundamental_solution(sm, X, [0.3], 1.0, CFG)
    assert np.allclose(sol.matrix, [[math.e, 0.0], [0.0, 1.0]], atol=1e-8)
    assert np.allclose(sol.integral_of_a, [[1.0, 0.0], [0.0, 0.0]], atol=1e-9)


def test_fundamental_zero_horizon(linear_setup):
    sm, X = linear_setup
    sol = fundamental_solution(sm, X, [0.3], 0.0, CFG)
    assert np.array_equal(sol.matrix, np.eye(2))


def test_fundamental_quadratic_closed_form(quadratic_setup):
    # V(t) = [[1, 2t + t^2 x], [0, 1 + t x]] along the backward flow of x^2 d/dx
    sm, X, box = quadratic_setup
    sol = fundamental_solution(sm, X, [0.5], 1.0, CFG, box)
    assert np.allclose(sol.matrix, [[1.0, 2.5], [0.0, 1.5]], atol=1e-9)


def test_fundamental_rows_reconstruct_pushforwards(quadratic_setup):
    sm, X, box = quadratic_setup
    gens = sm.generators
    for x in ([0.25], [0.5], [0.75]):
        sol = fundamental_solution(sm, X, x, 1.0, CFG, box)
        values = gens.value_matrix(x)
        for i, gen in enumerate(gens):
            direct = pushforward_direct(X, gen, x, 1.0, CFG, box)
            assert np.allclose(values @ sol.matrix[i], direct, atol=1e-8)


def test_cocycle_composition(quadratic_setup):
    # V(T; x) = V(T/2; backward-half point) @ V(T/2; x)
    sm, X, box = quadratic_setup
    x = [0.6]
    full = fundamental_solution(sm, X, x, 1.0, CFG, box)
    half = fundamental_solution(sm, X, x, 0.5, CFG, box)
    mid = flow(X, x, -0.5, CFG, box).endpoint
    shifted = fundamental_solution(sm, X, mid, 0.5, CFG, box)
    assert np.allclose(full.matrix, shifted.matrix @ half.matrix, atol=1e-8)


def test_determinant_positive(quadratic_setup):
    sm, X, box = quadratic_setup
    for x in ([0.25], [0.5], [0.75]):
        sol = fundamental_solution(sm, X, x, 1.0, CFG, box)
        assert np.linalg.det(sol.matrix) > 0
        assert np.isfinite(np.linalg.cond(sol.matrix))


# -- naive exponential -------------------------------------------------------


def test_naive_matches_fundamental_for_constant_a(linear_setup):
    sm, X = linear_setup
    fund, naive = solve_fundamental_and_naive(sm, X, [0.3], 1.0, CFG)
    assert np.allclose(naive.matrix, fund.matrix, atol=1e-8)
    assert naive.method == "naive_exponential"
    assert fund.method == "fundamental"


def test_naive_zero_horizon(linear_setup):
    sm, X = linear_setup
    sol = naive_exponential(sm, X, [0.3], 0.0, CFG)
    assert np.allclose(sol.matrix, np.eye(2), atol=1e-14)


def test_naive_quadratic_closed_form(quadratic_setup):
    # int_0^1 A has top-right 2 and bottom-right ln(1 + x); its exponential
    # has (1,2) entry 2x/ln(1+x), which differs from the fundamental 2 + x
    sm, X, box = quadratic_setup
    sol = naive_exponential(sm, X, [0.5], 1.0, CFG, box)
    beta = math.log(1.5)
    assert sol.integral_of_a[0, 1] == pytest.approx(2.0, abs=1e-9)
    assert sol.integral_of_a[1, 1] == pytest.approx(beta, abs=1e-9)
    assert np.allclose(
        sol.matrix, [[1.0, 1.0 / beta], [0.0, 1.5]], atol=1e-9
    )


def test_naive_gap_detected(quadratic_setup):
    sm, X, box = quadratic_setup
    fund, naive = solve_fundamental_and_naive(sm, X, [0.5], 1.0, CFG, box)
    gap = np.linalg.norm(naive.matrix - fund.matrix, "fro")
    assert gap >= 0.03
    assert fund.matrix[0, 1] - naive.matrix[0, 1] == pytest.approx(
        2.5 - 1.0 / math.log(1.5), abs=1e-6
    )


# -- commutativity defect ----------------------------------------------------


def test_defect_zero_for_constant_a(linear_setup):
    sm, X = linear_setup
    assert commutativity_defect(sm, X, [0.4], 1.0, cfg=CFG) <= 1e-12


def test_defect_quadratic_value(quadratic_setup):
    # [A(s), A(t)] has a single entry 2(a(t) - a(s)); the extremes s=0, t=1
    # give 2 (0.5 - 1/3) = 1/3
    sm, X, box = quadratic_setup
    defect = commutativity_defect(sm, X, [0.5], 1.0, cfg=CFG, box=box)
    assert defect == pytest.approx(1 / 3, abs=1e-8)


def test_defect_agreement_contract(linear_setup, quadratic_setup):
    sm, X = linear_setup
    fund, naive = solve_fundamental_and_naive(sm, X, [0.4], 1.0, CFG)
    defect = commutativity_defect(sm, X, [0.4], 1.0, cfg=CFG)
    assert defect <= 1e-10
    assert np.linalg.norm(naive.matrix - fund.matrix, "fro") <= 1e-6


def test_defect_validates_sample_count(linear_setup):
    sm, X = linear_setup
    with pytest.raises(ValueError):
        commutativity_defect(sm, X, [0.4], 1.0, sample_count=1, cfg=CFG)


# -- matrix exponential ------------------------------------------------------


def test_expm_closed_form():
    # exp([[0, c], [0, b]]) = [[1, c(e^b - 1)/b], [0, e^b]]
    c, b = 2.0, math.log(1.5)
    out = expm(np.array([[0.0, c], [0.0, b]]))
    assert np.allclose(out, [[1.0, c * 0.5 / b], [0.0, 1.5]], atol=1e-14)


def test_expm_identity_and_zero():
    assert np.allclose(expm(np.zeros((3, 3))), np.eye(3))


def test_expm_against_scipy():
    rng = np.random.default_rng(7)
    for scale in (0.1, 1.0, 10.0):
        for _ in range(5):
            m = scale * rng.standard_normal((4, 4))
            mine = expm(m)
            reference = scipy.linalg.expm(m)
            assert np.allclose(mine, reference, rtol=1e-12, atol=1e-12)


def test_expm_rejects_nonsquare():
    with pytest.raises(ValueError):
        expm(np.zeros((2, 3)))
