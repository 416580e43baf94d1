from fractions import Fraction

import pytest

from lieflow import (
    GeneratorSet,
    Polynomial,
    StructureNotFound,
    default_degree_bound,
    involutivity_check,
    lie_bracket,
    parse_polynomial,
    parse_vector_field,
    polynomial_membership,
    solve_structure_matrix,
)


def field(text, dim=1):
    return parse_vector_field(text, dim)


def poly(text, dim=1):
    return parse_polynomial(text, dim)


@pytest.fixture
def line_gens():
    # d/dx and x d/dx on the line
    return GeneratorSet((field("dx"), field("x*dx")))


@pytest.fixture
def rotation_gens():
    return GeneratorSet(
        (field("x*dx", 2), field("x*dy", 2), field("y*dx", 2), field("y*dy", 2))
    )


# -- membership --------------------------------------------------------------


def test_membership_quadratic(line_gens):
    # x^2 dx = x * (x dx), found at bound 1
    cert = polynomial_membership(field("x^2*dx"), line_gens, 1)
    assert cert is not None
    assert cert.coefficients[0].is_zero
    assert cert.coefficients[1] == poly("x")
    assert cert.combine(line_gens) == field("x^2*dx")


def test_membership_generator_is_member(line_gens):
    cert = polynomial_membership(field("dx"), line_gens, 0)
    assert cert.coefficients == (Polynomial.constant(1, 1), Polynomial.zero(1))


def test_membership_not_found_independent_direction():
    gens = GeneratorSet((field("dx", 2),))
    assert polynomial_membership(field("dy", 2), gens, 3) is None


def test_membership_monotone_in_bound(line_gens):
    target = field("x^2*dx")
    low = polynomial_membership(target, line_gens, 1)
    assert low is not None
    for bound in (2, 3, 4):
        cert = polynomial_membership(target, line_gens, bound)
        assert cert is not None
        assert cert.combine(line_gens) == target
    # the low-bound certificate remains valid at any higher bound
    assert low.combine(line_gens) == target


def test_membership_deterministic(line_gens):
    a = polynomial_membership(field("x^2*dx"), line_gens, 3)
    b = polynomial_membership(field("x^2*dx"), line_gens, 3)
    assert a.coefficients == b.coefficients


def test_membership_validates_inputs(line_gens):
    with pytest.raises(ValueError):
        polynomial_membership(field("x*dx"), line_gens, -1)


def test_zero_field_membership(line_gens):
    cert = polynomial_membership(field("x*dx") - field("x*dx"), line_gens, 0)
    assert all(c.is_zero for c in cert.coefficients)


# -- involutivity ------------------------------------------------------------


def test_involutivity_rotation_module(rotation_gens):
    table = involutivity_check(rotation_gens, 0)
    assert table.certified
    upper = [
        table.entries[i][j] for i in range(4) for j in range(4) if i < j
    ]
    assert len(upper) == 6
    # [x dx, x dy] = x dy: coefficients (0, 1, 0, 0)
    cert = table.entries[0][1]
    assert [c.text() for c in cert.coefficients] == ["0", "1", "0", "0"]
    # mirrored pair carries the negated certificate
    assert table.entries[1][0].coefficients[1] == Polynomial.constant(2, -1)


def test_involutivity_single_generator():
    table = involutivity_check(GeneratorSet((field("dx"),)), 0)
    assert table.certified


def test_involutivity_line_module(line_gens):
    table = involutivity_check(line_gens, 0)
    assert table.certified
    # [dx, x dx] = dx = 1 * Y1
    assert table.entries[0][1].coefficients[0] == Polynomial.constant(1, 1)


def test_involutivity_failure_is_reported():
    gens = GeneratorSet((field("dx", 2), field("x^2*dy", 2)))
    table = involutivity_check(gens, 0)
    assert not table.certified
    assert (1, 2) in table.failures()


# -- structure matrix --------------------------------------------------------


def test_structure_matrix_linear(line_gens):
    sm = solve_structure_matrix(field("x*dx"), line_gens, 2)
    assert [[p.text() for p in row] for row in sm.entries] == [["1", "0"], ["0", "0"]]


def test_structure_matrix_quadratic(line_gens):
    # [dx, x^2 dx] = 2x dx = 2*Y2 and [x dx, x^2 dx] = x^2 dx = x*Y2
    sm = solve_structure_matrix(field("x^2*dx"), line_gens, 1)
    assert [[p.text() for p in row] for row in sm.entries] == [["0", "2"], ["0", "x"]]


def test_structure_matrix_zero_field(line_gens):
    sm = solve_structure_matrix(field("x*dx") - field("x*dx"), line_gens, 0)
    assert all(p.is_zero for row in sm.entries for p in row)


def test_structure_matrix_rotation(rotation_gens):
    sm = solve_structure_matrix(field("x*dy - y*dx", 2), rotation_gens, 2)
    texts = [[p.text() for p in row] for row in sm.entries]
    assert texts[0] == ["0", "1", "1", "0"]
    assert texts == [
        ["0", "1", "1", "0"],
        ["-1", "0", "0", "1"],
        ["-1", "0", "0", "1"],
        ["0", "-1", "-1", "0"],
    ]


def test_structure_matrix_rows_re_expand(rotation_gens):
    X = field("x*dy - y*dx", 2)
    sm = solve_structure_matrix(X, rotation_gens, 2)
    for i, gen in enumerate(rotation_gens):
        assert sm.row_certificate(i).combine(rotation_gens) == lie_bracket(gen, X)


def test_structure_matrix_not_found_reports_row():
    gens = GeneratorSet((field("dx", 2), field("x^2*dy", 2)))
    with pytest.raises(StructureNotFound) as info:
        solve_structure_matrix(field("dx", 2), gens, 0)
    assert info.value.row == 2
    assert "degree <= 0" in str(info.value)


def test_default_degree_bound(line_gens):
    assert default_degree_bound(field("x^2*dx"), line_gens) == 2 + 1 + 2
