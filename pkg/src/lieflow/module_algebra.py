"""Finitely generated modules of polynomial vector fields.

Membership of a field in the module generated by Y^1..Y^N is searched over
polynomial coefficients of bounded total degree.  Monomial matching turns
the question into one exact linear system over the rationals, solved by
Gaussian elimination with a canonical column order (monomials in ascending
graded-lex order, generator index as tie-break, free variables set to
zero).  That pivot rule is what makes certificates deterministic and keeps
them supported on the lowest-degree coefficient monomials available.

A returned certificate always re-expands exactly to the queried field;
``None`` means only "no certificate with coefficients of degree <= bound",
never a proof of non-membership.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, StructureNotFound
from .polyfield import Polynomial, PolyVectorField, grlex_key, lie_bracket


@dataclass(frozen=True)
class GeneratorSet:
    """Ordered family Y^1..Y^N generating a module; order is part of identity."""

    generators: tuple

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ValueError("a generator set needs at least one field")
        dim = gens[0].dimension
        for g in gens:
            if g.dimension != dim:
                raise DimensionMismatch("generators on charts of different dimensions")
        object.__setattr__(self, "generators", gens)

    @property
    def dimension(self):
        return self.generators[0].dimension

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, index):
        return self.generators[index]

    @property
    def max_degree(self):
        return max(g.max_degree for g in self.generators)

    def value_matrix(self, point) -> np.ndarray:
        """n x N matrix whose column j is Y^(j+1) evaluated at ``point``."""
        return np.column_stack([g.evaluate(point) for g in self.generators])


@dataclass(frozen=True)
class MembershipCertificate:
    """Coefficients f_1..f_N with sum_j f_j * Y^j equal to the queried field."""

    coefficients: tuple
    degree_bound: int

    def combine(self, gens: GeneratorSet) -> PolyVectorField:
        out = PolyVectorField.zero(gens.dimension)
        for f, g in zip(self.coefficients, gens):
            if not f.is_zero:
                out = out + f * g
        return out

    def negated(self):
        return MembershipCertificate(
            tuple(-f for f in self.coefficients), self.degree_bound
        )


def monomials_up_to(dimension, degree):
    """All exponent tuples of total degree <= degree, ascending graded-lex."""
    exps = [
        e
        for e in product(range(degree + 1), repeat=dimension)
        if sum(e) <= degree
    ]
    exps.sort(key=grlex_key)
    return exps


def _solve_exact(rows, rhs, ncols):
    """Solve an exact rational system by elimination, free variables zero.

    ``rows`` is a list of dense Fraction lists (length ncols).  Returns the
    particular solution with all non-pivot variables equal to zero, or None
    if the system is inconsistent.  Scanning columns left to right makes the
    result deterministic for a fixed column order.
    """
    matrix = [list(row) + [r] for row, r in zip(rows, rhs)]
    nrows = len(matrix)
    pivot_of_col = {}
    rank = 0
    for col in range(ncols):
        pivot_row = None
        for i in range(rank, nrows):
            if matrix[i][col]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        matrix[rank], matrix[pivot_row] = matrix[pivot_row], matrix[rank]
        pivot = matrix[rank][col]
        if pivot != 1:
            matrix[rank] = [v / pivot for v in matrix[rank]]
        for i in range(nrows):
            if i != rank and matrix[i][col]:
                factor = matrix[i][col]
                matrix[i] = [a - factor * b for a, b in zip(matrix[i], matrix[rank])]
        pivot_of_col[col] = rank
        rank += 1
    for i in range(rank, nrows):
        if matrix[i][ncols]:
            return None
    solution = [Fraction(0)] * ncols
    for col, row in pivot_of_col.items():
        solution[col] = matrix[row][ncols]
    return solution


def polynomial_membership(
    Z: PolyVectorField, gens: GeneratorSet, degree_bound: int
) -> Optional[MembershipCertificate]:
    """Search for f_1..f_N of total degree <= degree_bound with sum f_j Y^j = Z.

    Returns None when no such certificate exists at this bound; that is
    inconclusive about membership with higher-degree coefficients.
    """
    if Z.dimension != gens.dimension:
        raise DimensionMismatch("field and generators on different charts")
    degree_bound = int(degree_bound)
    if degree_bound < 0:
        raise ValueError("degree_bound must be >= 0")

    n = gens.dimension
    N = len(gens)
    monos = monomials_up_to(n, degree_bound)
    mono_index = {m: i for i, m in enumerate(monos)}
    ncols = N * len(monos)

    def col(mono_i, gen_j):
        # monomial-major, generator-minor: the canonical column order
        return mono_i * N + gen_j

    # Collect equations keyed by (component, result monomial).
    equations = {}

    def equation(key):
        row = equations.get(key)
        if row is None:
            row = [Fraction(0)] * ncols
            equations[key] = row
        return row

    for j, gen in enumerate(gens):
        for k, comp in enumerate(gen.components):
            for gexps, gcoeff in comp.terms.items():
                for mi, mexps in enumerate(monos):
                    target = tuple(a + b for a, b in zip(gexps, mexps))
                    equation((k, target))[col(mi, j)] += gcoeff
    rhs_map = {}
    for k, comp in enumerate(Z.components):
        for exps, coeff in comp.terms.items():
            rhs_map[(k, exps)] = coeff
            equation((k, exps))
    keys = sorted(equations, key=lambda key: (key[0], grlex_key(key[1])))
    rows = [equations[key] for key in keys]
    rhs = [rhs_map.get(key, Fraction(0)) for key in keys]

    solution = _solve_exact(rows, rhs, ncols)
    if solution is None:
        return None
    coeff_polys = []
    for j in range(N):
        terms = {}
        for mi, mexps in enumerate(monos):
            value = solution[col(mi, j)]
            if value:
                terms[mexps] = value
        coeff_polys.append(Polynomial(n, terms))
    certificate = MembershipCertificate(tuple(coeff_polys), degree_bound)
    # Soundness is checked on every call in debug mode: certificates must
    # re-expand exactly.
    assert certificate.combine(gens) == Z
    return certificate


@dataclass(frozen=True)
class InvolutivityTable:
    """Per-ordered-pair membership results for [Y^i, Y^j]."""

    entries: tuple  # N x N of Optional[MembershipCertificate]
    degree_bound: int

    @property
    def certified(self) -> bool:
        return all(cell is not None for row in self.entries for cell in row)

    def failures(self):
        """1-based (i, j) pairs with no certificate at the bound."""
        return [
            (i + 1, j + 1)
            for i, row in enumerate(self.entries)
            for j, cell in enumerate(row)
            if cell is None
        ]


def involutivity_check(gens: GeneratorSet, degree_bound: int) -> InvolutivityTable:
    """Attempt membership of every pairwise bracket in the generated module.

    Only pairs i < j are solved; [Y^i, Y^i] = 0 is certified trivially and
    the lower triangle mirrors the upper one with negated coefficients.
    """
    N = len(gens)
    zero_cert = MembershipCertificate(
        tuple(Polynomial.zero(gens.dimension) for _ in range(N)), int(degree_bound)
    )
    table = [[None] * N for _ in range(N)]
    for i in range(N):
        table[i][i] = zero_cert
    for i in range(N):
        for j in range(i + 1, N):
            cert = polynomial_membership(
                lie_bracket(gens[i], gens[j]), gens, degree_bound
            )
            table[i][j] = cert
            table[j][i] = cert.negated() if cert is not None else None
    return InvolutivityTable(tuple(tuple(row) for row in table), int(degree_bound))


@dataclass(frozen=True)
class StructureMatrix:
    """N x N polynomial matrix expressing [Y^i, X] = sum_j entries[i][j] * Y^j."""

    entries: tuple  # N x N of Polynomial
    generators: GeneratorSet
    field: PolyVectorField
    degree_bound: int

    @property
    def size(self):
        return len(self.entries)

    def value_at(self, point) -> np.ndarray:
        """Numeric N x N matrix of the entries evaluated at ``point``."""
        N = self.size
        out = np.empty((N, N), dtype=float)
        for i in range(N):
            for j in range(N):
                out[i, j] = self.entries[i][j].evaluate(point)
        return out

    def row_certificate(self, i) -> MembershipCertificate:
        return MembershipCertificate(self.entries[i], self.degree_bound)


def solve_structure_matrix(
    X: PolyVectorField, gens: GeneratorSet, degree_bound: int
) -> StructureMatrix:
    """Certify each bracket [Y^i, X] in the module; row i holds its coefficients.

    Raises StructureNotFound with the first failing (1-based) row.  The
    caller is responsible for X itself being certified in the module.
    """
    if X.dimension != gens.dimension:
        raise DimensionMismatch("field and generators on different charts")
    rows = []
    for i, gen in enumerate(gens):
        cert = polynomial_membership(lie_bracket(gen, X), gens, degree_bound)
        if cert is None:
            raise StructureNotFound(i + 1, degree_bound)
        rows.append(cert.coefficients)
    return StructureMatrix(tuple(rows), gens, X, int(degree_bound))


def default_degree_bound(Z: PolyVectorField, gens: GeneratorSet) -> int:
    """deg(Z) + max generator degree + 2, floored at zero for zero fields."""
    return max(Z.max_degree, 0) + max(gens.max_degree, 0) + 2
