"""Exact polynomial calculus for vector fields on a box chart.

Polynomials carry `fractions.Fraction` coefficients, so every symbolic
operation here (arithmetic, differentiation, Lie brackets) is exact.
Floating point enters only at `evaluate`, which is where the numerical
flow machinery takes over.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch


def grlex_key(exponents):
    """Graded-lex sort key: total degree first, then the exponent tuple."""
    return (sum(exponents), exponents)


def default_variable_names(dimension):
    """x, y, z on low-dimensional charts, x1..xn otherwise."""
    if dimension <= 3:
        return tuple("xyz"[:dimension])
    return tuple(f"x{k + 1}" for k in range(dimension))


class Polynomial:
    """Multivariate polynomial with exact rational coefficients.

    ``terms`` maps exponent tuples (one non-negative integer per variable)
    to nonzero Fractions.  The zero polynomial stores no terms; its total
    degree is reported as -1 and ``is_zero`` is the authoritative flag.
    """

    __slots__ = ("dimension", "terms", "_hash")

    def __init__(self, dimension: int, terms: Mapping | None = None):
        dimension = int(dimension)
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        clean = {}
        if terms:
            for exps, coeff in terms.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != dimension:
                    raise DimensionMismatch(
                        f"exponent tuple {exps} does not have {dimension} entries"
                    )
                if min(exps) < 0:
                    raise ValueError(f"negative exponent in {exps}")
                coeff = Fraction(coeff)
                if coeff:
                    clean[exps] = coeff
        self.dimension = dimension
        self.terms = clean
        self._hash = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, dimension):
        return cls(dimension)

    @classmethod
    def constant(cls, dimension, value):
        return cls(dimension, {(0,) * dimension: Fraction(value)})

    @classmethod
    def variable(cls, dimension, index):
        if not 0 <= index < dimension:
            raise ValueError(f"variable index {index} out of range for dimension {dimension}")
        exps = [0] * dimension
        exps[index] = 1
        return cls(dimension, {tuple(exps): Fraction(1)})

    @classmethod
    def monomial(cls, dimension, exponents, coefficient=1):
        return cls(dimension, {tuple(exponents): Fraction(coefficient)})

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self):
        return not self.terms

    @property
    def total_degree(self):
        """Max term degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def sorted_terms(self):
        """Terms in descending graded-lex order (canonical form)."""
        return sorted(self.terms.items(), key=lambda item: grlex_key(item[0]), reverse=True)

    def coefficient(self, exponents):
        return self.terms.get(tuple(exponents), Fraction(0))

    # -- arithmetic --------------------------------------------------------

    def _check_same_chart(self, other):
        if self.dimension != other.dimension:
            raise DimensionMismatch(
                f"polynomials on charts of dimension {self.dimension} and {other.dimension}"
            )

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.dimension, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_same_chart(other)
        out = dict(self.terms)
        for exps, coeff in other.terms.items():
            total = out.get(exps, Fraction(0)) + coeff
            if total:
                out[exps] = total
            else:
                out.pop(exps, None)
        return Polynomial(self.dimension, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.dimension, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Polynomial) else -Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            if not other:
                return Polynomial.zero(self.dimension)
            return Polynomial(self.dimension, {e: c * other for e, c in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_same_chart(other)
        out = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                exps = tuple(a + b for a, b in zip(ea, eb))
                total = out.get(exps, Fraction(0)) + ca * cb
                if total:
                    out[exps] = total
                else:
                    out.pop(exps, None)
        return Polynomial(self.dimension, out)

    __rmul__ = __mul__

    def __pow__(self, power):
        power = int(power)
        if power < 0:
            raise ValueError("negative powers are not polynomials")
        result = Polynomial.constant(self.dimension, 1)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base if power > 1 else base
            power >>= 1
        return result

    # -- calculus ----------------------------------------------------------

    def derivative(self, index):
        """Exact partial derivative with respect to variable ``index``."""
        if not 0 <= index < self.dimension:
            raise ValueError(f"variable index {index} out of range")
        out = {}
        for exps, coeff in self.terms.items():
            e = exps[index]
            if e:
                lowered = list(exps)
                lowered[index] = e - 1
                out[tuple(lowered)] = coeff * e
        return Polynomial(self.dimension, out)

    def evaluate(self, point) -> float:
        """Floating-point value at ``point`` (length must match the chart)."""
        if len(point) != self.dimension:
            raise DimensionMismatch(
                f"point of length {len(point)} on a chart of dimension {self.dimension}"
            )
        total = 0.0
        for exps, coeff in self.terms.items():
            term = float(coeff)
            for x, e in zip(point, exps):
                for _ in range(e):
                    term *= x
            total += term
        return total

    def evaluate_exact(self, point) -> Fraction:
        """Exact rational value at a point with Fraction/int coordinates."""
        if len(point) != self.dimension:
            raise DimensionMismatch(
                f"point of length {len(point)} on a chart of dimension {self.dimension}"
            )
        total = Fraction(0)
        for exps, coeff in self.terms.items():
            term = coeff
            for x, e in zip(point, exps):
                if e:
                    term *= Fraction(x) ** e
            total += term
        return total

    # -- canonical text ----------------------------------------------------

    def text(self, names=None):
        """Canonical string, terms in descending graded-lex order."""
        if self.is_zero:
            return "0"
        names = tuple(names) if names else default_variable_names(self.dimension)
        pieces = []
        for exps, coeff in self.sorted_terms():
            factors = []
            for name, e in zip(names, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            magnitude = abs(coeff)
            if factors and magnitude == 1:
                body = "*".join(factors)
            elif factors:
                body = "*".join([str(magnitude)] + factors)
            else:
                body = str(magnitude)
            pieces.append(("-" if coeff < 0 else "+", body))
        sign, body = pieces[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    # -- protocol ----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.dimension == other.dimension and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dimension, frozenset(self.terms.items())))
        return self._hash

    def __str__(self):
        return self.text()

    def __repr__(self):
        return f"Polynomial({self.dimension}, {self.text()!r})"


class PolyVectorField:
    """Vector field with polynomial components; component k multiplies d/dx_k."""

    __slots__ = ("dimension", "components", "_hash")

    def __init__(self, components: Sequence[Polynomial]):
        components = tuple(components)
        if not components:
            raise ValueError("a vector field needs at least one component")
        dimension = components[0].dimension
        if len(components) != dimension:
            raise DimensionMismatch(
                f"{len(components)} components for a chart of dimension {dimension}"
            )
        for comp in components:
            if comp.dimension != dimension:
                raise DimensionMismatch("components live on charts of different dimensions")
        self.dimension = dimension
        self.components = components
        self._hash = None

    @classmethod
    def zero(cls, dimension):
        return cls([Polynomial.zero(dimension)] * dimension)

    @classmethod
    def basis(cls, dimension, index):
        """The coordinate field d/dx_index."""
        comps = [Polynomial.zero(dimension)] * dimension
        comps[index] = Polynomial.constant(dimension, 1)
        return cls(comps)

    @property
    def is_zero(self):
        return all(c.is_zero for c in self.components)

    @property
    def max_degree(self):
        """Max component degree; -1 for the zero field."""
        return max(c.total_degree for c in self.components)

    def _check_same_chart(self, other):
        if self.dimension != other.dimension:
            raise DimensionMismatch(
                f"fields on charts of dimension {self.dimension} and {other.dimension}"
            )

    def __add__(self, other):
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        self._check_same_chart(other)
        return PolyVectorField([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return PolyVectorField([-c for c in self.components])

    def __mul__(self, factor):
        if not isinstance(factor, (Polynomial, int, Fraction)):
            return NotImplemented
        return PolyVectorField([c * factor for c in self.components])

    __rmul__ = __mul__

    def evaluate(self, point) -> np.ndarray:
        """Numeric tangent vector at ``point``."""
        return np.array([c.evaluate(point) for c in self.components], dtype=float)

    def apply_to(self, f: Polynomial) -> Polynomial:
        """Directional derivative X(f) = sum_m X_m df/dx_m, exactly."""
        if f.dimension != self.dimension:
            raise DimensionMismatch("function and field on different charts")
        out = Polynomial.zero(self.dimension)
        for m, comp in enumerate(self.components):
            if not comp.is_zero:
                out = out + comp * f.derivative(m)
        return out

    def jacobian(self):
        """Exact Jacobian: J[k][m] = d(component k)/dx_m."""
        return tuple(
            tuple(comp.derivative(m) for m in range(self.dimension))
            for comp in self.components
        )

    def text(self, names=None):
        if self.is_zero:
            return "0"
        names = tuple(names) if names else default_variable_names(self.dimension)
        parts = []
        for comp, name in zip(self.components, names):
            if comp.is_zero:
                continue
            body = comp.text(names)
            if body in ("1", "-1"):
                parts.append(("-" if body == "-1" else "+", f"d{name}"))
            elif " " in body or body.startswith("-"):
                parts.append(("+", f"({body})*d{name}"))
            else:
                parts.append(("+", f"{body}*d{name}"))
        sign, body = parts[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __eq__(self, other):
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.components)
        return self._hash

    def __str__(self):
        return self.text()

    def __repr__(self):
        return f"PolyVectorField({self.text()!r})"


@dataclass(frozen=True)
class ChartBox:
    """Axis-aligned closed box: the chart domain all trajectories must stay in."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) != len(upper) or not lower:
            raise ValueError("lower/upper must be nonempty and of equal length")
        for lo, hi in zip(lower, upper):
            if not lo < hi:
                raise ValueError(f"degenerate interval [{lo}, {hi}]")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def from_intervals(cls, intervals):
        intervals = list(intervals)
        return cls(tuple(i[0] for i in intervals), tuple(i[1] for i in intervals))

    @property
    def dimension(self):
        return len(self.lower)

    def contains(self, point) -> bool:
        if len(point) != self.dimension:
            raise DimensionMismatch(
                f"point of length {len(point)} in a box of dimension {self.dimension}"
            )
        return all(lo <= x <= hi for x, lo, hi in zip(point, self.lower, self.upper))


def lie_bracket(X: PolyVectorField, Y: PolyVectorField) -> PolyVectorField:
    """Commutator [X, Y], exactly.

    Component k is sum_m (X_m dY_k/dx_m - Y_m dX_k/dx_m).
    """
    X._check_same_chart(Y)
    n = X.dimension
    comps = []
    for k in range(n):
        acc = Polynomial.zero(n)
        for m in range(n):
            xm = X.components[m]
            ym = Y.components[m]
            if not xm.is_zero:
                acc = acc + xm * Y.components[k].derivative(m)
            if not ym.is_zero:
                acc = acc - ym * X.components[k].derivative(m)
        comps.append(acc)
    return PolyVectorField(comps)


def leibniz_expand(f: Polynomial, X: PolyVectorField, Y: PolyVectorField):
    """Split [Y, f*X] into its Leibniz parts (Y(f)*X, f*[Y, X]).

    The componentwise sum of the returned fields equals lie_bracket(Y, f*X)
    exactly.
    """
    X._check_same_chart(Y)
    if f.dimension != X.dimension:
        raise DimensionMismatch("function and fields on different charts")
    return Y.apply_to(f) * X, f * lie_bracket(Y, X)
