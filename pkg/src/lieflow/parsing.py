"""Text syntax for polynomials and vector fields.

A polynomial is a sum of terms ``c * x1^a1 * ... * xn^an`` with rational
coefficients written as ``p/q`` or as decimal literals (converted exactly).
Variables are named ``x1..xn``; on charts of dimension <= 3 the aliases
``x, y, z`` also work, and scenario files may rename them.  A vector-field
expression uses the same term syntax with exactly one derivative symbol
``d<var>`` per term, e.g. ``x*dy - y*dx``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError
from .polyfield import Polynomial, PolyVectorField, default_variable_names

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[+\-*/^()])"
    r")"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None or match.end() == match.start():
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {text[bad_at]!r}", bad_at)
        kind = match.lastgroup
        if kind is not None:
            tokens.append((kind, match.group(kind), match.start(kind)))
        pos = match.end()
    return tokens


def variable_table(dimension, names=None):
    """Map accepted variable spellings to their axis index.

    ``x1..xn`` always work; ``names`` (default x/y/z for n <= 3) adds aliases.
    """
    table = {f"x{k + 1}": k for k in range(dimension)}
    names = tuple(names) if names else default_variable_names(dimension)
    if len(names) != dimension:
        raise ValueError(f"{len(names)} variable names for dimension {dimension}")
    for k, name in enumerate(names):
        clash = table.get(name)
        if clash is not None and clash != k:
            raise ValueError(f"variable name {name!r} collides with builtin x{clash + 1}")
        table[name] = k
    return table


class _Parser:
    """Recursive-descent parser over the token list; grammar is sums of
    products of numbers and (possibly powered) names."""

    def __init__(self, text, dimension, var_table):
        self.text = text
        self.dimension = dimension
        self.vars = var_table
        self.derivs = {f"d{name}": k for name, k in var_table.items()}
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self):
        if self.index < len(self.tokens):
            return self.tokens[self.index]
        return (None, None, len(self.text))

    def take(self):
        token = self.peek()
        self.index += 1
        return token

    def expect_end(self):
        kind, value, pos = self.peek()
        if kind is not None:
            raise ParseError(f"unexpected {value!r}", pos)

    def parse_terms(self):
        """Yield (coefficient Polynomial, derivative index or None) per term."""
        terms = []
        sign = Fraction(1)
        kind, value, pos = self.peek()
        if kind == "op" and value in "+-":
            self.take()
            if value == "-":
                sign = -sign
        if self.peek()[0] is None:
            raise ParseError("empty expression", 0)
        while True:
            poly, deriv = self.parse_product(sign)
            terms.append((poly, deriv))
            kind, value, pos = self.peek()
            if kind is None:
                break
            if kind != "op" or value not in "+-":
                raise ParseError(f"expected '+' or '-' before {value!r}", pos)
            self.take()
            sign = Fraction(1) if value == "+" else Fraction(-1)
        return terms

    def parse_product(self, sign):
        coeff = Polynomial.constant(self.dimension, sign)
        deriv = None
        while True:
            factor_poly, factor_deriv, pos = self.parse_factor()
            if factor_deriv is not None:
                if deriv is not None:
                    raise ParseError("more than one derivative symbol in a term", pos)
                deriv = factor_deriv
            else:
                coeff = coeff * factor_poly
            kind, value, pos = self.peek()
            if kind == "op" and value == "*":
                self.take()
                continue
            return coeff, deriv

    def parse_factor(self):
        kind, value, pos = self.take()
        if kind == "number":
            number = Fraction(value)
            nxt_kind, nxt_value, _ = self.peek()
            if nxt_kind == "op" and nxt_value == "/":
                self.take()
                dkind, dvalue, dpos = self.take()
                if dkind != "number" or not dvalue.isdigit():
                    raise ParseError("expected an integer denominator", dpos)
                number = number / Fraction(dvalue)
            return Polynomial.constant(self.dimension, number), None, pos
        if kind == "name":
            if value in self.derivs:
                return None, self.derivs[value], pos
            if value in self.vars:
                power = self.parse_power()
                return (
                    Polynomial.variable(self.dimension, self.vars[value]) ** power,
                    None,
                    pos,
                )
            raise ParseError(f"unknown name {value!r}", pos)
        raise ParseError(f"expected a number or a name, got {value!r}" if value else "unexpected end of expression", pos)

    def parse_power(self):
        kind, value, pos = self.peek()
        if kind == "op" and value == "^":
            self.take()
            ekind, evalue, epos = self.take()
            if ekind != "number" or not evalue.isdigit():
                raise ParseError("expected a non-negative integer exponent", epos)
            return int(evalue)
        return 1


def parse_polynomial(text, dimension, names=None) -> Polynomial:
    """Parse a scalar polynomial expression."""
    parser = _Parser(text, dimension, variable_table(dimension, names))
    terms = parser.parse_terms()
    parser.expect_end()
    out = Polynomial.zero(dimension)
    for poly, deriv in terms:
        if deriv is not None:
            raise ParseError(f"derivative symbol not allowed in a scalar expression: {text!r}")
        out = out + poly
    return out


def parse_vector_field(text, dimension, names=None) -> PolyVectorField:
    """Parse a vector-field expression; every term needs one d<var> factor."""
    parser = _Parser(text, dimension, variable_table(dimension, names))
    terms = parser.parse_terms()
    parser.expect_end()
    comps = [Polynomial.zero(dimension) for _ in range(dimension)]
    for poly, deriv in terms:
        if deriv is None:
            raise ParseError(f"term without a derivative symbol in {text!r}")
        comps[deriv] = comps[deriv] + poly
    return PolyVectorField(comps)
