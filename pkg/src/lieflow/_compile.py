"""Pack exact polynomials into the flat float arrays the kernels consume.

Rational coefficients are rounded to the nearest double here; this is the
single boundary where symbolic data becomes numeric.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .polyfield import grlex_key


@dataclass(frozen=True)
class PolySet:
    """A batch of polynomials in shared flat storage.

    ``offsets[i]:offsets[i+1]`` slices the terms of polynomial i; each term
    is an exponent row in ``exps`` and a coefficient in ``coefs``.  Zero
    polynomials are padded with one zero-coefficient term so the offsets
    stay strictly increasing (np.add.reduceat needs that).
    """

    n_vars: int
    count: int
    offsets: np.ndarray
    exps: np.ndarray
    coefs: np.ndarray


def pack_polys(polys, n_vars) -> PolySet:
    polys = list(polys)
    offsets = [0]
    all_exps = []
    all_coefs = []
    for poly in polys:
        terms = sorted(poly.terms.items(), key=lambda item: grlex_key(item[0]))
        if not terms:
            terms = [((0,) * n_vars, 0)]
        for exps, coeff in terms:
            all_exps.append(exps)
            all_coefs.append(float(coeff))
        offsets.append(len(all_coefs))
    exps = np.array(all_exps, dtype=np.int64).reshape(len(all_coefs), n_vars)
    coefs = np.array(all_coefs, dtype=np.float64)
    offs = np.array(offsets, dtype=np.int64)
    for arr in (exps, coefs, offs):
        arr.setflags(write=False)
    return PolySet(n_vars, len(polys), offs, exps, coefs)


@lru_cache(maxsize=None)
def field_polyset(vf) -> PolySet:
    """Components of a vector field, packed."""
    return pack_polys(vf.components, vf.dimension)


@lru_cache(maxsize=None)
def jacobian_polyset(vf) -> PolySet:
    """The exact symbolic Jacobian of a field, packed row-major."""
    return pack_polys([p for row in vf.jacobian() for p in row], vf.dimension)


@lru_cache(maxsize=None)
def matrix_polyset(entries, n_vars) -> PolySet:
    """A (tuple-of-tuples) polynomial matrix, packed row-major."""
    return pack_polys([p for row in entries for p in row], n_vars)
