"""Narrow-sense binary BCH code construction.

The generator polynomial is the lcm of the minimal polynomials of
alpha, alpha^2, ..., alpha^(2t); the dimension pins down t.  The
systematic generator matrix is obtained by row-reducing the cyclic
shifts of the generator polynomial.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import UnsupportedCodeError
from .gf2 import GF2m, gf2_rref, poly_mul, poly_to_bits

SUPPORTED_LENGTHS = {15: 4, 31: 5, 63: 6, 127: 7}


def bch_generator_poly(n: int, k: int) -> tuple[int, int]:
    """Generator polynomial (bit-packed) and designed distance for the
    narrow-sense BCH code of length n and dimension k."""
    if n not in SUPPORTED_LENGTHS:
        raise UnsupportedCodeError(f"unsupported BCH length {n}")
    field = GF2m(SUPPORTED_LENGTHS[n])
    target_degree = n - k
    g = 1
    covered: set[int] = set()
    for i in range(1, n):
        if i not in covered:
            covered.update(field.cyclotomic_coset(i))
            g = poly_mul(g, field.minimal_polynomial(i))
        degree = g.bit_length() - 1
        if degree == target_degree:
            run = 1
            while run in covered:
                run += 1
            return g, run  # alpha^1..alpha^(run-1) are roots
        if degree > target_degree:
            break
    raise UnsupportedCodeError(f"no narrow-sense BCH({n},{k}) exists")


def bch_generator_matrix(n: int, k: int) -> tuple[np.ndarray, int]:
    """Systematic (I_k | P) generator matrix and designed distance."""
    g, dist = bch_generator_poly(n, k)
    deg = n - k
    rows = np.zeros((k, n), dtype=np.uint8)
    gbits = poly_to_bits(g, deg + 1)
    for i in range(k):
        rows[i, i:i + deg + 1] = gbits
    reduced, pivots = gf2_rref(rows)
    if pivots != list(range(k)):
        raise AssertionError("cyclic shifts failed to reduce to systematic form")
    return reduced, dist
