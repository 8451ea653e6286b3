"""Binary-field helpers: GF(2^m) tables, GF(2)[x] polynomials as ints, and
dense GF(2) matrix elimination."""

from __future__ import annotations

import numpy as np

# Primitive polynomials for GF(2^m), bit i = coefficient of x^i.
PRIMITIVE_POLY = {
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
}


def poly_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod(a: int, mod: int) -> int:
    dm = mod.bit_length()
    while a.bit_length() >= dm:
        a ^= mod << (a.bit_length() - dm)
    return a


class GF2m:
    """GF(2^m) with log/antilog tables over a primitive element alpha."""

    def __init__(self, m: int):
        if m not in PRIMITIVE_POLY:
            raise ValueError(f"unsupported field degree {m}")
        self.m = m
        self.size = 1 << m
        prim = PRIMITIVE_POLY[m]
        self.exp = np.zeros(2 * self.size, dtype=np.int64)
        self.log = np.zeros(self.size, dtype=np.int64)
        x = 1
        for i in range(self.size - 1):
            self.exp[i] = x
            self.log[x] = i
            x <<= 1
            if x & self.size:
                x ^= prim
        self.exp[self.size - 1: 2 * self.size - 2] = self.exp[: self.size - 1]

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def alpha_pow(self, i: int) -> int:
        return int(self.exp[i % (self.size - 1)])

    def cyclotomic_coset(self, i: int) -> tuple[int, ...]:
        n = self.size - 1
        coset = []
        j = i % n
        while j not in coset:
            coset.append(j)
            j = (j * 2) % n
        return tuple(sorted(coset))

    def minimal_polynomial(self, i: int) -> int:
        """Minimal polynomial of alpha^i over GF(2), as a bit-packed int."""
        # product of (x - alpha^j) over the coset, with GF(2^m) coefficient
        # arithmetic; the result has coefficients in {0, 1}.
        poly = [1]  # coefficients, ascending degree, in GF(2^m)
        for j in self.cyclotomic_coset(i):
            root = self.alpha_pow(j)
            nxt = [0] * (len(poly) + 1)
            for d, coef in enumerate(poly):
                nxt[d + 1] ^= coef
                nxt[d] ^= self.mul(coef, root)
            poly = nxt
        out = 0
        for d, coef in enumerate(poly):
            if coef not in (0, 1):
                raise AssertionError("minimal polynomial has non-binary coefficient")
            out |= coef << d
        return out


def poly_to_bits(poly: int, width: int) -> np.ndarray:
    return np.array([(poly >> i) & 1 for i in range(width)], dtype=np.uint8)


def gf2_rref(a: np.ndarray, col_order=None):
    """Reduced row echelon form over GF(2).

    Columns are considered in ``col_order`` (default: natural order).
    Returns (reduced matrix, pivot column indices in processing order).
    """
    r = np.array(a, dtype=np.uint8) & 1
    rows, cols = r.shape
    if col_order is None:
        col_order = range(cols)
    pivots = []
    rank = 0
    for col in col_order:
        if rank == rows:
            break
        sub = np.flatnonzero(r[rank:, col])
        if sub.size == 0:
            continue
        pr = rank + sub[0]
        if pr != rank:
            r[[rank, pr]] = r[[pr, rank]]
        hits = np.flatnonzero(r[:, col])
        hits = hits[hits != rank]
        r[hits] ^= r[rank]
        pivots.append(col)
        rank += 1
    return r, pivots


def gf2_rank(a: np.ndarray) -> int:
    return len(gf2_rref(a)[1])


def gf2_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.uint32) @ b.astype(np.uint32) & 1).astype(np.uint8)


def gf2_nullspace(a: np.ndarray) -> np.ndarray:
    """Basis of the right nullspace of ``a`` over GF(2), shape (dim, cols)."""
    r, pivots = gf2_rref(a)
    cols = a.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for bi, fc in enumerate(free):
        basis[bi, fc] = 1
        for row, pc in enumerate(pivots):
            if r[row, fc]:
                basis[bi, pc] = 1
    return basis
