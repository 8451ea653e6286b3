"""Ordered-statistics decoding of linear block codes.

The generator matrix is re-pivoted onto the k most reliable independent
positions, the hard decision there is re-encoded, and all error patterns
up to the requested order are scored by soft correlation with the input
LLRs.  For orders <= 3 the scores of every pattern are obtained from
correlation tensors in the +/-1 domain (one matrix product per order)
instead of materialising the candidate codewords; the maximiser is
identical to explicit re-encoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from ..errors import InvalidConfigurationError
from .gf2 import gf2_rref


_MASK_CACHE: dict[int, np.ndarray] = {}


def _repeated_index_mask(k: int) -> np.ndarray:
    if k not in _MASK_CACHE:
        a, b, c = np.ogrid[:k, :k, :k]
        _MASK_CACHE[k] = (a == b) | (b == c) | (a == c)
    return _MASK_CACHE[k]


@dataclass(frozen=True)
class OsdResult:
    message: np.ndarray
    codeword: np.ndarray
    correlation: float
    patterns_tested: int
    order: int


def osd_decode(precode, llr, order: int | None = None) -> OsdResult:
    """Order-ell OSD; ``order=None`` uses the precode's default order."""
    g = precode.generator
    k, n = g.shape
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape != (n,):
        raise InvalidConfigurationError(f"LLR length {llr.shape} does not match n={n}")
    if not np.isfinite(llr).all():
        raise InvalidConfigurationError("LLRs must be finite")
    if order is None:
        order = precode.default_osd_order
    order = int(min(order, k))

    reliability_order = np.argsort(-np.abs(llr), kind="stable")
    reduced, pivots = gf2_rref(g, col_order=reliability_order)
    if len(pivots) != k:
        raise RuntimeError("generator lost rank during OSD elimination")
    basis = np.asarray(pivots)

    hard = (llr < 0).astype(np.uint8)
    c0 = (hard[basis].astype(np.uint32) @ reduced & 1).astype(np.uint8)

    # Correlation of a candidate c with the LLRs is sum llr_i * (1-2c_i);
    # flipping basis row set S multiplies the summand by prod of row signs.
    u = llr * (1.0 - 2.0 * c0)
    corr0 = float(u.sum())
    sigma = 1.0 - 2.0 * reduced.astype(np.float64)   # (k, n) in {+1,-1}

    best_corr = corr0
    best_pattern: tuple[int, ...] = ()
    tested = 1
    if order >= 1 and k >= 1:
        s1 = sigma @ u                                # weight-1 scores
        a = int(np.argmax(s1))
        if s1[a] > best_corr:
            best_corr, best_pattern = float(s1[a]), (a,)
        tested += comb(k, 1)
    if order >= 2 and k >= 2:
        p2 = (sigma * u) @ sigma.T                    # p2[a,b] = score of {a,b}
        iu = np.triu_indices(k, 1)
        flat = p2[iu]
        j = int(np.argmax(flat))
        if flat[j] > best_corr:
            best_corr = float(flat[j])
            best_pattern = (int(iu[0][j]), int(iu[1][j]))
        tested += comb(k, 2)
    if order >= 3 and k >= 3:
        pair = np.einsum("bi,ci->ibc", sigma, sigma).reshape(n, k * k)
        t3 = (sigma * u) @ pair                       # t3[a, b*k+c] = score of {a,b,c}
        t3 = t3.reshape(k, k, k)
        t3[_repeated_index_mask(k)] = -np.inf         # repeats are lower-weight patterns
        idx = np.unravel_index(int(np.argmax(t3)), t3.shape)
        if t3[idx] > best_corr:
            best_corr, best_pattern = float(t3[idx]), tuple(sorted(int(i) for i in idx))
        tested += comb(k, 3)
    if order > 3:
        for weight in range(4, order + 1):
            for combo in combinations(range(k), weight):
                cand = c0.copy()
                for r in combo:
                    cand ^= reduced[r]
                corr = float(np.dot(llr, 1.0 - 2.0 * cand))
                if corr > best_corr:
                    best_corr, best_pattern = corr, combo
            tested += comb(k, weight)

    codeword = c0.copy()
    for r in best_pattern:
        codeword ^= reduced[r]
    return OsdResult(message=codeword[precode.systematic_cols].copy(),
                     codeword=codeword, correlation=best_corr,
                     patterns_tested=tested, order=order)
