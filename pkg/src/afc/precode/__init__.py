"""Fixed-rate outer codes and their soft-input decoders."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidConfigurationError, UnsupportedCodeError
from .bch import bch_generator_matrix, bch_generator_poly
from .crc import (CRC_BITS, CrcFrame, crc16, crc16_bytes, crc_attach,
                  crc_verify, crc_verify_bits)
from .gf2 import gf2_matmul, gf2_nullspace, gf2_rank, gf2_rref
from .ldpc import LdpcDecoder, load_alist, regular_ldpc_matrix, save_alist
from .osd import OsdResult, osd_decode

log = logging.getLogger(__name__)

DEFAULT_OSD_ORDER_CAP = 3
DEFAULT_LDPC_ITERS = 50


@dataclass(frozen=True)
class Precode:
    """Fixed-rate (n, k) outer code with a systematic generator matrix.

    ``kind`` selects the soft-input decoder: "bch-osd" re-encodes ordered
    test patterns, "ldpc-bp" runs sum-product on ``h``.  Message bits
    appear verbatim at ``systematic_cols`` of every codeword.
    """

    n: int
    k: int
    generator: np.ndarray
    kind: str
    systematic_cols: np.ndarray
    designed_distance: int | None = None
    default_osd_order: int = 1
    h: np.ndarray | None = None
    max_bp_iters: int = DEFAULT_LDPC_ITERS
    name: str = ""
    _decoder: LdpcDecoder | None = field(default=None, repr=False, compare=False)

    @property
    def rate(self) -> float:
        return self.k / self.n

    def encode(self, message) -> np.ndarray:
        msg = np.asarray(message, dtype=np.uint8)
        if msg.shape != (self.k,):
            raise InvalidConfigurationError(
                f"message length {msg.shape} does not match k={self.k}")
        return gf2_matmul(msg[None, :], self.generator)[0]

    def generator_hex(self) -> str:
        """Row-per-line hex dump of the generator matrix."""
        width = (self.n + 3) // 4
        lines = []
        for row in self.generator:
            val = int("".join(str(int(b)) for b in row), 2)
            lines.append(f"{val:0{width}x}")
        return "\n".join(lines) + "\n"


def bch_construct(n: int, k: int) -> Precode:
    """Narrow-sense binary BCH code with a systematic generator."""
    g_matrix, dist = bch_generator_matrix(n, k)
    order = min(DEFAULT_OSD_ORDER_CAP, math.ceil(dist / 4) + 1)
    return Precode(n=n, k=k, generator=g_matrix, kind="bch-osd",
                   systematic_cols=np.arange(k), designed_distance=dist,
                   default_osd_order=order, name=f"bch({n},{k})")


def ldpc_construct(n: int, k: int, h: np.ndarray | str | None = None,
                   rng_seed: int = 0, col_degree: int = 3,
                   max_bp_iters: int = DEFAULT_LDPC_ITERS) -> Precode:
    """LDPC precode from an explicit H, an alist string, or a seeded
    near-regular construction."""
    if isinstance(h, str):
        h = load_alist(h)
    if h is None:
        h = regular_ldpc_matrix(n, n - k, col_degree=col_degree, rng_seed=rng_seed)
    h = np.asarray(h, dtype=np.uint8)
    if h.shape[1] != n:
        raise InvalidConfigurationError(f"H has {h.shape[1]} columns, expected {n}")
    rank = gf2_rank(h)
    if rank < h.shape[0]:
        log.warning("H is rank deficient (%d < %d); keeping a %d-dimensional "
                    "subcode of the %d-dimensional nullspace",
                    rank, h.shape[0], k, n - rank)
    basis = gf2_nullspace(h)
    if basis.shape[0] < k:
        raise UnsupportedCodeError(
            f"H leaves only {basis.shape[0]} information bits, need {k}")
    rows = basis[:k]
    reduced, pivots = gf2_rref(rows)
    if len(pivots) != k:
        raise UnsupportedCodeError("nullspace rows are not independent")
    return Precode(n=n, k=k, generator=reduced, kind="ldpc-bp",
                   systematic_cols=np.asarray(pivots), h=h,
                   max_bp_iters=max_bp_iters, name=f"ldpc({n},{k})",
                   _decoder=LdpcDecoder(h))


def ldpc_bp_decode(precode: Precode, llr, max_iters: int | None = None):
    """Sum-product decoding; returns (message bits, parity-satisfied flag)."""
    if precode.kind != "ldpc-bp" or precode._decoder is None:
        raise InvalidConfigurationError("precode has no LDPC decoder")
    iters = precode.max_bp_iters if max_iters is None else max_iters
    hard, ok, _ = precode._decoder.decode_batch(np.asarray(llr)[None, :], iters)
    return hard[0][precode.systematic_cols], bool(ok[0])


__all__ = [
    "CRC_BITS", "CrcFrame", "LdpcDecoder", "OsdResult", "Precode",
    "bch_construct", "bch_generator_poly", "crc16", "crc16_bytes",
    "crc_attach", "crc_verify", "crc_verify_bits", "gf2_matmul", "gf2_rank",
    "gf2_rref", "gf2_nullspace", "ldpc_bp_decode", "ldpc_construct",
    "load_alist", "osd_decode", "regular_ldpc_matrix", "save_alist",
]
