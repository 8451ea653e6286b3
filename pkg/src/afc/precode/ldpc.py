"""LDPC parity matrices: seeded near-regular construction, alist exchange
format, and a batched sum-product decoder."""

from __future__ import annotations

import logging

import numpy as np

from ..errors import InvalidConfigurationError

log = logging.getLogger(__name__)

V2C_CLIP = 25.0
TANH_EPS = 1e-12


def regular_ldpc_matrix(n: int, n_minus_k: int, col_degree: int = 3,
                        rng_seed: int = 0) -> np.ndarray:
    """Column-degree-``col_degree`` parity matrix with balanced row degrees.

    Columns are placed greedily on the least-loaded rows; placements that
    would close a 4-cycle (two columns sharing two rows) are retried a
    bounded number of times, then accepted with a log warning.
    """
    if col_degree >= n_minus_k:
        raise InvalidConfigurationError("column degree must be below the row count")
    rng = np.random.default_rng(rng_seed)
    row_load = np.zeros(n_minus_k, dtype=np.int64)
    pairs_used: set[tuple[int, int]] = set()
    h = np.zeros((n_minus_k, n), dtype=np.uint8)
    girth_violations = 0
    for col in range(n):
        for attempt in range(100):
            # sample among the least-loaded rows with random tie-breaking
            noise = rng.random(n_minus_k)
            rows = np.lexsort((noise, row_load))[:col_degree]
            pairs = [(int(a), int(b)) for i, a in enumerate(rows)
                     for b in rows[i + 1:]]
            pairs = [tuple(sorted(p)) for p in pairs]
            if all(p not in pairs_used for p in pairs):
                break
        else:
            girth_violations += 1
        pairs_used.update(pairs)
        row_load[rows] += 1
        h[rows, col] = 1
    if girth_violations:
        log.warning("regular LDPC construction kept %d unavoidable 4-cycles",
                    girth_violations)
    return h


def save_alist(h: np.ndarray) -> str:
    m, n = h.shape
    col_lists = [np.flatnonzero(h[:, j]) + 1 for j in range(n)]
    row_lists = [np.flatnonzero(h[i, :]) + 1 for i in range(m)]
    lines = [f"{n} {m}",
             f"{max(len(c) for c in col_lists)} {max(len(r) for r in row_lists)}",
             " ".join(str(len(c)) for c in col_lists),
             " ".join(str(len(r)) for r in row_lists)]
    lines += [" ".join(map(str, c)) for c in col_lists]
    lines += [" ".join(map(str, r)) for r in row_lists]
    return "\n".join(lines) + "\n"


def load_alist(text: str) -> np.ndarray:
    """Parse an alist dump into a dense 0/1 matrix.  Zero padding entries
    (used by some writers for ragged lists) are ignored."""
    tokens = text.split("\n")
    tokens = [ln.split() for ln in tokens if ln.strip()]
    try:
        n, m = int(tokens[0][0]), int(tokens[0][1])
        col_degrees = [int(x) for x in tokens[2]]
        h = np.zeros((m, n), dtype=np.uint8)
        for j in range(n):
            entries = [int(x) for x in tokens[4 + j]]
            entries = [e for e in entries if e != 0]
            if len(entries) != col_degrees[j]:
                raise ValueError(f"column {j} lists {len(entries)} rows, "
                                 f"declared {col_degrees[j]}")
            h[[e - 1 for e in entries], j] = 1
    except (IndexError, ValueError) as exc:
        raise InvalidConfigurationError(f"malformed alist: {exc}") from exc
    return h


class LdpcDecoder:
    """Sum-product decoding state shared across calls for one H."""

    def __init__(self, h: np.ndarray):
        self.h = np.asarray(h, dtype=np.uint8)
        self.m, self.n = self.h.shape
        chk, var = np.nonzero(self.h)
        self.chk = chk.astype(np.int64)
        self.var = var.astype(np.int64)
        self.n_edges = len(chk)

    def decode_batch(self, llr: np.ndarray, max_iters: int):
        """Returns (hard bits (B, n), parity satisfied (B,), iterations (B,))."""
        llr = np.atleast_2d(np.asarray(llr, dtype=np.float64))
        B = llr.shape[0]
        e = self.n_edges
        chk = np.tile(self.chk, B) + np.repeat(np.arange(B) * self.m, e)
        var = np.tile(self.var, B) + np.repeat(np.arange(B) * self.n, e)
        llr_edge = llr.reshape(-1)[var]

        v2c = np.clip(llr_edge, -V2C_CLIP, V2C_CLIP)
        hard_out = np.zeros((B, self.n), dtype=np.uint8)
        ok = np.zeros(B, dtype=bool)
        iters = np.full(B, max_iters, dtype=int)

        for it in range(1, max_iters + 1):
            t = np.tanh(v2c / 2.0)
            mag = np.log(np.maximum(np.abs(t), TANH_EPS))
            neg = (t < 0).astype(np.int64)
            sum_mag = np.bincount(chk, weights=mag, minlength=B * self.m)
            sum_neg = np.bincount(chk, weights=neg, minlength=B * self.m)
            prod_excl = np.exp(sum_mag[chk] - mag)
            sign_excl = 1.0 - 2.0 * ((sum_neg[chk] - neg) % 2)
            c2v = 2.0 * np.arctanh(np.clip(prod_excl, 0.0, 1.0 - TANH_EPS)) * sign_excl

            totals = llr + np.bincount(var, weights=c2v,
                                       minlength=B * self.n).reshape(B, self.n)
            v2c = np.clip(totals.reshape(-1)[var] - c2v, -V2C_CLIP, V2C_CLIP)

            hard = (totals < 0).astype(np.uint8)
            syndrome = np.bincount(chk, weights=hard.reshape(-1)[var],
                                   minlength=B * self.m).reshape(B, self.m) % 2
            good = ~syndrome.any(axis=1)
            newly = good & ~ok
            if newly.any():
                hard_out[newly] = hard[newly]
                iters[newly] = it
                ok |= newly
            if ok.all():
                break
        if not ok.all():
            hard_final = hard  # last iteration's decision for the failures
            hard_out[~ok] = hard_final[~ok]
        return hard_out, ok, iters
