"""Bipartite-graph construction and rateless encoding.

Coded symbols are real-valued weighted sums of BPSK-modulated intermediate
bits.  Each check (coded symbol) selects ``d_c`` distinct variables
uniformly at random, assigns each of the ``d_c`` weights exactly once in a
random order, and - when the i.i.d. channel adapter is enabled - flips each
edge with an independent uniform sign.

Randomness is organised so that check ``i`` depends only on the master seed
and ``i``: checks are generated in fixed-size chunks, each chunk seeded by
``(master_seed, chunk_index)``, and a chunk is always generated in full
before truncation.  Building ``m`` checks and then extending by ``delta``
therefore yields exactly the same graph as building ``m + delta`` checks up
front (rateless prefix property).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigurationError
from .weights import WeightSet

CHUNK = 64


@dataclass(frozen=True)
class IntermediateBlock:
    """Intermediate bit block and its BPSK modulation v = (-1)^u."""

    bits: np.ndarray
    bpsk: np.ndarray

    @classmethod
    def from_bits(cls, bits) -> "IntermediateBlock":
        u = np.asarray(bits, dtype=np.int8)
        if u.ndim != 1 or not np.isin(u, (0, 1)).all():
            raise InvalidConfigurationError("bits must be a 1-D 0/1 vector")
        return cls(bits=u, bpsk=(1 - 2 * u).astype(np.float64))

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class CodeGraph:
    """Rateless bipartite graph truncated at ``m`` checks.

    Per-check arrays have shape (m, d_c): variable indices in [0, n),
    weight indices in [0, d_c) (a permutation per row), and adapter signs
    in {+1, -1} (all +1 without the adapter).  ``seed`` is kept so the
    graph can be extended; graphs loaded from a dump carry ``seed=None``
    and cannot be extended.
    """

    n: int
    d_c: int
    adapter: bool
    var_idx: np.ndarray
    weight_idx: np.ndarray
    sign: np.ndarray
    seed: int | None = None
    balanced: bool = False

    @property
    def m(self) -> int:
        return self.var_idx.shape[0]

    def check_degree_counts(self) -> np.ndarray:
        """Number of checks incident to each variable."""
        return np.bincount(self.var_idx.ravel(), minlength=self.n)


def _chunk_checks(seed: int, chunk_index: int, n: int, d_c: int, adapter: bool):
    """Generate one full chunk of CHUNK checks from its dedicated stream."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, chunk_index))))
    base = n - d_c
    var = np.empty((CHUNK, d_c), dtype=np.int32)
    # Floyd's sampling: d_c distinct indices per row, uniform without
    # replacement, using exactly one bounded draw per edge.
    for j in range(d_c):
        t = rng.integers(0, base + j + 1, size=CHUNK).astype(np.int32)
        hit = np.zeros(CHUNK, dtype=bool)
        for prev in range(j):
            hit |= var[:, prev] == t
        var[:, j] = np.where(hit, base + j, t)
    widx = rng.permuted(np.tile(np.arange(d_c, dtype=np.int8), (CHUNK, 1)), axis=1)
    if adapter:
        sign = (2 * rng.integers(0, 2, size=(CHUNK, d_c)) - 1).astype(np.int8)
    else:
        sign = np.ones((CHUNK, d_c), dtype=np.int8)
    return var, widx, sign


def _materialize(seed: int, n: int, d_c: int, m: int, adapter: bool,
                 balanced: bool = False):
    chunks = range((m + CHUNK - 1) // CHUNK)
    parts = [_chunk_checks(seed, c, n, d_c, adapter) for c in chunks]
    var = np.concatenate([p[0] for p in parts])[:m]
    widx = np.concatenate([p[1] for p in parts])[:m]
    sign = np.concatenate([p[2] for p in parts])[:m]
    if balanced:
        var = BalancedDealer(n, d_c, seed).deal(m)
    return var, widx, sign


class BalancedDealer:
    """Variable-index stream for the near-regular ensemble: checks consume
    consecutive slots of seeded permutations of [0, n), keeping variable
    degrees within one of the average at every prefix.  A within-check
    repeat (only possible where a check straddles two permutations) is
    swapped with the next stream element not already in the check.
    Generation is strictly sequential, so any prefix is reproducible
    regardless of how the graph was grown.
    """

    def __init__(self, n: int, d_c: int, seed: int):
        from collections import deque
        self.n, self.d_c = n, d_c
        self.rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((int(seed), 0xBA1A))))
        self.buf = deque()

    def _refill(self) -> None:
        while len(self.buf) < self.n + self.d_c:
            self.buf.extend(self.rng.permutation(self.n).tolist())

    def deal(self, count: int) -> np.ndarray:
        var = np.empty((count, self.d_c), dtype=np.int32)
        for i in range(count):
            row: list[int] = []
            for _ in range(self.d_c):
                self._refill()
                v = self.buf.popleft()
                if v in row:
                    for t, cand in enumerate(self.buf):
                        if cand not in row:
                            self.buf[t] = v
                            v = cand
                            break
                row.append(v)
            var[i] = row
        return var


class GrowableGraph:
    """Chunk-cached view of a seeded graph, grown on demand.

    Prefixes are identical to ``build_graph`` with the same seed at any
    length; used by the session runner to avoid materialising checks that
    are never transmitted.
    """

    def __init__(self, n: int, d_c: int, adapter: bool, seed: int,
                 balanced: bool = False):
        self.n, self.d_c, self.adapter, self.seed = n, d_c, adapter, int(seed)
        self.dealer = BalancedDealer(n, d_c, self.seed) if balanced else None
        self.var_idx = np.empty((0, d_c), dtype=np.int32)
        self.weight_idx = np.empty((0, d_c), dtype=np.int8)
        self.sign = np.empty((0, d_c), dtype=np.int8)

    def grow(self, m: int) -> None:
        have = self.var_idx.shape[0]
        if m <= have:
            return
        first = have // CHUNK
        parts = [_chunk_checks(self.seed, c, self.n, self.d_c, self.adapter)
                 for c in range(first, (m + CHUNK - 1) // CHUNK)]
        widx = np.concatenate([self.weight_idx[: first * CHUNK]] + [p[1] for p in parts])
        var = np.concatenate([self.var_idx[: first * CHUNK]] + [p[0] for p in parts])
        if self.dealer is not None:
            var = np.concatenate([self.var_idx, self.dealer.deal(len(var) - have)])
        self.var_idx = var
        self.weight_idx = widx
        self.sign = np.concatenate([self.sign[: first * CHUNK]] + [p[2] for p in parts])


def build_graph(n: int, d_c: int, m: int, adapter: bool, rng_seed: int,
                balanced: bool = False) -> CodeGraph:
    """Construct a graph with ``m`` checks over ``n`` variables.

    ``balanced=True`` draws variable indices round-robin from seeded
    permutations so that variable degrees stay within one of each other at
    every prefix (the regular-ensemble surrogate used for short blocks);
    the default leaves degrees binomial.
    """
    if d_c > n:
        raise InvalidConfigurationError(f"check degree {d_c} exceeds variable count {n}")
    if d_c < 1 or m < 1:
        raise InvalidConfigurationError("d_c and m must be at least 1")
    var, widx, sign = _materialize(int(rng_seed), n, d_c, m, adapter, balanced=balanced)
    return CodeGraph(n=n, d_c=d_c, adapter=adapter, var_idx=var, weight_idx=widx,
                     sign=sign, seed=int(rng_seed), balanced=balanced)


def build_regular_graph(n: int, d_c: int, d_v: int, adapter: bool, rng_seed: int) -> CodeGraph:
    """Graph with exactly ``d_v`` checks per variable (configuration model).

    ``build_graph`` leaves the variable degrees binomial; density evolution
    models the regular ensemble, so its validation fixtures are built here.
    Requires n*d_v divisible by d_c.  Duplicate variables inside a check are
    repaired by random stub swaps.
    """
    if (n * d_v) % d_c != 0:
        raise InvalidConfigurationError("n*d_v must be divisible by d_c")
    if d_c > n:
        raise InvalidConfigurationError(f"check degree {d_c} exceeds variable count {n}")
    m = n * d_v // d_c
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(rng_seed), -1))))
    stubs = np.repeat(np.arange(n, dtype=np.int32), d_v)
    rng.shuffle(stubs)
    var = stubs.reshape(m, d_c)
    for _ in range(1000):
        dup = (np.sort(var, axis=1)[:, 1:] == np.sort(var, axis=1)[:, :-1]).any(axis=1)
        bad = np.flatnonzero(dup)
        if bad.size == 0:
            break
        for i in bad:
            seen: set[int] = set()
            for j in range(d_c):
                v = int(var[i, j])
                if v in seen:
                    r, c = int(rng.integers(m)), int(rng.integers(d_c))
                    var[i, j], var[r, c] = var[r, c], var[i, j]
                else:
                    seen.add(v)
    else:
        raise InvalidConfigurationError("could not repair duplicate edges; graph too dense")
    widx = rng.permuted(np.tile(np.arange(d_c, dtype=np.int8), (m, 1)), axis=1)
    if adapter:
        sign = (2 * rng.integers(0, 2, size=(m, d_c)) - 1).astype(np.int8)
    else:
        sign = np.ones((m, d_c), dtype=np.int8)
    return CodeGraph(n=n, d_c=d_c, adapter=adapter, var_idx=var, weight_idx=widx,
                     sign=sign, seed=None)


def extend_graph(g: CodeGraph, delta: int, rng_seed: int | None = None) -> CodeGraph:
    """Append ``delta`` checks drawn with the same sampling rule.

    With the default ``rng_seed`` (the graph's own seed) the result is
    identical to having built the longer graph in one shot.
    """
    if delta < 1:
        raise InvalidConfigurationError("extension must add at least one check")
    seed = g.seed if rng_seed is None else int(rng_seed)
    if seed is None:
        raise InvalidConfigurationError("graph has no seed (loaded from dump); cannot extend")
    new_m = g.m + delta
    var, widx, sign = _materialize(seed, g.n, g.d_c, new_m, g.adapter,
                                   balanced=g.balanced)
    if rng_seed is None or seed == g.seed:
        # Existing checks are bit-identical by construction; keep them.
        var[: g.m], widx[: g.m], sign[: g.m] = g.var_idx, g.weight_idx, g.sign
    else:
        var = np.concatenate([g.var_idx, var[g.m:new_m]])
        widx = np.concatenate([g.weight_idx, widx[g.m:new_m]])
        sign = np.concatenate([g.sign, sign[g.m:new_m]])
    return CodeGraph(n=g.n, d_c=g.d_c, adapter=g.adapter, var_idx=var,
                     weight_idx=widx, sign=sign, seed=seed, balanced=g.balanced)


def edge_amplitudes(g: CodeGraph, w: WeightSet, h: float = 1.0) -> np.ndarray:
    """Effective per-edge amplitudes h * sign * weight, shape (m, d_c)."""
    if w.degree != g.d_c:
        raise InvalidConfigurationError(
            f"weight set degree {w.degree} does not match graph degree {g.d_c}")
    wvec = np.asarray(w.weights)
    return h * g.sign * wvec[g.weight_idx]


def encode(g: CodeGraph, w: WeightSet, v: IntermediateBlock) -> np.ndarray:
    """Coded symbols c_i = sum_j sign_ij * w_[ij] * v_[ij], length m."""
    if len(v) != g.n:
        raise InvalidConfigurationError(
            f"block length {len(v)} does not match graph variable count {g.n}")
    amp = edge_amplitudes(g, w)
    return (amp * v.bpsk[g.var_idx]).sum(axis=1)


def dump_graph(g: CodeGraph) -> str:
    """Line-oriented text dump: header ``n m d_c adapter`` then one line
    per check of ``varidx:weightidx:sign`` triples."""
    lines = [f"{g.n} {g.m} {g.d_c} {int(g.adapter)}"]
    for i in range(g.m):
        triples = [
            f"{g.var_idx[i, j]}:{g.weight_idx[i, j]}:{g.sign[i, j]:+d}"
            for j in range(g.d_c)
        ]
        lines.append(" ".join(triples))
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> CodeGraph:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    try:
        n, m, d_c, adapter = (int(x) for x in lines[0].split())
    except ValueError as exc:
        raise InvalidConfigurationError(f"bad graph header: {lines[0]!r}") from exc
    if len(lines) - 1 != m:
        raise InvalidConfigurationError(f"expected {m} check lines, got {len(lines) - 1}")
    var = np.empty((m, d_c), dtype=np.int32)
    widx = np.empty((m, d_c), dtype=np.int8)
    sign = np.empty((m, d_c), dtype=np.int8)
    for i, line in enumerate(lines[1:]):
        triples = line.split()
        if len(triples) != d_c:
            raise InvalidConfigurationError(f"check {i} has {len(triples)} edges, expected {d_c}")
        for j, triple in enumerate(triples):
            a, b, c = triple.split(":")
            var[i, j], widx[i, j], sign[i, j] = int(a), int(b), int(c)
    return CodeGraph(n=n, d_c=d_c, adapter=bool(adapter), var_idx=var,
                     weight_idx=widx, sign=sign, seed=None)
