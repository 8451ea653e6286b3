"""Exact belief-propagation decoding on the weighted bipartite graph.

Messages are log-likelihood ratios ln P(bit=0)/P(bit=1) under the 0 -> +1
BPSK mapping.  The check update marginalises the Gaussian likelihood over
all sign configurations of the other connected variables; it is evaluated
in the log domain with max-subtraction so that high-SNR runs do not
underflow.  Messages are clipped to +/-LLR_MAX.  The schedule is flooding
(all checks, then all variables) with an early exit once the per-variable
decision LLRs change by less than ``tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelObservation
from .codec import CodeGraph, edge_amplitudes
from .errors import InvalidConfigurationError
from .weights import WeightSet

LLR_MAX = 40.0
MAX_ENUM_DEGREE = 20
DEFAULT_TOL = 1e-3


def clip_llr(x):
    return np.clip(x, -LLR_MAX, LLR_MAX)


@dataclass
class MessageState:
    """Per-edge message arrays of shape (m, d_c) plus the iteration count."""

    c2v: np.ndarray
    v2c: np.ndarray
    iteration: int = 0


@dataclass(frozen=True)
class DecodeOutput:
    llr: np.ndarray
    hard_bits: np.ndarray
    iterations_run: int
    trace: list[tuple[int, np.ndarray]] = field(default_factory=list, repr=False)


def check_to_variable(y: float, sigma2: float, h: float,
                      edges: list[tuple[float, float]], target: int) -> float:
    """One exact check-node message.

    ``edges`` holds (sign*weight, incoming LLR) for every edge of the
    check; the message is computed for ``edges[target]`` by enumerating the
    2^(d_c-1) sign configurations of the remaining edges.  The fading gain
    ``h`` scales every amplitude.
    """
    d = len(edges)
    if d > MAX_ENUM_DEGREE:
        raise InvalidConfigurationError(
            f"check degree {d} exceeds enumeration limit {MAX_ENUM_DEGREE}")
    if sigma2 <= 0:
        raise InvalidConfigurationError("sigma2 must be positive")
    amp = [h * aw for aw, _ in edges]
    llr_in = [llr for _, llr in edges]
    others = [j for j in range(d) if j != target]
    a_t = amp[target]

    num_terms, den_terms = [], []
    for mask in range(1 << len(others)):
        s = 0.0
        logw = 0.0
        for bit, j in enumerate(others):
            if mask >> bit & 1:
                s += amp[j]
                logw += _log_sigmoid(llr_in[j])
            else:
                s -= amp[j]
                logw += _log_sigmoid(-llr_in[j])
        num_terms.append(-((y - a_t - s) ** 2) / (2 * sigma2) + logw)
        den_terms.append(-((y + a_t - s) ** 2) / (2 * sigma2) + logw)
    msg = _logsumexp(num_terms) - _logsumexp(den_terms)
    return float(clip_llr(msg))


def variable_to_check(incoming) -> float:
    """Sum of the incoming check messages (the excluded edge is already
    left out by the caller), clipped."""
    return float(clip_llr(math.fsum(incoming)))


def _log_sigmoid(x: float) -> float:
    # log(1/(1+e^-x)) without overflow
    if x >= 0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


def _logsumexp(terms) -> float:
    m = max(terms)
    if m == -math.inf:
        return m
    return m + math.log(math.fsum(math.exp(t - m) for t in terms))


# ---------------------------------------------------------------------------
# Vectorised core shared by the single-graph decoder and the session runner.
# ---------------------------------------------------------------------------

_SIGN_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _sign_patterns(d: int):
    """(2^d, d) arrays: signs in {-1,+1} and the +1 indicator."""
    if d not in _SIGN_CACHE:
        bits = (np.arange(1 << d)[:, None] >> np.arange(d)[None, :]) & 1
        _SIGN_CACHE[d] = ((2 * bits - 1).astype(np.float64), bits.astype(np.float64))
    return _SIGN_CACHE[d]


def _check_update(y: np.ndarray, amp: np.ndarray, v2c: np.ndarray,
                  sigma2: float) -> np.ndarray:
    """Exact check messages for a stack of graphs.

    y: (B, m), amp/v2c: (B, m, d).  Enumerates all 2^d full sign patterns
    once and extracts each edge's extrinsic message as the conditional
    log-odds minus the edge's own prior.
    """
    B, m, d = amp.shape
    if d > MAX_ENUM_DEGREE:
        raise InvalidConfigurationError(
            f"check degree {d} exceeds enumeration limit {MAX_ENUM_DEGREE}")
    sgn, pos = _sign_patterns(d)
    logp1 = -np.logaddexp(0.0, -v2c)      # log P(b=+1)
    logm1 = logp1 - v2c                   # log P(b=-1)

    flat_amp = amp.reshape(B * m, d)
    totals = flat_amp @ sgn.T             # (Bm, 2^d)
    logw = logp1.reshape(B * m, d) @ pos.T + logm1.reshape(B * m, d) @ (1.0 - pos).T
    g = -((y.reshape(B * m, 1) - totals) ** 2) / (2.0 * sigma2) + logw

    gmax = g.max(axis=1, keepdims=True)
    e = np.exp(g - gmax)
    # Sum each hypothesis group directly: subtracting from the total would
    # cancel catastrophically when one hypothesis dominates.
    splus = e @ pos                       # (Bm, d): mass of patterns with s_t = +1
    sminus = e @ (1.0 - pos)
    with np.errstate(divide="ignore"):
        c2v = np.log(splus) - np.log(sminus) - v2c.reshape(B * m, d)
    return clip_llr(c2v).reshape(B, m, d)


def bp_decode_batch(var_idx: np.ndarray, amp: np.ndarray, y: np.ndarray,
                    sigma2: float, n: int, max_iters: int,
                    tol: float = DEFAULT_TOL, trace_iters=None):
    """Flooding BP over a stack of B graphs with identical shape.

    Returns (llr (B, n), iterations_run (B,), traces) where traces maps a
    recorded iteration number to the (B, n) decision LLRs at that point.
    Message clipping applies per edge; the decision LLR is the plain sum of
    the clipped incident messages.
    """
    B, m, d = var_idx.shape
    traces: dict[int, np.ndarray] = {}
    if m == 0 or max_iters == 0:
        zeros = np.zeros((B, n))
        return zeros, np.zeros(B, dtype=int), traces

    llr_out = np.zeros((B, n))
    iters_out = np.full(B, max_iters, dtype=int)

    # Active working set; converged rows are compacted away periodically.
    idx = np.arange(B)
    var = var_idx.astype(np.int64)
    amp_a, y_a = amp, y
    v2c = np.zeros((B, m, d))
    llr_prev = np.zeros((B, n))
    recorded = np.zeros(B, dtype=bool)

    def flat(varr):
        a = varr.shape[0]
        return varr + (np.arange(a, dtype=np.int64) * n)[:, None, None]

    flat_var = flat(var)
    for it in range(1, max_iters + 1):
        a = len(idx)
        c2v = _check_update(y_a, amp_a, v2c, sigma2)
        totals = np.bincount(flat_var.ravel(), weights=c2v.ravel(),
                             minlength=a * n).reshape(a, n)
        v2c = clip_llr(totals.reshape(a * n)[flat_var] - c2v)

        if trace_iters and it in trace_iters:
            snap = llr_out.copy()
            snap[idx] = totals
            traces[it] = snap

        delta = np.abs(totals - llr_prev).max(axis=1)
        newly = (~recorded) & (delta < tol)
        if newly.any():
            llr_out[idx[newly]] = totals[newly]
            iters_out[idx[newly]] = it
            recorded |= newly
        llr_prev = totals

        if it == max_iters or recorded.all():
            rest = ~recorded
            llr_out[idx[rest]] = totals[rest]
            break
        if recorded.mean() >= 0.25:
            keep = ~recorded
            idx = idx[keep]
            var = var[keep]
            flat_var = flat(var)
            amp_a, y_a = amp_a[keep], y_a[keep]
            v2c, llr_prev = v2c[keep], llr_prev[keep]
            recorded = np.zeros(len(idx), dtype=bool)
    return llr_out, iters_out, traces


def run_bp(g: CodeGraph, w: WeightSet, obs: ChannelObservation,
           max_iters: int = 50, tol: float = DEFAULT_TOL,
           trace_iters=None) -> DecodeOutput:
    """Decode one observation; ``trace_iters`` records the decision LLRs at
    the listed iteration numbers (debug/analysis hook)."""
    if len(obs.y) != g.m:
        raise InvalidConfigurationError(
            f"observation length {len(obs.y)} does not match check count {g.m}")
    if g.m == 0:
        return DecodeOutput(llr=np.zeros(g.n), hard_bits=np.zeros(g.n, dtype=np.int8),
                            iterations_run=0)
    amp = edge_amplitudes(g, w, obs.h)[None, :, :]
    llr, iters, traces = bp_decode_batch(
        g.var_idx[None, :, :], amp, np.asarray(obs.y)[None, :], obs.sigma2,
        g.n, max_iters, tol=tol, trace_iters=trace_iters)
    llr = llr[0]
    trace_list = [(it, traces[it][0]) for it in sorted(traces)]
    return DecodeOutput(llr=llr, hard_bits=(llr < 0).astype(np.int8),
                        iterations_run=int(iters[0]), trace=trace_list)
