"""Hot scoring kernels, numba-jitted with a pure-numpy fallback.

Two kernels carry nearly all of the reranking cost: per-filter pooled
window scores (the fused scorer's inner loop) and per-span smoothed
language-model log-likelihoods. Each exists twice with identical
semantics: a ``@numba.njit`` loop version and a vectorized numpy twin.
Selection happens once at import time:

* default: numba when importable, numpy otherwise (logged warning);
* ``PASSAGERANK_NO_NUMBA=1`` forces the numpy path.

Cross-path agreement is float-rounding level (tested at rtol 1e-12);
each path on its own is run-to-run deterministic. ``fastmath`` stays
off for exactly that reason.

Conventions shared by both paths: document and query tokens are int32
vocabulary ids, out-of-vocabulary query tokens are -1 (they never match
a position), and window size ``m <= 0`` means the whole document as a
single span.
"""

from __future__ import annotations

import logging
import os

import numpy as np

log = logging.getLogger(__name__)

_ENV_FLAG = "PASSAGERANK_NO_NUMBA"


def _numba_disabled() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


# ---------------------------------------------------------------------------
# loop implementations (jitted in dependency order when numba is available)
# ---------------------------------------------------------------------------


def _match_counts(doc_tokens, query_ids):
    """Prefix-sum match counts: out[i, j] = #{p < j : d[p] == q[i]}."""
    n_d = doc_tokens.shape[0]
    n_q = query_ids.shape[0]
    out = np.zeros((n_q, n_d + 1), dtype=np.int64)
    for i in range(n_q):
        q = query_ids[i]
        c = 0
        for j in range(n_d):
            if doc_tokens[j] == q:
                c += 1
            out[i, j + 1] = c
    return out


def _pool(scores, mean_pool):
    """MAX pooling, or MEAN pooling as log-mean-exp over span scores."""
    mx = scores[0]
    for k in range(1, scores.shape[0]):
        if scores[k] > mx:
            mx = scores[k]
    if not mean_pool:
        return mx
    acc = 0.0
    for k in range(scores.shape[0]):
        acc += np.exp(scores[k] - mx)
    return mx + np.log(acc / scores.shape[0])


def _kernel_filter_scores(doc_tokens, query_ids, bias_coeff, ms, taus, mean_pool):
    """Pooled log-kernel score per window filter.

    Span score: sum_i log(window_count_i + bias_coeff[i] * m_eff) with
    m_eff the nominal window size (the document length when m <= 0).
    """
    n_d = doc_tokens.shape[0]
    n_q = query_ids.shape[0]
    n_f = ms.shape[0]
    cum = _match_counts(doc_tokens, query_ids)
    out = np.empty(n_f, dtype=np.float64)
    for f in range(n_f):
        m = ms[f]
        if m <= 0:
            width = n_d
            step = n_d
            m_eff = float(n_d)
            n_spans = 1
        else:
            width = m
            step = taus[f]
            m_eff = float(m)
            n_spans = (n_d + step - 1) // step
        spans = np.empty(n_spans, dtype=np.float64)
        start = 0
        s = 0
        while start < n_d:
            end = start + width
            if end > n_d:
                end = n_d
            acc = 0.0
            for i in range(n_q):
                wc = cum[i, end] - cum[i, start]
                acc += np.log(wc + bias_coeff[i] * m_eff)
            spans[s] = acc
            s += 1
            start += step
        out[f] = _pool(spans, mean_pool)
    return out


def _lm_span_scores(doc_tokens, query_ids, background, one_minus_lam, m, tau):
    """Smoothed LM log-likelihood per span, actual span length as n.

    Span score: sum_i log(one_minus_lam * window_count_i / n + background[i]);
    background[i] already folds the smoothing weight into the collection
    probability.
    """
    n_d = doc_tokens.shape[0]
    n_q = query_ids.shape[0]
    cum = _match_counts(doc_tokens, query_ids)
    if m <= 0:
        width = n_d
        step = n_d
        n_spans = 1
    else:
        width = m
        step = tau
        n_spans = (n_d + step - 1) // step
    out = np.empty(n_spans, dtype=np.float64)
    start = 0
    s = 0
    while start < n_d:
        end = start + width
        if end > n_d:
            end = n_d
        n = float(end - start)
        acc = 0.0
        for i in range(n_q):
            wc = cum[i, end] - cum[i, start]
            acc += np.log(one_minus_lam * wc / n + background[i])
        out[s] = acc
        s += 1
        start += step
    return out


# ---------------------------------------------------------------------------
# numpy twins
# ---------------------------------------------------------------------------


def _span_grid(n_d: int, m: int, tau: int):
    if m <= 0:
        return np.zeros(1, dtype=np.int64), np.full(1, n_d, dtype=np.int64), float(n_d)
    starts = np.arange(0, n_d, tau, dtype=np.int64)
    ends = np.minimum(starts + m, n_d)
    return starts, ends, float(m)


def match_counts_np(doc_tokens, query_ids):
    n_d = doc_tokens.shape[0]
    eq = doc_tokens[np.newaxis, :] == query_ids[:, np.newaxis]
    out = np.zeros((query_ids.shape[0], n_d + 1), dtype=np.int64)
    np.cumsum(eq, axis=1, out=out[:, 1:])
    return out


def _pool_np(scores, mean_pool):
    mx = scores.max()
    if not mean_pool:
        return float(mx)
    return float(mx + np.log(np.exp(scores - mx).mean()))


def kernel_filter_scores_np(doc_tokens, query_ids, bias_coeff, ms, taus, mean_pool):
    n_d = doc_tokens.shape[0]
    cum = match_counts_np(doc_tokens, query_ids)
    out = np.empty(ms.shape[0], dtype=np.float64)
    for f in range(ms.shape[0]):
        starts, ends, m_eff = _span_grid(n_d, int(ms[f]), int(taus[f]))
        wc = cum[:, ends] - cum[:, starts]
        spans = np.log(wc + bias_coeff[:, np.newaxis] * m_eff).sum(axis=0)
        out[f] = _pool_np(spans, mean_pool)
    return out


def lm_span_scores_np(doc_tokens, query_ids, background, one_minus_lam, m, tau):
    n_d = doc_tokens.shape[0]
    cum = match_counts_np(doc_tokens, query_ids)
    starts, ends, _ = _span_grid(n_d, m, tau)
    wc = cum[:, ends] - cum[:, starts]
    n = (ends - starts).astype(np.float64)
    return np.log(one_minus_lam * wc / n + background[:, np.newaxis]).sum(axis=0)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

USING_NUMBA = False

if not _numba_disabled():
    try:
        import numba
    except ImportError:  # pragma: no cover - environment without numba
        log.warning("numba unavailable, using the numpy kernel path")
    else:
        _jit = numba.njit(cache=True, nogil=True)
        # rebind in dependency order so lazy compilation sees jitted callees
        _match_counts = _jit(_match_counts)
        _pool = _jit(_pool)
        _kernel_filter_scores = _jit(_kernel_filter_scores)
        _lm_span_scores = _jit(_lm_span_scores)
        USING_NUMBA = True

if USING_NUMBA:
    match_counts = _match_counts
    kernel_filter_scores = _kernel_filter_scores
    lm_span_scores = _lm_span_scores
else:
    match_counts = match_counts_np
    kernel_filter_scores = kernel_filter_scores_np
    lm_span_scores = lm_span_scores_np


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"
