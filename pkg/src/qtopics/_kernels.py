"""Numba inner loops for the Gibbs samplers.

All randomness is materialized by the caller (numpy PCG64 Generator) and
passed in as arrays, so runs are reproducible bit-for-bit from the seed and
the kernels stay purely arithmetic.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def lda_sweep(doc_ix, word_ix, z, n_dk, n_kw, n_k, alpha, eta, uniforms):
    """One full collapsed-Gibbs sweep over every token.

    Resamples each token's topic from
    p(k) ~ (n_dk + alpha) * (n_kw + eta) / (n_k + V * eta)
    with the token's own counts removed, consuming one uniform per token
    via inverse-CDF on the unnormalized weights.  A negative entry in ``z``
    means "not yet assigned" (initialization pass): no decrement happens.
    """
    n_topics, vocab_size = n_kw.shape
    weights = np.empty(n_topics)
    for t in range(doc_ix.size):
        d = doc_ix[t]
        w = word_ix[t]
        k = z[t]
        if k >= 0:
            n_dk[d, k] -= 1
            n_kw[k, w] -= 1
            n_k[k] -= 1
        total = 0.0
        for j in range(n_topics):
            weights[j] = (
                (n_dk[d, j] + alpha)
                * (n_kw[j, w] + eta)
                / (n_k[j] + vocab_size * eta)
            )
            total += weights[j]
        r = uniforms[t] * total
        cum = 0.0
        new_k = n_topics - 1
        for j in range(n_topics):
            cum += weights[j]
            if r < cum:
                new_k = j
                break
        z[t] = new_k
        n_dk[d, new_k] += 1
        n_kw[new_k, w] += 1
        n_k[new_k] += 1


@njit(cache=True)
def hdp_sweep(
    doc_ix,
    word_ix,
    z,
    n_dk,
    n_kw,
    n_k,
    topic_weights,
    new_weight,
    n_active,
    alpha0,
    beta_word,
    uniforms,
    sticks,
):
    """One direct-assignment sweep; returns (new_weight, n_active, truncated).

    Instantiated topics j < n_active are sampled with
    p(j) ~ (n_dk + alpha0 * w_j) * (n_kw + beta) / (n_k + V * beta);
    one extra slot for a brand-new topic has weight
    alpha0 * w_new * (1/V).  Choosing the new slot splits w_new by a
    pre-drawn Beta(1, gamma) stick from ``sticks``.  Growth stops at the
    truncation ceiling (the arrays' capacity); ``truncated`` reports
    whether the ceiling suppressed a new-topic slot this sweep.
    """
    k_max, vocab_size = n_kw.shape
    weights = np.empty(k_max + 1)
    stick_i = 0
    truncated = False
    for t in range(doc_ix.size):
        d = doc_ix[t]
        w = word_ix[t]
        k = z[t]
        if k >= 0:
            n_dk[d, k] -= 1
            n_kw[k, w] -= 1
            n_k[k] -= 1
        total = 0.0
        for j in range(n_active):
            weights[j] = (
                (n_dk[d, j] + alpha0 * topic_weights[j])
                * (n_kw[j, w] + beta_word)
                / (n_k[j] + vocab_size * beta_word)
            )
            total += weights[j]
        has_new = n_active < k_max
        if has_new:
            weights[n_active] = alpha0 * new_weight / vocab_size
            total += weights[n_active]
        else:
            truncated = True
        n_slots = n_active + 1 if has_new else n_active
        r = uniforms[t] * total
        cum = 0.0
        new_k = n_slots - 1
        for j in range(n_slots):
            cum += weights[j]
            if r < cum:
                new_k = j
                break
        if has_new and new_k == n_active:
            # instantiate: carve the new topic's weight out of the residual
            b = sticks[stick_i]
            stick_i += 1
            topic_weights[n_active] = b * new_weight
            new_weight = (1.0 - b) * new_weight
            n_active += 1
        z[t] = new_k
        n_dk[d, new_k] += 1
        n_kw[new_k, w] += 1
        n_k[new_k] += 1
    return new_weight, n_active, truncated


@njit(cache=True)
def antoniak_table_counts(n_dk, topic_weights, n_active, alpha0, uniforms):
    """Per-topic table counts m_k = sum_d Antoniak(n_dk, alpha0 * w_k).

    Uses the Bernoulli-sum construction (one uniform per seated token, in
    document-major order), so ``uniforms`` must hold at least as many draws
    as there are tokens.
    """
    n_docs = n_dk.shape[0]
    m_k = np.zeros(n_active, dtype=np.int64)
    u_i = 0
    for d in range(n_docs):
        for k in range(n_active):
            n = n_dk[d, k]
            if n <= 0:
                continue
            a = alpha0 * topic_weights[k]
            for i in range(1, n + 1):
                if uniforms[u_i] < a / (a + i - 1.0):
                    m_k[k] += 1
                u_i += 1
    return m_k
