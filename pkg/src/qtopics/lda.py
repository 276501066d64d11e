"""Latent Dirichlet allocation fitted by collapsed Gibbs sampling.

The Dirichlet parameters are integrated out and each token's topic is
resampled from the count-based conditional; topic-word and document-topic
distributions are reported as posterior means averaged over post-burn-in
sweeps, which keeps keyword lists stable.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ._kernels import lda_sweep
from .corpus import EmptyCorpusError
from .preprocess import BowCorpus
from .validation import ContractViolationError, check_positive


def gibbs_conditional(doc_topic_counts, word_topic_counts, topic_totals, alpha, eta, vocab_size):
    """Collapsed per-token conditional over topics, normalized to sum to 1.

    ``doc_topic_counts`` are the current document's per-topic token counts,
    ``word_topic_counts`` the corpus-wide per-topic counts of the word being
    resampled, and ``topic_totals`` the per-topic token totals -- all with
    the token under resampling excluded.
    """
    n_dk = np.asarray(doc_topic_counts, dtype=np.float64)
    n_kw = np.asarray(word_topic_counts, dtype=np.float64)
    n_k = np.asarray(topic_totals, dtype=np.float64)
    if n_dk.shape != n_kw.shape or n_dk.shape != n_k.shape:
        raise ValueError("count vectors must share one length K")
    if np.any(n_dk < 0) or np.any(n_kw < 0) or np.any(n_k < 0):
        raise ContractViolationError("negative count passed to gibbs_conditional")
    check_positive("alpha", alpha)
    check_positive("eta", eta)
    if vocab_size < 1:
        raise ValueError(f"vocab_size must be >= 1, got {vocab_size}")
    weights = (n_dk + alpha) * (n_kw + eta) / (n_k + vocab_size * eta)
    return weights / weights.sum()


def _flatten(bow: BowCorpus):
    """Token-instance arrays (doc index, word index) in deterministic order."""
    doc_ix = []
    word_ix = []
    for d, counts in enumerate(bow.docs):
        for w in sorted(counts):
            doc_ix.extend([d] * counts[w])
            word_ix.extend([w] * counts[w])
    return (
        np.asarray(doc_ix, dtype=np.int64),
        np.asarray(word_ix, dtype=np.int64),
    )


class GibbsLda(BaseEstimator):
    """Collapsed-Gibbs LDA with a fixed topic count.

    Parameters
    ----------
    n_topics : number of topics K (>= 1).
    alpha : document-topic concentration; ``None`` uses 1/K.
    eta : topic-word concentration.
    iterations : total Gibbs sweeps.
    burn_in : sweeps discarded before averaging (must be < iterations).
    seed : PCG64 seed; identical inputs and seed give bit-identical fits.

    Fitted attributes: ``topic_word_`` (K x V, rows sum to 1),
    ``doc_topic_`` (D x K, rows sum to 1; zero-token documents get uniform
    rows), ``token_topics_`` (per-document assignment arrays from the final
    sweep), ``doc_ids_``, ``vocabulary_``, ``warnings_``.
    """

    def __init__(self, n_topics=10, alpha=None, eta=0.01, iterations=1000, burn_in=500, seed=0):
        self.n_topics = n_topics
        self.alpha = alpha
        self.eta = eta
        self.iterations = iterations
        self.burn_in = burn_in
        self.seed = seed

    def _check_params(self):
        if self.n_topics < 1:
            raise ValueError(f"n_topics must be >= 1, got {self.n_topics}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError(
                f"burn_in must satisfy 0 <= burn_in < iterations, got {self.burn_in}"
            )
        alpha = self.alpha if self.alpha is not None else 1.0 / self.n_topics
        check_positive("alpha", alpha)
        check_positive("eta", self.eta)
        return float(alpha), float(self.eta)

    def fit(self, X: BowCorpus, y=None):
        alpha, eta = self._check_params()
        bow = X
        if bow.n_documents == 0 or bow.vocabulary.size == 0:
            raise EmptyCorpusError("cannot fit LDA on an empty corpus")
        if bow.n_tokens == 0:
            raise EmptyCorpusError("cannot fit LDA: no tokens in corpus")
        n_topics = self.n_topics
        vocab_size = bow.vocabulary.size
        n_docs = bow.n_documents
        doc_ix, word_ix = _flatten(bow)
        n_tokens = doc_ix.size

        self.warnings_ = []
        if n_topics > n_tokens:
            self.warnings_.append(
                f"n_topics={n_topics} exceeds total token count {n_tokens}"
            )
        empty_docs = [bow.doc_ids[d] for d, counts in enumerate(bow.docs) if not counts]
        if empty_docs:
            self.warnings_.append(
                f"{len(empty_docs)} zero-token document(s) assigned uniform "
                f"topic rows: {', '.join(empty_docs[:5])}"
                + ("..." if len(empty_docs) > 5 else "")
            )

        rng = np.random.Generator(np.random.PCG64(self.seed))
        z = np.full(n_tokens, -1, dtype=np.int64)
        n_dk = np.zeros((n_docs, n_topics), dtype=np.int64)
        n_kw = np.zeros((n_topics, vocab_size), dtype=np.int64)
        n_k = np.zeros(n_topics, dtype=np.int64)
        doc_len = np.zeros(n_docs, dtype=np.float64)
        np.add.at(doc_len, doc_ix, 1.0)

        phi_acc = np.zeros((n_topics, vocab_size))
        theta_acc = np.zeros((n_docs, n_topics))
        n_samples = 0
        for sweep in range(self.iterations):
            uniforms = rng.random(n_tokens)
            lda_sweep(doc_ix, word_ix, z, n_dk, n_kw, n_k, alpha, eta, uniforms)
            if sweep >= self.burn_in:
                phi_acc += (n_kw + eta) / (n_k + vocab_size * eta)[:, None]
                theta_acc += (n_dk + alpha) / (doc_len + n_topics * alpha)[:, None]
                n_samples += 1

        self.topic_word_ = phi_acc / n_samples
        self.doc_topic_ = theta_acc / n_samples
        self.doc_ids_ = bow.doc_ids
        self.vocabulary_ = bow.vocabulary
        splits = np.cumsum(doc_len.astype(np.int64))[:-1]
        self.token_topics_ = tuple(np.split(z.copy(), splits))
        return self

    def _check_fitted(self):
        if not hasattr(self, "topic_word_"):
            raise ValueError("GibbsLda is not fitted; call fit first")

    def doc_topic_assignment(self) -> dict[str, int]:
        """Dominant topic per document; ties break to the lowest topic index."""
        self._check_fitted()
        return {
            doc_id: int(np.argmax(self.doc_topic_[d]))
            for d, doc_id in enumerate(self.doc_ids_)
        }

    def top_keywords(self, topic: int, n: int) -> list[str]:
        """The n most probable terms of one topic, ties broken alphabetically."""
        self._check_fitted()
        if not 0 <= topic < self.n_topics:
            raise ValueError(f"topic {topic} out of range [0, {self.n_topics})")
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        row = self.topic_word_[topic]
        order = sorted(
            range(self.vocabulary_.size),
            key=lambda i: (-row[i], self.vocabulary_.term(i)),
        )
        return [self.vocabulary_.term(i) for i in order[:n]]

    def used_topic_count(self) -> int:
        """Number of distinct topics that are some document's dominant topic."""
        return len(set(self.doc_topic_assignment().values()))
