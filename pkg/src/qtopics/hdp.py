"""Hierarchical Dirichlet process sampling and recursive topic-count estimation.

The sampler is a truncated direct-assignment collapsed Gibbs scheme: tokens
are assigned directly to global topics, global topic weights are resampled
every sweep from Antoniak-distributed table counts plus the concentration
``gamma`` (the stick-breaking residual feeds the new-topic slot), and empty
topics are compacted away between sweeps.  Only the resulting weight vector
feeds the estimator, which counts topics whose weight clears a significance
threshold: 1/n on the first level (n documents), then 1/x where x is the
previous level's estimate.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, clone

from ._kernels import antoniak_table_counts, hdp_sweep
from .corpus import EmptyCorpusError
from .lda import GibbsLda, _flatten
from .preprocess import BowCorpus
from .validation import check_positive, check_weights_normalized

RERUN = "rerun"
RETHRESHOLD = "rethreshold"


class GibbsHdp(BaseEstimator):
    """Truncated direct-assignment Gibbs sampler for the HDP topic model.

    Parameters
    ----------
    gamma : top-level concentration; larger values instantiate more topics.
    alpha0 : document-level concentration.
    beta_word : topic-word concentration.
    k_max : truncation ceiling; ``None`` uses min(150, n_documents).
    iterations, burn_in, seed : as in :class:`~qtopics.lda.GibbsLda`.

    Fitted attributes: ``weights_`` -- per-topic posterior token-mass
    shares averaged over post-burn-in sweeps, length ``k_max_``, sorted
    descending and summing to 1; ``topic_word_`` -- smoothed topic-word
    rows from the final sweep, ordered by final share; ``token_topics_``,
    ``n_active_``, ``truncation_reached_``.
    """

    def __init__(
        self,
        gamma=1.0,
        alpha0=1.0,
        beta_word=0.01,
        k_max=None,
        iterations=1000,
        burn_in=500,
        seed=0,
    ):
        self.gamma = gamma
        self.alpha0 = alpha0
        self.beta_word = beta_word
        self.k_max = k_max
        self.iterations = iterations
        self.burn_in = burn_in
        self.seed = seed

    def _check_params(self, n_docs):
        check_positive("gamma", self.gamma)
        check_positive("alpha0", self.alpha0)
        check_positive("beta_word", self.beta_word)
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError(
                f"burn_in must satisfy 0 <= burn_in < iterations, got {self.burn_in}"
            )
        k_max = self.k_max if self.k_max is not None else min(150, n_docs)
        if k_max < 2:
            raise ValueError(f"k_max must be >= 2, got {k_max}")
        return int(k_max)

    def fit(self, X: BowCorpus, y=None):
        bow = X
        if bow.n_documents == 0:
            raise EmptyCorpusError("cannot fit HDP on an empty corpus")
        if bow.n_tokens == 0:
            raise EmptyCorpusError("cannot fit HDP: no tokens in corpus")
        k_max = self._check_params(bow.n_documents)
        vocab_size = bow.vocabulary.size
        n_docs = bow.n_documents
        doc_ix, word_ix = _flatten(bow)
        n_tokens = doc_ix.size
        gamma = float(self.gamma)
        alpha0 = float(self.alpha0)
        beta_word = float(self.beta_word)

        rng = np.random.Generator(np.random.PCG64(self.seed))
        z = np.full(n_tokens, -1, dtype=np.int64)
        n_dk = np.zeros((n_docs, k_max), dtype=np.int64)
        n_kw = np.zeros((k_max, vocab_size), dtype=np.int64)
        n_k = np.zeros(k_max, dtype=np.int64)
        topic_weights = np.zeros(k_max, dtype=np.float64)
        new_weight = 1.0
        n_active = 0
        truncation_reached = False

        weight_acc = np.zeros(k_max)
        n_samples = 0
        for sweep in range(self.iterations):
            uniforms = rng.random(n_tokens)
            sticks = rng.beta(1.0, gamma, size=k_max)
            new_weight, n_active, truncated = hdp_sweep(
                doc_ix, word_ix, z, n_dk, n_kw, n_k,
                topic_weights, new_weight, n_active,
                alpha0, beta_word, uniforms, sticks,
            )
            truncation_reached = truncation_reached or truncated

            # Resample global weights from table counts; a topic that lost
            # all its tokens draws Gamma(0) = 0 and dies in compaction.
            table_uniforms = rng.random(n_tokens)
            m_k = antoniak_table_counts(n_dk, topic_weights, n_active, alpha0, table_uniforms)
            params = np.append(m_k.astype(np.float64), gamma)
            draws = rng.gamma(shape=params)
            draws /= draws.sum()
            topic_weights[:n_active] = draws[:-1]
            new_weight = draws[-1]

            n_active, new_weight = self._compact(
                z, n_dk, n_kw, n_k, topic_weights, n_active, new_weight
            )

            if sweep >= self.burn_in:
                shares = np.zeros(k_max)
                shares[:n_active] = n_k[:n_active] / n_tokens
                weight_acc += np.sort(shares)[::-1]
                n_samples += 1

        self.k_max_ = k_max
        self.weights_ = weight_acc / n_samples
        self.n_active_ = int(n_active)
        self.truncation_reached_ = truncation_reached
        self.doc_ids_ = bow.doc_ids
        self.vocabulary_ = bow.vocabulary

        # Final-sweep topic-word rows, relabeled so row 0 is the largest
        # topic of the last sweep; uninstantiated rows stay at the uniform
        # smoothing floor.
        order = np.argsort(-n_k[:n_active], kind="stable")
        phi = np.empty((k_max, vocab_size))
        phi[:n_active] = (n_kw[order] + beta_word) / (
            n_k[order] + vocab_size * beta_word
        )[:, None]
        phi[n_active:] = 1.0 / vocab_size
        self.topic_word_ = phi
        relabel = np.empty(n_active, dtype=np.int64)
        relabel[order] = np.arange(n_active)
        z_relabeled = relabel[z]
        doc_len = np.zeros(n_docs, dtype=np.int64)
        np.add.at(doc_len, doc_ix, 1)
        splits = np.cumsum(doc_len)[:-1]
        self.token_topics_ = tuple(np.split(z_relabeled, splits))
        return self

    @staticmethod
    def _compact(z, n_dk, n_kw, n_k, topic_weights, n_active, new_weight):
        """Drop empty instantiated topics, folding their weight into the residual."""
        alive = np.flatnonzero(n_k[:n_active] > 0)
        n_alive = alive.size
        if n_alive == n_active:
            return n_active, new_weight
        dead_mass = topic_weights[:n_active].sum() - topic_weights[alive].sum()
        remap = np.full(n_active, -1, dtype=np.int64)
        remap[alive] = np.arange(n_alive)
        z[:] = remap[z]
        n_dk[:, :n_alive] = n_dk[:, alive]
        n_dk[:, n_alive:n_active] = 0
        n_kw[:n_alive] = n_kw[alive]
        n_kw[n_alive:n_active] = 0
        n_k[:n_alive] = n_k[alive]
        n_k[n_alive:n_active] = 0
        topic_weights[:n_alive] = topic_weights[alive]
        topic_weights[n_alive:n_active] = 0.0
        return n_alive, new_weight + dead_mass


def estimate_topic_count(weights, threshold) -> int:
    """Number of topics whose weight clears ``threshold``, floored at 1.

    ``threshold`` may be a float or an exact :class:`fractions.Fraction`;
    comparisons against Fraction thresholds are exact.
    """
    weights = np.asarray(weights, dtype=np.float64)
    check_weights_normalized(weights)
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    count = sum(1 for w in weights.tolist() if w >= threshold)
    return max(1, count)


@dataclass(frozen=True)
class EstimateLevel:
    threshold: Fraction
    estimate: int


@dataclass(frozen=True)
class EstimateChain:
    """The recursive estimate sequence; level 0 is HDP-1, level 1 is HDP-2."""

    levels: tuple[EstimateLevel, ...]
    mode: str
    corpus_size: int

    def __post_init__(self):
        if not self.levels:
            raise ValueError("EstimateChain needs at least one level")
        if self.levels[0].threshold != Fraction(1, self.corpus_size):
            raise ValueError("first threshold must be 1/corpus_size")
        for i, level in enumerate(self.levels):
            if level.estimate < 1:
                raise ValueError(f"level {i}: estimate must be >= 1")
            if i > 0:
                expected = Fraction(1, max(self.levels[i - 1].estimate, 1))
                if level.threshold != expected:
                    raise ValueError(
                        f"level {i}: threshold {level.threshold} breaks the "
                        f"1/x chaining (expected {expected})"
                    )

    @property
    def hdp1(self) -> int:
        return self.levels[0].estimate

    @property
    def hdp2(self) -> int:
        if len(self.levels) < 2:
            raise ValueError("chain has no second level")
        return self.levels[1].estimate

    def rows(self):
        """``(level, threshold, estimate, mode)`` rows, levels numbered from 1."""
        return [
            (i + 1, float(level.threshold), level.estimate, self.mode)
            for i, level in enumerate(self.levels)
        ]


def _chain_thresholds(corpus_size: int, estimates):
    thresholds = [Fraction(1, corpus_size)]
    for estimate in estimates[:-1]:
        thresholds.append(Fraction(1, max(estimate, 1)))
    return thresholds


def rethreshold_chain(weights, corpus_size: int, depth: int) -> EstimateChain:
    """Apply the recursive thresholds to one fixed weight vector.

    The estimate sequence is non-increasing (at most n weights can reach
    1/n) and collapses to a fixed point; once the threshold reaches 1 the
    estimate pins at 1 unless some single weight carries all the mass.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if corpus_size < 1:
        raise ValueError(f"corpus_size must be >= 1, got {corpus_size}")
    levels = []
    threshold = Fraction(1, corpus_size)
    for _ in range(depth):
        estimate = estimate_topic_count(weights, threshold)
        levels.append(EstimateLevel(threshold=threshold, estimate=estimate))
        threshold = Fraction(1, max(estimate, 1))
    return EstimateChain(levels=tuple(levels), mode=RETHRESHOLD, corpus_size=corpus_size)


def recursive_estimate(
    corpus: BowCorpus, hdp: GibbsHdp, depth: int = 2, mode: str = RERUN
) -> EstimateChain:
    """Recursive HDP topic-count estimation (HDP-1, HDP-2, ...).

    ``rerun`` fits a fresh HDP per level (seed offset by the level index)
    and thresholds that run's weights; ``rethreshold`` fits once and
    re-applies every threshold to the same weight vector.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if mode not in (RERUN, RETHRESHOLD):
        raise ValueError(f"unknown mode {mode!r}")
    if corpus.n_documents == 0:
        raise EmptyCorpusError("cannot estimate on an empty corpus")
    n = corpus.n_documents
    if mode == RETHRESHOLD:
        model = clone(hdp).fit(corpus)
        return rethreshold_chain(model.weights_, n, depth)
    levels = []
    threshold = Fraction(1, n)
    for level_index in range(depth):
        model = clone(hdp)
        model.set_params(seed=hdp.seed + level_index)
        model.fit(corpus)
        estimate = estimate_topic_count(model.weights_, threshold)
        levels.append(EstimateLevel(threshold=threshold, estimate=estimate))
        threshold = Fraction(1, max(estimate, 1))
    return EstimateChain(levels=tuple(levels), mode=RERUN, corpus_size=n)


def efficiency_ratio(k_estimate: int, model: GibbsLda) -> float:
    """used_topic_count / k_estimate for an LDA fit at K = k_estimate."""
    if k_estimate < 1:
        raise ValueError(f"k_estimate must be >= 1, got {k_estimate}")
    if model.n_topics != k_estimate:
        raise ValueError(
            f"model was fitted with n_topics={model.n_topics}, not {k_estimate}"
        )
    return model.used_topic_count() / k_estimate


def significant_topic_count(assignment, min_fraction: float) -> int:
    """Topics holding at least ``min_fraction`` of all documents."""
    if not 0 < min_fraction < 1:
        raise ValueError(f"min_fraction must be in (0, 1), got {min_fraction}")
    total = len(assignment)
    if total == 0:
        return 0
    counts: dict[int, int] = {}
    for topic in assignment.values():
        counts[topic] = counts.get(topic, 0) + 1
    return sum(1 for c in counts.values() if c / total >= min_fraction)
