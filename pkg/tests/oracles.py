"""Independent oracles for the test suite.

Everything here is computed by a different route than the library code it
checks: exact rational arithmetic, exhaustive enumeration, forward
simulation from generative processes, and brute-force set arithmetic.
Nothing calls back into the sampler or matching code paths under test.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from qtopics.preprocess import BowCorpus, Vocabulary


def exact_conditional(n_dk, n_kw, n_k, alpha: Fraction, eta: Fraction, vocab_size: int):
    """Collapsed conditional evaluated in exact rational arithmetic."""
    weights = [
        (Fraction(a) + alpha) * (Fraction(b) + eta) / (Fraction(c) + vocab_size * eta)
        for a, b, c in zip(n_dk, n_kw, n_k)
    ]
    total = sum(weights)
    return [w / total for w in weights]


def _rising(base: Fraction, n: int) -> Fraction:
    out = Fraction(1)
    for i in range(n):
        out *= base + i
    return out


def enumerate_lda_posterior(doc_words, vocab_size: int, n_topics: int,
                            alpha: Fraction, eta: Fraction):
    """Exact LDA posterior summaries by enumerating all K^N assignments.

    ``doc_words`` is a list of word-index lists (one per document).
    Returns (theta_mean, p_dominant_differ): the exact posterior mean of
    the smoothed document-topic rows, and for two-document instances the
    exact probability that the documents' dominant topics differ (a
    label-permutation-invariant quantity, unlike theta itself).
    """
    n_docs = len(doc_words)
    flat = [(d, w) for d, words in enumerate(doc_words) for w in words]
    doc_len = [len(words) for words in doc_words]
    total_weight = Fraction(0)
    theta_acc = [[Fraction(0)] * n_topics for _ in range(n_docs)]
    p_differ = Fraction(0)
    for z in itertools.product(range(n_topics), repeat=len(flat)):
        n_dk = [[0] * n_topics for _ in range(n_docs)]
        n_kw = [[0] * vocab_size for _ in range(n_topics)]
        n_k = [0] * n_topics
        for (d, w), k in zip(flat, z):
            n_dk[d][k] += 1
            n_kw[k][w] += 1
            n_k[k] += 1
        weight = Fraction(1)
        for d in range(n_docs):
            for k in range(n_topics):
                weight *= _rising(alpha, n_dk[d][k])
        for k in range(n_topics):
            for w in range(vocab_size):
                weight *= _rising(eta, n_kw[k][w])
            weight /= _rising(vocab_size * eta, n_k[k])
        total_weight += weight
        for d in range(n_docs):
            for k in range(n_topics):
                theta_acc[d][k] += (
                    weight * (n_dk[d][k] + alpha) / (doc_len[d] + n_topics * alpha)
                )
        dominants = [row.index(max(row)) for row in n_dk]
        if len(set(dominants)) == n_docs:
            p_differ += weight
    theta_mean = [[v / total_weight for v in row] for row in theta_acc]
    return theta_mean, p_differ / total_weight


def count_threshold_chain(weights, corpus_size: int, depth: int):
    """Direct counting oracle for the recursive estimator (rethreshold mode).

    Returns [(threshold, estimate)] with exact Fraction thresholds and the
    clamp-at-1 floor applied.
    """
    levels = []
    x = None
    for i in range(depth):
        threshold = Fraction(1, corpus_size) if i == 0 else Fraction(1, max(x, 1))
        count = sum(1 for w in weights if w >= threshold)
        x = max(1, count)
        levels.append((threshold, x))
    return levels


def greedy_match_oracle(assign_a, assign_b):
    """Independent replay of the documented matching policy.

    Returns (pairs, unmatched_a, unmatched_b) where each pair is
    (topic_a, topic_b, size_a, size_b, intersection, jaccard, containment)
    computed by brute-force set arithmetic.
    """
    members_a: dict[int, set] = {}
    members_b: dict[int, set] = {}
    for doc, topic in assign_a.items():
        members_a.setdefault(topic, set()).add(doc)
    for doc, topic in assign_b.items():
        members_b.setdefault(topic, set()).add(doc)
    available = set(members_b)
    pairs = []
    unmatched_a = []
    for topic_a in sorted(members_a, key=lambda t: (-len(members_a[t]), t)):
        set_a = members_a[topic_a]
        best = max(
            available,
            key=lambda b: (len(set_a & members_b[b]) / len(set_a | members_b[b]), -b),
            default=None,
        )
        if best is None or len(set_a & members_b[best]) == 0:
            unmatched_a.append(topic_a)
            continue
        available.discard(best)
        set_b = members_b[best]
        inter = len(set_a & set_b)
        pairs.append(
            (
                topic_a,
                best,
                len(set_a),
                len(set_b),
                inter,
                inter / len(set_a | set_b),
                inter / len(set_a),
            )
        )
    return pairs, sorted(unmatched_a), sorted(available)


def redistribution_oracle(source_topic, assign_a, assign_b):
    counts: dict[int, int] = {}
    for doc, topic in assign_a.items():
        if topic == source_topic:
            counts[assign_b[doc]] = counts.get(assign_b[doc], 0) + 1
    return counts


def synthetic_lda_corpus(n_docs, tokens_per_doc, n_topics, vocab_size,
                         alpha, eta, seed):
    """Forward-sample a corpus from the LDA generative process.

    Returns (BowCorpus, true topic-word matrix).  The true matrix rows are
    the Dirichlet(eta) topic-word distributions the documents were drawn
    from; they are the ground truth for recovery checks.
    """
    rng = np.random.default_rng(seed)
    topic_word = rng.dirichlet([eta] * vocab_size, size=n_topics)
    cumulative = np.cumsum(topic_word, axis=1)
    docs = []
    for _ in range(n_docs):
        theta = rng.dirichlet([alpha] * n_topics)
        topics = rng.choice(n_topics, size=tokens_per_doc, p=theta)
        counts: dict[int, int] = {}
        for k in topics:
            w = int(np.searchsorted(cumulative[k], rng.random()))
            w = min(w, vocab_size - 1)
            counts[w] = counts.get(w, 0) + 1
        docs.append(counts)
    vocabulary = Vocabulary([f"w{j}" for j in range(vocab_size)])
    bow = BowCorpus(
        docs=tuple(docs),
        vocabulary=vocabulary,
        doc_ids=tuple(f"S{i + 1}" for i in range(n_docs)),
    )
    return bow, topic_word


def mean_matched_cosine(true_topic_word, fitted_topic_word):
    """Greedily match true topics to fitted topics by cosine; mean cosine."""
    true_rows = np.asarray(true_topic_word, dtype=float)
    fit_rows = np.asarray(fitted_topic_word, dtype=float)
    true_unit = true_rows / np.linalg.norm(true_rows, axis=1, keepdims=True)
    fit_unit = fit_rows / np.linalg.norm(fit_rows, axis=1, keepdims=True)
    sims = true_unit @ fit_unit.T
    available = list(range(fit_rows.shape[0]))
    scores = []
    for t in range(true_rows.shape[0]):
        best = max(available, key=lambda j: sims[t, j])
        scores.append(sims[t, best])
        available.remove(best)
        if not available:
            break
    return float(np.mean(scores))


def crf_top_token_share(n_docs, doc_len, gamma, alpha0, n_sims, seed):
    """Monte-Carlo E[largest topic's token share] under the HDP prior.

    Forward simulation via the Chinese-restaurant-franchise construction.
    With a single-symbol vocabulary the likelihood is flat, so the model
    posterior over assignments equals this prior and the simulated value is
    the ground truth for the sampler's top reported weight.
    """
    rng = np.random.default_rng(seed)
    shares = []
    for _ in range(n_sims):
        dish_tables: list[int] = []
        dish_tokens: list[int] = []
        for _ in range(n_docs):
            table_counts: list[int] = []
            table_dish: list[int] = []
            for i in range(doc_len):
                r = rng.random() * (i + alpha0)
                acc = 0.0
                table = None
                for t, cnt in enumerate(table_counts):
                    acc += cnt
                    if r < acc:
                        table = t
                        break
                if table is None:
                    total_tables = sum(dish_tables)
                    r2 = rng.random() * (total_tables + gamma)
                    acc2 = 0.0
                    dish = None
                    for k, m in enumerate(dish_tables):
                        acc2 += m
                        if r2 < acc2:
                            dish = k
                            break
                    if dish is None:
                        dish_tables.append(0)
                        dish_tokens.append(0)
                        dish = len(dish_tables) - 1
                    dish_tables[dish] += 1
                    table_counts.append(0)
                    table_dish.append(dish)
                    table = len(table_counts) - 1
                table_counts[table] += 1
                dish_tokens[table_dish[table]] += 1
        shares.append(max(dish_tokens) / (n_docs * doc_len))
    return float(np.mean(shares))
