from fractions import Fraction

import numpy as np
import pytest

from oracles import count_threshold_chain, crf_top_token_share, synthetic_lda_corpus
from qtopics import (
    BowCorpus,
    ContractViolationError,
    EmptyCorpusError,
    EstimateChain,
    EstimateLevel,
    GibbsHdp,
    GibbsLda,
    Vocabulary,
    efficiency_ratio,
    estimate_topic_count,
    recursive_estimate,
    rethreshold_chain,
    significant_topic_count,
)


def _single_word_bow(n_docs=20, doc_len=3):
    vocab = Vocabulary(["x"])
    return BowCorpus(
        docs=tuple({0: doc_len} for _ in range(n_docs)),
        vocabulary=vocab,
        doc_ids=tuple(f"D{i}" for i in range(n_docs)),
    )


class TestGibbsHdpFit:
    def test_weights_normalized_and_sorted(self, two_word_bow):
        model = GibbsHdp(k_max=10, iterations=200, burn_in=100, seed=3).fit(two_word_bow)
        assert abs(model.weights_.sum() - 1.0) < 1e-9
        assert np.all(np.diff(model.weights_) <= 0)
        assert np.all(model.weights_ >= 0)

    def test_seed_determinism(self, two_word_bow):
        fits = [
            GibbsHdp(k_max=10, iterations=200, burn_in=100, seed=5).fit(two_word_bow)
            for _ in range(2)
        ]
        assert np.array_equal(fits[0].weights_, fits[1].weights_)
        assert np.array_equal(fits[0].topic_word_, fits[1].topic_word_)

    def test_single_word_corpus_matches_prior_oracle(self):
        # With one vocabulary item the word likelihood is flat, so the
        # posterior over assignments equals the HDP prior; the top reported
        # weight must match a forward simulation of that prior (Chinese
        # restaurant franchise).
        bow = _single_word_bow(20, 3)
        oracle = crf_top_token_share(20, 3, gamma=1.0, alpha0=1.0, n_sims=2000, seed=5)
        model = GibbsHdp(
            gamma=1.0, alpha0=1.0, beta_word=0.01, k_max=30,
            iterations=600, burn_in=200, seed=2,
        ).fit(bow)
        assert abs(float(model.weights_[0]) - oracle) < 0.1

    def test_single_word_corpus_concentrates_at_small_gamma(self):
        # Small gamma makes new topics expensive: mass piles onto one topic.
        bow = _single_word_bow(20, 3)
        oracle = crf_top_token_share(20, 3, gamma=0.1, alpha0=1.0, n_sims=2000, seed=6)
        model = GibbsHdp(
            gamma=0.1, alpha0=1.0, beta_word=0.01, k_max=30,
            iterations=600, burn_in=200, seed=2,
        ).fit(bow)
        assert oracle > 0.85
        assert float(model.weights_[0]) > 0.75
        assert abs(float(model.weights_[0]) - oracle) < 0.1

    def test_distinct_content_instantiates_topics(self):
        vocab = Vocabulary(["a", "b", "c"])
        bow = BowCorpus(
            docs=({0: 8}, {1: 8}, {2: 8}),
            vocabulary=vocab,
            doc_ids=("D1", "D2", "D3"),
        )
        model = GibbsHdp(gamma=2.0, k_max=10, iterations=300, burn_in=150, seed=1).fit(bow)
        # three clearly separated documents need three topics
        assert estimate_topic_count(model.weights_, 0.1) == 3

    def test_truncation_flag(self):
        vocab = Vocabulary(["a", "b", "c", "d"])
        bow = BowCorpus(
            docs=({0: 6}, {1: 6}, {2: 6}, {3: 6}),
            vocabulary=vocab,
            doc_ids=("D1", "D2", "D3", "D4"),
        )
        model = GibbsHdp(gamma=5.0, k_max=2, iterations=100, burn_in=50, seed=0).fit(bow)
        assert model.truncation_reached_
        assert model.n_active_ <= 2

    def test_empty_corpus_rejected(self):
        vocab = Vocabulary(["a"])
        with pytest.raises(EmptyCorpusError):
            GibbsHdp(k_max=4, iterations=2, burn_in=1).fit(
                BowCorpus(docs=(), vocabulary=vocab, doc_ids=())
            )

    def test_bad_params_rejected(self, two_word_bow):
        with pytest.raises(ValueError):
            GibbsHdp(gamma=0.0).fit(two_word_bow)
        with pytest.raises(ValueError):
            GibbsHdp(k_max=1).fit(two_word_bow)
        with pytest.raises(ValueError):
            GibbsHdp(burn_in=10, iterations=10).fit(two_word_bow)


class TestEstimateTopicCount:
    def test_direct_count(self):
        assert estimate_topic_count([0.5, 0.3, 0.1, 0.06, 0.04], 0.05) == 4

    def test_first_level_threshold_for_1300_documents(self):
        # 1/n criterion at n=1300
        threshold = Fraction(1, 1300)
        assert float(threshold) == pytest.approx(0.000769, abs=1e-6)
        weights = [0.9, 0.0993, 0.0007]
        assert estimate_topic_count(weights, threshold) == 2

    def test_clamp_floor(self):
        assert estimate_topic_count([0.6, 0.4], 0.99) == 1

    def test_unnormalized_weights_rejected(self):
        with pytest.raises(ContractViolationError):
            estimate_topic_count([0.5, 0.3], 0.05)

    def test_bad_threshold_rejected(self):
        with pytest.raises(ValueError):
            estimate_topic_count([1.0], 0.0)
        with pytest.raises(ValueError):
            estimate_topic_count([1.0], 1.5)


class TestRethresholdChain:
    def test_worked_example_against_counting_oracle(self):
        # weights [0.4,0.3,0.2,0.05,0.03,0.02], n=100, depth=3.
        # Oracle derivation: 1/100 keeps all 6; 1/6 keeps {0.4,0.3,0.2};
        # 1/3 keeps only 0.4 (0.3 < 1/3), so the third estimate is 1.
        weights = [0.4, 0.3, 0.2, 0.05, 0.03, 0.02]
        oracle = count_threshold_chain(weights, 100, 3)
        assert [(lvl[0], lvl[1]) for lvl in oracle] == [
            (Fraction(1, 100), 6),
            (Fraction(1, 6), 3),
            (Fraction(1, 3), 1),
        ]
        chain = rethreshold_chain(weights, 100, 3)
        assert [(l.threshold, l.estimate) for l in chain.levels] == oracle

    def test_random_vectors_match_oracle_exactly(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            size = int(rng.integers(2, 30))
            weights = rng.dirichlet(np.full(size, 0.5)).tolist()
            n = int(rng.integers(1, 2000))
            depth = int(rng.integers(1, 12))
            chain = rethreshold_chain(weights, n, depth)
            oracle = count_threshold_chain(weights, n, depth)
            assert [(l.threshold, l.estimate) for l in chain.levels] == oracle

    def test_monotone_and_fixed_point(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            weights = rng.dirichlet(np.full(12, 0.4)).tolist()
            chain = rethreshold_chain(weights, 500, 10)
            estimates = [l.estimate for l in chain.levels]
            assert all(a >= b for a, b in zip(estimates, estimates[1:]))
            # fixed point well before depth = first estimate
            assert estimates[-1] == estimates[-2]

    def test_zeno_collapse_to_one(self):
        # Hand-derived: 1/10 keeps all 3 -> 3; 1/3 keeps only 0.7 -> 1;
        # threshold 1 keeps nothing (clamped) -> pinned at 1.
        chain = rethreshold_chain([0.7, 0.2, 0.1], 10, 6)
        assert [l.estimate for l in chain.levels] == [3, 1, 1, 1, 1, 1]
        # A two-atom equal split survives its own threshold forever.
        collapsed = rethreshold_chain([0.5, 0.5], 2, 5)
        assert [l.estimate for l in collapsed.levels] == [2, 2, 2, 2, 2]
        # Immediate collapse: 1/3 keeps only 0.6 -> 1, then pinned.
        degenerate = rethreshold_chain([0.6, 0.25, 0.15], 3, 5)
        assert [l.estimate for l in degenerate.levels] == [1, 1, 1, 1, 1]

    def test_threshold_chaining_exact(self):
        weights = [0.55, 0.25, 0.1, 0.05, 0.05]
        chain = rethreshold_chain(weights, 77, 6)
        for prev, nxt in zip(chain.levels, chain.levels[1:]):
            assert nxt.threshold * max(prev.estimate, 1) == 1

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            rethreshold_chain([1.0], 10, 0)
        with pytest.raises(ValueError):
            rethreshold_chain([1.0], 0, 2)


class TestEstimateChainType:
    def test_invariants_enforced(self):
        with pytest.raises(ValueError, match="first threshold"):
            EstimateChain(
                levels=(EstimateLevel(Fraction(1, 5), 2),), mode="rerun", corpus_size=10
            )
        with pytest.raises(ValueError, match="chaining"):
            EstimateChain(
                levels=(
                    EstimateLevel(Fraction(1, 10), 4),
                    EstimateLevel(Fraction(1, 5), 2),
                ),
                mode="rerun",
                corpus_size=10,
            )
        with pytest.raises(ValueError, match=">= 1"):
            EstimateChain(
                levels=(EstimateLevel(Fraction(1, 10), 0),), mode="rerun", corpus_size=10
            )

    def test_rows_serialization(self):
        chain = EstimateChain(
            levels=(EstimateLevel(Fraction(1, 10), 4), EstimateLevel(Fraction(1, 4), 2)),
            mode="rethreshold",
            corpus_size=10,
        )
        assert chain.rows() == [(1, 0.1, 4, "rethreshold"), (2, 0.25, 2, "rethreshold")]
        assert chain.hdp1 == 4 and chain.hdp2 == 2


@pytest.fixture(scope="module")
def small_synthetic():
    bow, _ = synthetic_lda_corpus(60, 20, 3, 20, alpha=0.1, eta=0.1, seed=77)
    return bow


class TestRecursiveEstimate:
    def test_rerun_mode_deterministic_chain(self, small_synthetic):
        hdp = GibbsHdp(gamma=2.0, k_max=30, iterations=120, burn_in=60, seed=9)
        chains = [
            recursive_estimate(small_synthetic, hdp, depth=2, mode="rerun")
            for _ in range(2)
        ]
        assert chains[0] == chains[1]
        assert chains[0].mode == "rerun"
        assert chains[0].corpus_size == 60
        assert chains[0].levels[0].threshold == Fraction(1, 60)
        assert chains[0].levels[1].threshold == Fraction(1, chains[0].hdp1)

    def test_rethreshold_mode_monotone(self, small_synthetic):
        hdp = GibbsHdp(gamma=2.0, k_max=30, iterations=120, burn_in=60, seed=9)
        chain = recursive_estimate(small_synthetic, hdp, depth=5, mode="rethreshold")
        estimates = [l.estimate for l in chain.levels]
        assert all(a >= b for a, b in zip(estimates, estimates[1:]))

    def test_prototype_not_mutated(self, small_synthetic):
        hdp = GibbsHdp(gamma=2.0, k_max=30, iterations=60, burn_in=30, seed=9)
        recursive_estimate(small_synthetic, hdp, depth=2, mode="rerun")
        assert hdp.seed == 9
        assert not hasattr(hdp, "weights_")

    def test_bad_depth_and_mode(self, small_synthetic):
        hdp = GibbsHdp(iterations=4, burn_in=2)
        with pytest.raises(ValueError):
            recursive_estimate(small_synthetic, hdp, depth=0)
        with pytest.raises(ValueError):
            recursive_estimate(small_synthetic, hdp, depth=2, mode="refit")


class TestEfficiencyRatio:
    def test_basic(self, two_word_bow):
        model = GibbsLda(n_topics=2, alpha=0.1, eta=0.1, iterations=100, burn_in=50, seed=0).fit(
            two_word_bow
        )
        ratio = efficiency_ratio(2, model)
        assert ratio == model.used_topic_count() / 2
        assert 0 < ratio <= 1

    def test_upper_bound_when_all_topics_used(self, two_word_bow):
        model = GibbsLda(n_topics=1, iterations=20, burn_in=10, seed=0).fit(two_word_bow)
        assert efficiency_ratio(1, model) == 1.0

    def test_zero_estimate_rejected(self, two_word_bow):
        model = GibbsLda(n_topics=1, iterations=20, burn_in=10, seed=0).fit(two_word_bow)
        with pytest.raises(ValueError):
            efficiency_ratio(0, model)

    def test_mismatched_model_rejected(self, two_word_bow):
        model = GibbsLda(n_topics=2, iterations=20, burn_in=10, seed=0).fit(two_word_bow)
        with pytest.raises(ValueError, match="fitted with"):
            efficiency_ratio(3, model)


class TestSignificantTopicCount:
    def test_single_topic(self):
        assignment = {f"D{i}": 0 for i in range(50)}
        assert significant_topic_count(assignment, 0.02) == 1

    def test_threshold_counts(self):
        assignment = {}
        sizes = {0: 50, 1: 30, 2: 15, 3: 5}
        i = 0
        for topic, size in sizes.items():
            for _ in range(size):
                assignment[f"D{i}"] = topic
                i += 1
        assert significant_topic_count(assignment, 0.20) == 2
        assert significant_topic_count(assignment, 0.06) == 3
        assert significant_topic_count(assignment, 0.05) == 4  # boundary is inclusive
        assert significant_topic_count(assignment, 0.01) == 4

    def test_bad_fraction(self):
        with pytest.raises(ValueError):
            significant_topic_count({"D1": 0}, 0.0)
        with pytest.raises(ValueError):
            significant_topic_count({"D1": 0}, 1.0)
