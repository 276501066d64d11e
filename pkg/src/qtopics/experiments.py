"""Growth-curve, permutation, and tagged-vs-untagged comparison experiments.

Every function emits plain data structures that the CLI serializes to
plot-ready CSV; nothing here touches the filesystem.
"""
from __future__ import annotations

from dataclasses import dataclass

from sklearn.base import clone

from .corpus import shuffled_order
from .hdp import GibbsHdp, RERUN, recursive_estimate
from .lda import GibbsLda
from .preprocess import BowCorpus


@dataclass(frozen=True)
class GrowthRow:
    """One prefix size: estimates, used-topic counts, and efficiency ratios."""

    n_questions: int
    hdp1_estimate: int
    hdp1_used: int
    hdp1_efficiency: float
    hdp2_estimate: int
    hdp2_used: int
    hdp2_efficiency: float

    def __post_init__(self):
        for name in ("hdp1", "hdp2"):
            used = getattr(self, f"{name}_used")
            estimate = getattr(self, f"{name}_estimate")
            efficiency = getattr(self, f"{name}_efficiency")
            if used > estimate:
                raise ValueError(f"{name}: used {used} exceeds estimate {estimate}")
            if abs(efficiency - used / estimate) > 1e-12:
                raise ValueError(f"{name}: efficiency is not used/estimate")


def _prefix_sizes(total: int, step: int) -> list[int]:
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    sizes = list(range(step, total + 1, step))
    if not sizes or sizes[-1] != total:
        sizes.append(total)  # step > total collapses to one full-corpus row
    return sizes


def growth_experiment(
    corpus: BowCorpus,
    step: int,
    lda: GibbsLda,
    hdp: GibbsHdp,
    mode: str = RERUN,
) -> list[GrowthRow]:
    """Estimates and efficiency ratios on growing prefixes of the corpus.

    For each prefix size n in {step, 2*step, ...} up to the corpus size,
    runs the depth-2 recursive estimator, fits LDA at the HDP-1 and HDP-2
    estimates, and records how many topics each fit actually uses.
    """
    rows = []
    for n in _prefix_sizes(corpus.n_documents, step):
        sub = corpus.prefix(n)
        chain = recursive_estimate(sub, hdp, depth=2, mode=mode)
        used = {}
        for k in {chain.hdp1, chain.hdp2}:
            model = clone(lda)
            model.set_params(n_topics=k)
            used[k] = model.fit(sub).used_topic_count()
        rows.append(
            GrowthRow(
                n_questions=n,
                hdp1_estimate=chain.hdp1,
                hdp1_used=used[chain.hdp1],
                hdp1_efficiency=used[chain.hdp1] / chain.hdp1,
                hdp2_estimate=chain.hdp2,
                hdp2_used=used[chain.hdp2],
                hdp2_efficiency=used[chain.hdp2] / chain.hdp2,
            )
        )
    return rows


def permutation_experiment(
    corpus: BowCorpus,
    n_perms: int,
    seeds,
    step: int,
    lda: GibbsLda,
    hdp: GibbsHdp,
    mode: str = RERUN,
) -> list[tuple[int, list[GrowthRow]]]:
    """The growth experiment repeated over seeded document permutations."""
    seeds = list(seeds)
    if len(seeds) != n_perms:
        raise ValueError(f"expected {n_perms} seeds, got {len(seeds)}")
    if len(set(seeds)) != len(seeds):
        raise ValueError("permutation seeds must be distinct")
    results = []
    for seed in seeds:
        order = shuffled_order(corpus.n_documents, seed)
        permuted = corpus.reorder(order.tolist())
        results.append((seed, growth_experiment(permuted, step, lda, hdp, mode=mode)))
    return results


@dataclass(frozen=True)
class MatchedPair:
    topic_a: int
    topic_b: int
    size_a: int
    size_b: int
    intersection: int
    jaccard: float
    containment: float


@dataclass(frozen=True)
class ClusterComparison:
    """Greedy topic matching between two hard clusterings of one corpus."""

    matched_pairs: tuple[MatchedPair, ...]
    unmatched_a: tuple[int, ...]
    unmatched_b: tuple[int, ...]
    source_topic: int | None = None
    redistribution: dict[int, int] | None = None


def _members_by_topic(assignment) -> dict[int, set]:
    topics: dict[int, set] = {}
    for doc_id, topic in assignment.items():
        topics.setdefault(topic, set()).add(doc_id)
    return topics


def compare_clusterings(assign_a, assign_b, source_topic=None) -> ClusterComparison:
    """Match each A-topic to its best-Jaccard B-topic, greedily by A size.

    A topics are visited largest first (ties to the lower index); each B
    topic can be claimed once; pairs report Jaccard and containment
    (|A&B| / |A|).  A topics whose best available Jaccard is 0 stay
    unmatched, as do unclaimed B topics.  Passing ``source_topic`` also
    records where that A-topic's questions land under B.
    """
    ids_a, ids_b = set(assign_a), set(assign_b)
    if ids_a != ids_b:
        diff = sorted(ids_a ^ ids_b)
        raise ValueError(f"clusterings cover different documents: {diff}")
    topics_a = _members_by_topic(assign_a)
    topics_b = _members_by_topic(assign_b)
    available = set(topics_b)
    pairs = []
    unmatched_a = []
    for topic_a in sorted(topics_a, key=lambda t: (-len(topics_a[t]), t)):
        members_a = topics_a[topic_a]
        best_b, best_jaccard = None, 0.0
        for topic_b in sorted(available):
            members_b = topics_b[topic_b]
            inter = len(members_a & members_b)
            if inter == 0:
                continue
            jaccard = inter / len(members_a | members_b)
            if jaccard > best_jaccard:
                best_b, best_jaccard = topic_b, jaccard
        if best_b is None:
            unmatched_a.append(topic_a)
            continue
        available.discard(best_b)
        members_b = topics_b[best_b]
        inter = len(members_a & members_b)
        pairs.append(
            MatchedPair(
                topic_a=topic_a,
                topic_b=best_b,
                size_a=len(members_a),
                size_b=len(members_b),
                intersection=inter,
                jaccard=inter / len(members_a | members_b),
                containment=inter / len(members_a),
            )
        )
    result = ClusterComparison(
        matched_pairs=tuple(pairs),
        unmatched_a=tuple(sorted(unmatched_a)),
        unmatched_b=tuple(sorted(available)),
    )
    if source_topic is not None:
        result = ClusterComparison(
            matched_pairs=result.matched_pairs,
            unmatched_a=result.unmatched_a,
            unmatched_b=result.unmatched_b,
            source_topic=source_topic,
            redistribution=redistribution(source_topic, assign_a, assign_b),
        )
    return result


def redistribution(source_topic, assign_a, assign_b) -> dict[int, int]:
    """Where the source A-topic's documents land under clustering B.

    The returned counts partition the source topic: they sum to its size.
    """
    members = [doc_id for doc_id, topic in assign_a.items() if topic == source_topic]
    if not members:
        raise ValueError(f"topic {source_topic} not present in the source clustering")
    missing = [doc_id for doc_id in members if doc_id not in assign_b]
    if missing:
        raise ValueError(f"documents missing from the target clustering: {sorted(missing)}")
    counts: dict[int, int] = {}
    for doc_id in members:
        dest = assign_b[doc_id]
        counts[dest] = counts.get(dest, 0) + 1
    return counts
