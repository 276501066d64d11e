"""qtopics: topic clustering for subject-specific question banks.

Pipeline: ingest a question bank, inject contextual domain tags so code
keywords survive stop-word removal, estimate the topic count with the
recursive HDP estimator (HDP-1 at threshold 1/n, HDP-2 at 1/x), fit
collapsed-Gibbs LDA at that count, and compare tagged vs untagged
clusterings.
"""

__version__ = "0.1.0"

from .corpus import (
    Corpus,
    CorpusFormatError,
    Document,
    EmptyCorpusError,
    load_corpus,
    permute,
    prefix,
    shuffled_order,
)
from .experiments import (
    ClusterComparison,
    GrowthRow,
    MatchedPair,
    compare_clusterings,
    growth_experiment,
    permutation_experiment,
    redistribution,
)
from .hdp import (
    EstimateChain,
    EstimateLevel,
    GibbsHdp,
    efficiency_ratio,
    estimate_topic_count,
    recursive_estimate,
    rethreshold_chain,
    significant_topic_count,
)
from .lda import GibbsLda, gibbs_conditional
from .preprocess import (
    BowCorpus,
    EmptyVocabularyError,
    OutOfVocabularyError,
    Preprocessor,
    TagLexicon,
    TagRule,
    Vocabulary,
    apply_tags,
    build_vocabulary,
    default_lexicon,
    detect_code_spans,
    load_lexicon,
    load_stopwords,
    preprocess_document,
    strip_stopwords_punct,
    to_bow,
    tokenize,
)
from .validation import ContractViolationError

__all__ = [
    "BowCorpus",
    "ClusterComparison",
    "ContractViolationError",
    "Corpus",
    "CorpusFormatError",
    "Document",
    "EmptyCorpusError",
    "EmptyVocabularyError",
    "EstimateChain",
    "EstimateLevel",
    "GibbsHdp",
    "GibbsLda",
    "GrowthRow",
    "MatchedPair",
    "OutOfVocabularyError",
    "Preprocessor",
    "TagLexicon",
    "TagRule",
    "Vocabulary",
    "apply_tags",
    "build_vocabulary",
    "compare_clusterings",
    "default_lexicon",
    "detect_code_spans",
    "efficiency_ratio",
    "estimate_topic_count",
    "gibbs_conditional",
    "growth_experiment",
    "load_corpus",
    "load_lexicon",
    "load_stopwords",
    "permutation_experiment",
    "permute",
    "prefix",
    "preprocess_document",
    "recursive_estimate",
    "redistribution",
    "rethreshold_chain",
    "shuffled_order",
    "significant_topic_count",
    "strip_stopwords_punct",
    "to_bow",
    "tokenize",
]
