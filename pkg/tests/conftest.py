import json
from pathlib import Path

import pytest

from qtopics import BowCorpus, GibbsHdp, GibbsLda, Vocabulary, load_corpus

TESTS_DIR = Path(__file__).parent
FIXTURE_PATH = TESTS_DIR / "data" / "tagging_fixture.txt"
GOLDEN_PATH = TESTS_DIR / "golden" / "tagging_expected.json"


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # Trigger numba compilation up front so timed tests measure the
    # algorithms, not the JIT.
    vocab = Vocabulary(["a", "b"])
    bow = BowCorpus(docs=({0: 2}, {1: 2}), vocabulary=vocab, doc_ids=("W1", "W2"))
    GibbsLda(n_topics=2, iterations=2, burn_in=1, seed=0).fit(bow)
    GibbsHdp(k_max=4, iterations=2, burn_in=1, seed=0).fit(bow)


@pytest.fixture(scope="session")
def fixture_corpus():
    return load_corpus(FIXTURE_PATH, format="plain_text", id_prefix="F")


@pytest.fixture(scope="session")
def golden_tagging():
    data = json.loads(GOLDEN_PATH.read_text(encoding="utf-8"))
    data.pop("_comment", None)
    return data


@pytest.fixture
def two_word_bow():
    vocab = Vocabulary(["a", "b"])
    return BowCorpus(docs=({0: 3}, {1: 3}), vocabulary=vocab, doc_ids=("D1", "D2"))
