"""Tokenization, contextual domain tagging, and bag-of-words construction.

Generic stop-word removal deletes code keywords ("for", "if", "while") and
mathematical shorthand ("o" from O(n), "mod") from question text, so those
terms never reach the topic model.  The fix implemented here injects
reserved ``tag_*`` tokens for a configurable list of domain keywords, firing
only when the keyword occurs in the right context: code-keyword rules fire
only inside detected code excerpts, concept rules (big-O, modulo) fire
anywhere.  Tag tokens carry a ``tag_`` prefix that the tokenizer can never
emit, so they survive stop-word removal and cannot collide with natural
vocabulary.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from sklearn.base import BaseEstimator

from .corpus import Corpus, Document

TAG_PREFIX = "tag_"
CODE_EXCERPT = "code_excerpt"
ANYWHERE = "anywhere"

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Substrings / line shapes that vote for "this line is code".  A line is
# classified as code when it scores >= min_score (default 2) across:
# punctuation, indentation, >= 2 code keywords, trailing ':' or '{'.
_CODE_PUNCT = (";", "{", "}", "(", ")", "=")


class EmptyVocabularyError(ValueError):
    """Every document ended up empty after preprocessing."""


class OutOfVocabularyError(ValueError):
    """A token is missing from the fitted vocabulary."""


@dataclass(frozen=True)
class TagRule:
    """One domain keyword with its trigger variants and context gate."""

    tag_name: str
    surface_forms: tuple[str, ...]
    context: str = CODE_EXCERPT
    emitted_token: str = ""

    def __post_init__(self):
        if not self.surface_forms:
            raise ValueError(f"rule {self.tag_name!r}: surface_forms is empty")
        if self.context not in (CODE_EXCERPT, ANYWHERE):
            raise ValueError(f"rule {self.tag_name!r}: unknown context {self.context!r}")
        if not self.emitted_token:
            object.__setattr__(self, "emitted_token", TAG_PREFIX + self.tag_name.lower())
        if not self.emitted_token.startswith(TAG_PREFIX):
            raise ValueError(
                f"rule {self.tag_name!r}: emitted_token must carry the "
                f"reserved {TAG_PREFIX!r} prefix"
            )

    def patterns(self) -> list[re.Pattern]:
        return [_form_pattern(form) for form in self.surface_forms]


def _form_pattern(form: str) -> re.Pattern:
    # Word boundaries only where the form itself starts/ends alphanumeric,
    # so "O(" matches "O(n)" but not "foo(", and "%" matches bare.
    pat = re.escape(form)
    if form[:1].isalnum():
        pat = r"\b" + pat
    if form[-1:].isalnum():
        pat = pat + r"\b"
    return re.compile(pat, re.IGNORECASE)


@dataclass(frozen=True)
class TagLexicon:
    rules: tuple[TagRule, ...]
    code_keyword_set: frozenset[str]

    def __post_init__(self):
        names = [rule.tag_name for rule in self.rules]
        if len(set(names)) != len(names):
            raise ValueError("duplicate tag names in lexicon")

    def rule(self, tag_name: str) -> TagRule:
        for rule in self.rules:
            if rule.tag_name == tag_name:
                return rule
        raise KeyError(tag_name)


def _split_list(raw: str) -> list[str]:
    return [item.strip() for item in raw.split(",") if item.strip()]


def load_lexicon(path) -> TagLexicon:
    """Parse a tag lexicon from an INI-style config file.

    One ``[tag:<name>]`` section per rule with keys ``context`` and
    ``surface_forms`` (comma-separated); a ``[code_keywords]`` section
    lists the keywords used by code-span detection.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep surface forms verbatim
    with open(path, encoding="utf-8") as handle:
        parser.read_file(handle)
    keywords: frozenset[str] = frozenset()
    rules = []
    for section in parser.sections():
        if section == "code_keywords":
            keywords = frozenset(
                kw.lower() for kw in _split_list(parser[section]["keywords"])
            )
        elif section.startswith("tag:"):
            name = section[len("tag:"):]
            rules.append(
                TagRule(
                    tag_name=name,
                    surface_forms=tuple(_split_list(parser[section]["surface_forms"])),
                    context=parser[section].get("context", CODE_EXCERPT).strip(),
                    emitted_token=parser[section].get("emitted_token", "").strip(),
                )
            )
        else:
            raise ValueError(f"{path}: unknown section [{section}]")
    if not rules:
        raise ValueError(f"{path}: no [tag:*] sections found")
    return TagLexicon(rules=tuple(rules), code_keyword_set=keywords)


def default_lexicon() -> TagLexicon:
    """The bundled lexicon: bigo, modulo, for, if, while, else, elseif, print."""
    with resources.as_file(
        resources.files("qtopics.data").joinpath("default_tags.ini")
    ) as path:
        return load_lexicon(path)


def load_stopwords(path=None) -> frozenset[str]:
    """Newline-delimited stop-word list; ``None`` loads the bundled English list."""
    if path is None:
        text = (
            resources.files("qtopics.data")
            .joinpath("stopwords_en.txt")
            .read_text(encoding="utf-8")
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


def tokenize(raw_text: str) -> list[str]:
    """Lowercased alphanumeric tokens; punctuation is split off and dropped.

    Numerals are kept ("O(n^2)" -> ["o", "n", "2"]).  Symbolic tag triggers
    like "%" are matched on the raw text by :func:`apply_tags`, before this
    stripping ever sees them.
    """
    return _TOKEN_RE.findall(raw_text.lower())


def _line_score(line: str, keywords: frozenset[str]) -> int:
    score = 0
    if any(ch in line for ch in _CODE_PUNCT):
        score += 1
    if line.startswith("    ") or line.startswith("\t"):
        score += 1
    if sum(1 for tok in tokenize(line) if tok in keywords) >= 2:
        score += 1
    stripped = line.rstrip()
    if stripped.endswith(":") or stripped.endswith("{"):
        score += 1
    return score


def detect_code_spans(
    raw_text: str, lexicon: TagLexicon | None = None, min_score: int = 2
) -> list[tuple[int, int]]:
    """Maximal runs of consecutive code-classified lines, 1-based inclusive.

    Each line scores one point per satisfied criterion (code punctuation,
    >= 4-space or tab indent, >= 2 code keywords, trailing ':' or '{') and
    counts as code when its score reaches ``min_score``.  The default
    threshold of 2 keeps prose that merely mentions one keyword ("for
    example") from firing.
    """
    keywords = (lexicon or default_lexicon()).code_keyword_set
    spans = []
    start = None
    lines = raw_text.split("\n")
    for lineno, line in enumerate(lines, start=1):
        if _line_score(line, keywords) >= min_score:
            if start is None:
                start = lineno
        elif start is not None:
            spans.append((start, lineno - 1))
            start = None
    if start is not None:
        spans.append((start, len(lines)))
    return spans


def apply_tags(
    doc: Document,
    lexicon: TagLexicon,
    multiplicity: str = "once",
    min_score: int = 2,
) -> Document:
    """Prepend each matching rule's tag token to the document's token stream.

    Rules with ``code_excerpt`` context are matched only against the text of
    detected code spans; ``anywhere`` rules see the full raw text.  Every
    surface-form variant of a rule collapses to the one emitted token.
    Applying twice is a no-op: rules already recorded in ``applied_tags``
    are skipped.
    """
    if multiplicity not in ("once", "per_occurrence"):
        raise ValueError(f"unknown multiplicity {multiplicity!r}")
    lines = doc.raw_text.split("\n")
    spans = detect_code_spans(doc.raw_text, lexicon, min_score=min_score)
    code_text = "\n".join("\n".join(lines[s - 1 : e]) for s, e in spans)
    prepended: list[str] = []
    fired = set(doc.applied_tags)
    for rule in lexicon.rules:
        if rule.tag_name in doc.applied_tags:
            continue
        haystack = code_text if rule.context == CODE_EXCERPT else doc.raw_text
        hits = sum(len(pattern.findall(haystack)) for pattern in rule.patterns())
        if hits:
            count = 1 if multiplicity == "once" else hits
            prepended.extend([rule.emitted_token] * count)
            fired.add(rule.tag_name)
    if not prepended:
        return doc
    return replace(
        doc,
        tokens=tuple(prepended) + doc.tokens,
        applied_tags=frozenset(fired),
    )


def strip_stopwords_punct(tokens, stoplist) -> list[str]:
    """Drop stop-list tokens and single-character punctuation tokens.

    Tokens carrying the reserved ``tag_`` prefix are never removed; that is
    the whole point of tagging.
    """
    kept = []
    for token in tokens:
        if token.startswith(TAG_PREFIX):
            kept.append(token)
        elif token in stoplist:
            continue
        elif len(token) == 1 and not token.isalnum():
            continue
        else:
            kept.append(token)
    return kept


class Vocabulary:
    """Bijection between terms and dense indices 0..V-1, first-occurrence order."""

    def __init__(self, terms):
        self.terms = tuple(terms)
        self._index = {term: i for i, term in enumerate(self.terms)}
        if len(self._index) != len(self.terms):
            raise ValueError("duplicate terms in vocabulary")

    @property
    def size(self) -> int:
        return len(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term) -> bool:
        return term in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.terms == other.terms

    def index(self, term: str) -> int:
        return self._index[term]

    def term(self, index: int) -> str:
        return self.terms[index]

    def __repr__(self) -> str:
        return f"Vocabulary(V={self.size})"


def build_vocabulary(token_lists) -> Vocabulary:
    """All distinct tokens across the documents, indexed in first-occurrence order."""
    terms = []
    seen = set()
    for tokens in token_lists:
        for token in tokens:
            if token not in seen:
                seen.add(token)
                terms.append(token)
    if not terms:
        raise EmptyVocabularyError("all documents are empty after preprocessing")
    return Vocabulary(terms)


@dataclass(frozen=True)
class BowCorpus:
    """Per-document sparse term counts over a shared vocabulary."""

    docs: tuple[dict[int, int], ...]
    vocabulary: Vocabulary
    doc_ids: tuple[str, ...]

    def __post_init__(self):
        if len(self.docs) != len(self.doc_ids):
            raise ValueError("docs and doc_ids length mismatch")
        for doc_id, counts in zip(self.doc_ids, self.docs):
            for index, count in counts.items():
                if not 0 <= index < self.vocabulary.size:
                    raise ValueError(f"doc {doc_id}: term index {index} out of range")
                if count <= 0:
                    raise ValueError(f"doc {doc_id}: nonpositive count for index {index}")

    @property
    def n_documents(self) -> int:
        return len(self.docs)

    @property
    def n_tokens(self) -> int:
        return sum(sum(counts.values()) for counts in self.docs)

    def prefix(self, n: int) -> "BowCorpus":
        if not 1 <= n <= self.n_documents:
            raise ValueError(f"prefix size {n} out of range [1, {self.n_documents}]")
        return BowCorpus(self.docs[:n], self.vocabulary, self.doc_ids[:n])

    def reorder(self, order) -> "BowCorpus":
        """New corpus with documents permuted by ``order`` (a bijection of indices)."""
        if sorted(order) != list(range(self.n_documents)):
            raise ValueError("order must be a permutation of document indices")
        return BowCorpus(
            tuple(self.docs[i] for i in order),
            self.vocabulary,
            tuple(self.doc_ids[i] for i in order),
        )


def to_bow(token_lists, vocabulary: Vocabulary, doc_ids=None) -> BowCorpus:
    """Count tokens per document; total token count is preserved exactly.

    Documents that are empty after preprocessing are retained with a zero
    vector.  Tokens absent from ``vocabulary`` raise
    :class:`OutOfVocabularyError` naming the token and the document.
    """
    token_lists = list(token_lists)
    if doc_ids is None:
        doc_ids = [str(i + 1) for i in range(len(token_lists))]
    docs = []
    for doc_id, tokens in zip(doc_ids, token_lists):
        counts: dict[int, int] = {}
        for token in tokens:
            if token not in vocabulary:
                raise OutOfVocabularyError(
                    f"token {token!r} in doc {doc_id} is not in the vocabulary"
                )
            idx = vocabulary.index(token)
            counts[idx] = counts.get(idx, 0) + 1
        docs.append(counts)
    return BowCorpus(tuple(docs), vocabulary, tuple(doc_ids))


def preprocess_document(
    doc: Document,
    lexicon: TagLexicon,
    stoplist,
    tagging_enabled: bool = True,
    tag_multiplicity: str = "once",
    code_min_score: int = 2,
) -> Document:
    """Full per-document pipeline: tokenize, tag, strip stop words."""
    doc = replace(doc, tokens=tuple(tokenize(doc.raw_text)))
    if tagging_enabled:
        doc = apply_tags(doc, lexicon, multiplicity=tag_multiplicity, min_score=code_min_score)
    return replace(doc, tokens=tuple(strip_stopwords_punct(doc.tokens, stoplist)))


class Preprocessor(BaseEstimator):
    """Corpus -> BowCorpus transformer with the tagging pipeline built in.

    Parameters mirror the pipeline knobs: ``lexicon`` and ``stoplist``
    default to the bundled resources, ``tagging_enabled=False`` yields the
    untagged baseline, and ``tag_multiplicity`` switches between one tag
    token per fired rule ("once") and one per occurrence
    ("per_occurrence").  After ``fit``, ``vocabulary_`` holds the term
    index and ``documents_`` the processed documents in corpus order.
    """

    def __init__(
        self,
        lexicon=None,
        stoplist=None,
        tagging_enabled: bool = True,
        tag_multiplicity: str = "once",
        code_min_score: int = 2,
    ):
        self.lexicon = lexicon
        self.stoplist = stoplist
        self.tagging_enabled = tagging_enabled
        self.tag_multiplicity = tag_multiplicity
        self.code_min_score = code_min_score

    def _resolved(self):
        lexicon = self.lexicon if self.lexicon is not None else default_lexicon()
        stoplist = self.stoplist if self.stoplist is not None else load_stopwords()
        return lexicon, stoplist

    def _process(self, corpus: Corpus) -> list[Document]:
        lexicon, stoplist = self._resolved()
        return [
            preprocess_document(
                doc,
                lexicon,
                stoplist,
                tagging_enabled=self.tagging_enabled,
                tag_multiplicity=self.tag_multiplicity,
                code_min_score=self.code_min_score,
            )
            for doc in corpus
        ]

    def fit(self, corpus: Corpus, y=None):
        self.fit_transform(corpus)
        return self

    def fit_transform(self, corpus: Corpus, y=None) -> BowCorpus:
        processed = self._process(corpus)
        self.documents_ = tuple(processed)
        self.vocabulary_ = build_vocabulary([doc.tokens for doc in processed])
        return to_bow(
            [doc.tokens for doc in processed],
            self.vocabulary_,
            doc_ids=[doc.id for doc in processed],
        )

    def transform(self, corpus: Corpus) -> BowCorpus:
        if not hasattr(self, "vocabulary_"):
            raise ValueError("Preprocessor is not fitted; call fit or fit_transform first")
        processed = self._process(corpus)
        return to_bow(
            [doc.tokens for doc in processed],
            self.vocabulary_,
            doc_ids=[doc.id for doc in processed],
        )
