"""Question-bank ingestion and deterministic corpus manipulation.

A corpus is an ordered, immutable collection of question records.  All
randomized operations (permutation) are driven by numpy's PCG64 generator,
so the same seed reproduces the same ordering on every platform.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

PLAIN_TEXT = "plain_text"
DELIMITED_TABLE = "delimited_table"


class EmptyCorpusError(ValueError):
    """The operation needs at least one document."""


class CorpusFormatError(ValueError):
    """An input file could not be parsed as a corpus."""


@dataclass(frozen=True)
class Document:
    """One question record.

    ``raw_text`` is preserved byte-identical from ingestion; ``tokens`` and
    ``applied_tags`` stay empty until preprocessing fills them in.
    """

    id: str
    raw_text: str
    tokens: tuple[str, ...] = ()
    applied_tags: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.id:
            raise ValueError("document id must be non-empty")
        if any(t == "" for t in self.tokens):
            raise ValueError(f"document {self.id}: empty token")


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    name: str = "corpus"

    def __post_init__(self):
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValueError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def ids(self) -> list[str]:
        return [doc.id for doc in self.documents]


def load_corpus(path, format: str = PLAIN_TEXT, id_prefix: str = "Q") -> Corpus:
    """Read a question bank from ``path`` into an ordered :class:`Corpus`.

    ``plain_text`` files hold one record per blank-line-separated block;
    every record gets the id ``<id_prefix><1-based index>``.
    ``delimited_table`` files are RFC-4180-style CSV (UTF-8, ``"`` quoting)
    with header ``id,text``; rows with an empty id field get a generated id.
    """
    path = Path(path)
    if format == PLAIN_TEXT:
        documents = _read_plain_text(path, id_prefix)
    elif format == DELIMITED_TABLE:
        documents = _read_delimited_table(path, id_prefix)
    else:
        raise ValueError(f"unknown corpus format {format!r}")
    if not documents:
        raise EmptyCorpusError(f"no records found in {path}")
    return Corpus(documents=tuple(documents), name=path.stem)


def _read_plain_text(path: Path, id_prefix: str) -> list[Document]:
    text = path.read_text(encoding="utf-8")
    blocks = []
    current: list[str] = []
    for line in text.split("\n"):
        if line.strip() == "":
            if current:
                blocks.append("\n".join(current))
                current = []
        else:
            current.append(line)
    if current:
        blocks.append("\n".join(current))
    return [
        Document(id=f"{id_prefix}{i}", raw_text=block)
        for i, block in enumerate(blocks, start=1)
    ]


def _read_delimited_table(path: Path, id_prefix: str) -> list[Document]:
    documents = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = None
        row_index = 0
        for row in reader:
            if header is None:
                if [col.strip() for col in row] != ["id", "text"]:
                    raise CorpusFormatError(
                        f"{path}: expected header 'id,text', got {','.join(row)!r}"
                    )
                header = row
                continue
            if len(row) != 2:
                raise CorpusFormatError(
                    f"{path}: line {reader.line_num}: expected 2 columns, got {len(row)}"
                )
            row_index += 1
            doc_id = row[0] or f"{id_prefix}{row_index}"
            documents.append(Document(id=doc_id, raw_text=row[1]))
    return documents


def shuffled_order(n: int, seed: int) -> np.ndarray:
    """Fisher-Yates permutation of ``range(n)`` driven by PCG64(``seed``)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    order = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        order[i], order[j] = order[j], order[i]
    return order


def permute(corpus: Corpus, seed: int) -> Corpus:
    """Uniform random reordering of the documents, determined by ``seed`` alone."""
    if len(corpus) == 0:
        raise EmptyCorpusError("cannot permute an empty corpus")
    order = shuffled_order(len(corpus), seed)
    documents = tuple(corpus.documents[i] for i in order)
    return replace(corpus, documents=documents)


def prefix(corpus: Corpus, n: int) -> Corpus:
    """First ``n`` documents, in order."""
    if not 1 <= n <= len(corpus):
        raise ValueError(f"prefix size {n} out of range [1, {len(corpus)}]")
    return replace(corpus, documents=corpus.documents[:n])
