"""Corpus loading, text normalization and relation-matrix construction.

The corpus file format is JSON Lines: one record per line with fields
``id``, ``title``, ``abstract``, ``keywords[]``, ``authors[]``, ``year``,
``venue`` and ``cites[]``. Unknown fields are ignored; ``id``, ``title``
and ``year`` are mandatory.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import sparse

from .errors import CorpusParseError, ValidationError
from .porter import stem

_TOKEN_RE = re.compile(r"[a-z]+")

MANDATORY_FIELDS = ("id", "title", "year")
YEAR_MIN, YEAR_MAX = 1800, 2200


@dataclass(frozen=True)
class PaperRecord:
    """One paper's metadata as loaded from the corpus file."""

    id: str
    title: str
    abstract: str
    keywords: tuple[str, ...]
    authors: tuple[str, ...]
    year: int
    venue: str
    cites: tuple[str, ...]

    def text(self) -> str:
        """Concatenated free text used for vocabulary and TF-IDF."""
        return " ".join((self.title, " ".join(self.keywords), self.abstract))


@dataclass
class LoadReport:
    """Provenance of a corpus load: what was dropped or flagged."""

    dropped_records: list[tuple[int, str]] = field(default_factory=list)
    dangling_citations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def n_dangling(self) -> int:
        return len(self.dangling_citations)


@dataclass
class Corpus:
    papers: list[PaperRecord]
    report: LoadReport

    def __post_init__(self):
        self.id_index: dict[str, int] = {p.id: i for i, p in enumerate(self.papers)}

    def __len__(self) -> int:
        return len(self.papers)

    def index_of(self, paper_id: str) -> int:
        if paper_id not in self.id_index:
            raise ValidationError(f"unknown paper id {paper_id!r}")
        return self.id_index[paper_id]


def _string_list(obj: dict, name: str, ordinal: int) -> tuple[str, ...]:
    value = obj.get(name, ())
    if not isinstance(value, (list, tuple)):
        raise CorpusParseError(f"record {ordinal}: {name} must be a list")
    return tuple(str(v) for v in value)


def _coerce_record(obj: dict, ordinal: int) -> PaperRecord | str:
    """Build a PaperRecord, or return a drop reason string."""
    for name in MANDATORY_FIELDS:
        if obj.get(name) in (None, ""):
            return f"missing mandatory field {name!r}"
    year = obj["year"]
    if not isinstance(year, int) or isinstance(year, bool):
        raise CorpusParseError(f"record {ordinal}: year must be an integer")
    if not YEAR_MIN <= year <= YEAR_MAX:
        return f"year {year} outside [{YEAR_MIN}, {YEAR_MAX}]"
    return PaperRecord(
        id=str(obj["id"]),
        title=str(obj["title"]),
        abstract=str(obj.get("abstract", "")),
        keywords=_string_list(obj, "keywords", ordinal),
        authors=_string_list(obj, "authors", ordinal),
        year=year,
        venue=str(obj.get("venue", "")),
        cites=_string_list(obj, "cites", ordinal),
    )


def load_corpus(path: str | Path) -> Corpus:
    """Load a JSONL corpus; validates ids and reports dangling citations."""
    path = Path(path)
    papers: list[PaperRecord] = []
    report = LoadReport()
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for ordinal, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(f"record {ordinal}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise CorpusParseError(f"record {ordinal}: expected an object")
            rec = _coerce_record(obj, ordinal)
            if isinstance(rec, str):
                report.dropped_records.append((ordinal, rec))
                continue
            if rec.id in seen:
                raise ValidationError(f"duplicate paper id {rec.id!r} (record {ordinal})")
            seen.add(rec.id)
            papers.append(rec)
    if not papers:
        raise ValidationError("empty corpus")
    for p in papers:
        for cited in p.cites:
            if cited not in seen:
                report.dangling_citations.append((p.id, cited))
    return Corpus(papers, report)


def default_stopwords() -> frozenset[str]:
    """The standard English stop-word list shipped with the package."""
    text = resources.files("pegraph.data").joinpath("stopwords_en.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stop-word file, one token per line."""
    with Path(path).open("r", encoding="utf-8") as fh:
        return frozenset(w.strip() for w in fh if w.strip())


def tokenize(text: str) -> list[str]:
    """Lowercased alphabetic tokens of length >= 2."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 2]


def normalized_tokens(text: str, stopwords: frozenset[str]) -> list[str]:
    """Tokenize, drop stop words, Porter-stem."""
    return [stem(t) for t in tokenize(text) if t not in stopwords]


@dataclass
class Vocabulary:
    """Stemmed term list with a deterministic (lexicographic) ordering."""

    terms: list[str]
    index: dict[str, int]
    doc_freq: np.ndarray
    stopwords: frozenset[str]
    min_doc_freq: int

    def __len__(self) -> int:
        return len(self.terms)

    def stems_of(self, text: str) -> list[str]:
        """In-vocabulary stems of arbitrary query text (with duplicates)."""
        return [t for t in normalized_tokens(text, self.stopwords) if t in self.index]

    def term_counts(self, paper: PaperRecord) -> Counter:
        """Occurrence counts of in-vocabulary stems in a paper's text."""
        counts = Counter(normalized_tokens(paper.text(), self.stopwords))
        return Counter({t: c for t, c in counts.items() if t in self.index})


def build_vocabulary(
    corpus: Corpus,
    stopwords: frozenset[str] | None = None,
    min_doc_freq: int = 2,
) -> Vocabulary:
    """Build the stemmed vocabulary over title + keywords + abstract."""
    if len(corpus) == 0:
        raise ValidationError("empty corpus")
    if stopwords is None:
        stopwords = default_stopwords()
    df: Counter = Counter()
    for paper in corpus.papers:
        df.update(set(normalized_tokens(paper.text(), stopwords)))
    terms = sorted(t for t, c in df.items() if c >= min_doc_freq)
    if not terms:
        raise ValidationError("empty vocabulary")
    index = {t: i for i, t in enumerate(terms)}
    doc_freq = np.array([df[t] for t in terms], dtype=np.int64)
    return Vocabulary(terms, index, doc_freq, stopwords, min_doc_freq)


def tfidf_weight(term: str, paper: PaperRecord, vocab: Vocabulary, n_papers: int) -> float:
    """tf(term, paper) * ln(n_papers / df(term)); raises KeyError off-vocabulary."""
    col = vocab.index[term]  # KeyError is the documented lookup error
    tf = vocab.term_counts(paper)[term]
    if tf == 0:
        return 0.0
    return tf * math.log(n_papers / vocab.doc_freq[col])


@dataclass
class RelationSet:
    """The three nonnegative relation matrices of the metagraph."""

    citation: sparse.csr_array  # P x P
    content: sparse.csr_array  # P x W
    authorship: sparse.csr_array  # P x A
    author_index: dict[str, int]

    @property
    def shapes(self) -> dict[str, tuple[int, int]]:
        return {
            "citation": self.citation.shape,
            "content": self.content.shape,
            "authorship": self.authorship.shape,
        }


def build_relations(
    corpus: Corpus, vocab: Vocabulary, symmetrize_citation: bool = True
) -> RelationSet:
    """Construct citation/content/authorship matrices for a corpus.

    Content entries are TF-IDF weights; citation and authorship are 0-1.
    With ``symmetrize_citation`` the citation matrix becomes
    ``min(1, C + C^T)`` so it fits the symmetric community model; edge
    direction stays available in ``PaperRecord.cites``.
    """
    n = len(corpus)
    w = len(vocab)

    idf = np.log(n / vocab.doc_freq.astype(float))
    rows, cols, vals = [], [], []
    for i, paper in enumerate(corpus.papers):
        for term, count in sorted(vocab.term_counts(paper).items()):
            weight = count * idf[vocab.index[term]]
            if weight > 0.0:
                rows.append(i)
                cols.append(vocab.index[term])
                vals.append(weight)
    content = sparse.csr_array(
        (np.asarray(vals, dtype=float), (rows, cols)), shape=(n, w)
    )

    authors = sorted({a for p in corpus.papers for a in p.authors})
    author_index = {a: j for j, a in enumerate(authors)}
    arows, acols = [], []
    for i, paper in enumerate(corpus.papers):
        for a in sorted(set(paper.authors)):
            arows.append(i)
            acols.append(author_index[a])
    authorship = sparse.csr_array(
        (np.ones(len(arows)), (arows, acols)), shape=(n, len(authors))
    )

    crows, ccols = [], []
    for i, paper in enumerate(corpus.papers):
        for cited in sorted(set(paper.cites)):
            j = corpus.id_index.get(cited)
            if j is None:
                continue  # dangling: reported at load, dropped here
            crows.append(i)
            ccols.append(j)
    citation = sparse.csr_array(
        (np.ones(len(crows)), (crows, ccols)), shape=(n, n)
    )
    if symmetrize_citation:
        citation = citation + citation.T
        citation.data = np.minimum(citation.data, 1.0)

    return RelationSet(citation, content, authorship, author_index)
