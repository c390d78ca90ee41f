"""Index lifecycle: build, persist, and reload the query engine state.

An index bundle is a directory holding the normalized corpus, the
vocabulary, the factorization checkpoint, relation statistics and the
configuration with its fingerprint. Relations and the walk graph are
rebuilt deterministically on load, so a reloaded index answers every
query exactly like the freshly built one.
"""

from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .corpus import (
    Corpus,
    RelationSet,
    Vocabulary,
    build_relations,
    build_vocabulary,
    default_stopwords,
    load_corpus,
    load_stopwords,
)
from .errors import ValidationError
from .factorization import (
    MetaFacModel,
    factorize,
    membership_matrix,
    model_from_dict,
    model_to_dict,
)
from .influence import BipartiteWalkGraph, build_walk_graph, word_influence_vector

FORMAT_VERSION = 1


@dataclass(frozen=True)
class EngineConfig:
    """Engine parameters; K, weights and seed are baked into an index."""

    n_communities: int = 30
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    com_t: float = 0.2
    chain_length: int = 6
    pool_size: int = 50  # M: per-community candidates for paper queries
    keyword_pool_size: int = 100  # N: candidates for keyword queries
    r: float = 0.05
    restart: float = 0.15
    seed: int = 0
    beam_width: int = 64
    min_doc_freq: int = 2
    max_iters: int = 300
    tol: float = 1e-6

    def __post_init__(self):
        if self.n_communities < 1:
            raise ValidationError("n_communities must be >= 1")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (3,) or np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValidationError("weights must be three nonnegative numbers summing to 1")
        if not 0 < self.com_t <= 1:
            raise ValidationError("com_t must be in (0, 1]")
        if self.chain_length < 2:
            raise ValidationError("chain_length must be >= 2")
        if self.pool_size < 2 or self.keyword_pool_size < 2:
            raise ValidationError("pool sizes must be >= 2")
        if self.r < 0:
            raise ValidationError("r must be >= 0")
        if not 0 < self.restart < 1:
            raise ValidationError("restart must be in (0, 1)")
        if self.beam_width < 1:
            raise ValidationError("beam_width must be >= 1")


def config_fingerprint(config: EngineConfig) -> str:
    payload = json.dumps(asdict(config), sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass
class EngineIndex:
    """Everything a query needs; immutable after build apart from caches."""

    config: EngineConfig
    corpus: Corpus
    vocabulary: Vocabulary
    relations: RelationSet
    model: MetaFacModel
    walk_graph: BipartiteWalkGraph

    def profile_source(self, p_i: int, p_j: int) -> np.ndarray:
        """Memoized per-word influence vector for an ordered paper pair."""
        return word_influence_vector(self.walk_graph, p_i, p_j).per_word

    def community_sizes(self) -> list[int]:
        member = membership_matrix(self.model, self.config.com_t)
        return [int(c) for c in member.sum(axis=0)]

    def community_top_words(self, k: int, limit: int = 10) -> list[str]:
        terms = self.vocabulary.terms
        weights = self.model.word_factor[:, k]
        ranked = sorted(range(len(terms)), key=lambda i: (-weights[i], terms[i]))
        return [terms[i] for i in ranked[:limit]]


def build_index(
    corpus_path: str | Path,
    config: EngineConfig = EngineConfig(),
    stopwords_path: str | Path | None = None,
) -> EngineIndex:
    """Load a corpus and fit the full engine state."""
    corpus = load_corpus(corpus_path)
    stopwords = load_stopwords(stopwords_path) if stopwords_path else default_stopwords()
    vocabulary = build_vocabulary(corpus, stopwords, config.min_doc_freq)
    relations = build_relations(corpus, vocabulary)
    model = factorize(
        relations,
        config.n_communities,
        weights=config.weights,
        seed=config.seed,
        max_iters=config.max_iters,
        tol=config.tol,
        entity_keys=(
            [p.id for p in corpus.papers],
            vocabulary.terms,
            sorted(relations.author_index),
        ),
    )
    walk_graph = build_walk_graph(relations, config.restart)
    return EngineIndex(config, corpus, vocabulary, relations, model, walk_graph)


def _record_dict(paper) -> dict:
    return {
        "id": paper.id,
        "title": paper.title,
        "abstract": paper.abstract,
        "keywords": list(paper.keywords),
        "authors": list(paper.authors),
        "year": paper.year,
        "venue": paper.venue,
        "cites": list(paper.cites),
    }


def save_index(index: EngineIndex, out_dir: str | Path) -> None:
    """Write a versioned bundle atomically; no partial bundles on error."""
    out_dir = Path(out_dir)
    staging = out_dir.with_name(out_dir.name + ".staging")
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir(parents=True)
    try:
        config_payload = {
            "format_version": FORMAT_VERSION,
            "fingerprint": config_fingerprint(index.config),
            "config": asdict(index.config),
        }
        (staging / "config.json").write_text(
            json.dumps(config_payload, indent=2), encoding="utf-8"
        )
        with (staging / "corpus.jsonl").open("w", encoding="utf-8") as fh:
            for paper in index.corpus.papers:
                fh.write(json.dumps(_record_dict(paper), ensure_ascii=False) + "\n")
        vocab_payload = {
            "terms": index.vocabulary.terms,
            "doc_freq": index.vocabulary.doc_freq.tolist(),
            "min_doc_freq": index.vocabulary.min_doc_freq,
            "stopwords": sorted(index.vocabulary.stopwords),
        }
        (staging / "vocabulary.json").write_text(
            json.dumps(vocab_payload), encoding="utf-8"
        )
        (staging / "model.json").write_text(
            json.dumps(model_to_dict(index.model)), encoding="utf-8"
        )
        stats = {
            "papers": len(index.corpus),
            "terms": len(index.vocabulary),
            "authors": len(index.relations.author_index),
            "relation_shapes": {k: list(v) for k, v in index.relations.shapes.items()},
            "relation_nnz": {
                "citation": int(index.relations.citation.nnz),
                "content": int(index.relations.content.nnz),
                "authorship": int(index.relations.authorship.nnz),
            },
            "dangling_citations": index.corpus.report.n_dangling,
            "dropped_records": len(index.corpus.report.dropped_records),
            "objective_initial": index.model.objective_trace[0],
            "objective_final": index.model.objective_trace[-1],
            "iterations": len(index.model.objective_trace) - 1,
        }
        (staging / "stats.json").write_text(json.dumps(stats, indent=2), encoding="utf-8")
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    if out_dir.exists():
        shutil.rmtree(out_dir)
    staging.rename(out_dir)


def load_index(bundle_dir: str | Path) -> EngineIndex:
    """Reload a bundle; relations and walk graph are rebuilt deterministically."""
    bundle_dir = Path(bundle_dir)
    config_payload = json.loads((bundle_dir / "config.json").read_text(encoding="utf-8"))
    if config_payload.get("format_version") != FORMAT_VERSION:
        raise ValidationError(
            f"unsupported index format {config_payload.get('format_version')!r}"
        )
    raw = dict(config_payload["config"])
    raw["weights"] = tuple(raw["weights"])
    config = EngineConfig(**raw)
    if config_fingerprint(config) != config_payload["fingerprint"]:
        raise ValidationError("index bundle fingerprint mismatch")
    corpus = load_corpus(bundle_dir / "corpus.jsonl")
    vocab_payload = json.loads((bundle_dir / "vocabulary.json").read_text(encoding="utf-8"))
    vocabulary = Vocabulary(
        terms=list(vocab_payload["terms"]),
        index={t: i for i, t in enumerate(vocab_payload["terms"])},
        doc_freq=np.asarray(vocab_payload["doc_freq"], dtype=np.int64),
        stopwords=frozenset(vocab_payload["stopwords"]),
        min_doc_freq=int(vocab_payload["min_doc_freq"]),
    )
    relations = build_relations(corpus, vocabulary)
    model = model_from_dict(
        json.loads((bundle_dir / "model.json").read_text(encoding="utf-8"))
    )
    walk_graph = build_walk_graph(relations, config.restart)
    return EngineIndex(config, corpus, vocabulary, relations, model, walk_graph)
