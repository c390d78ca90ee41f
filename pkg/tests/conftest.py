"""Shared fixtures: toy corpora and a small prebuilt engine index."""

import json
from pathlib import Path

import numpy as np
import pytest

from pegraph.engine import EngineConfig, build_index
from pegraph.synthetic import make_planted_corpus, write_corpus

TOY_RECORDS = [
    {
        "id": "a1",
        "title": "Sparse coding of hyperspectral images",
        "abstract": "We study sparse representations for unmixing tasks.",
        "keywords": ["sparse coding", "unmixing"],
        "authors": ["Ada One", "Bob Two"],
        "year": 2001,
        "venue": "J1",
        "cites": [],
    },
    {
        "id": "a2",
        "title": "Sparse graphs for classification",
        "abstract": "Graph models with sparse structure improve classification.",
        "keywords": ["graphs"],
        "authors": ["Bob Two"],
        "year": 2005,
        "venue": "J1",
        "cites": ["a1"],
    },
    {
        "id": "a3",
        "title": "Unmixing with graph priors",
        "abstract": "Unmixing benefits from graph priors and sparse coding.",
        "keywords": ["unmixing", "graphs"],
        "authors": ["Cat Three"],
        "year": 2009,
        "venue": "C1",
        "cites": ["a1", "a2"],
    },
]


def write_jsonl(path: Path, records) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return path


@pytest.fixture
def toy_corpus_file(tmp_path):
    return write_jsonl(tmp_path / "toy.jsonl", TOY_RECORDS)


@pytest.fixture(scope="session")
def planted():
    """The acceptance-scale planted corpus: 300 papers in 3 blocks."""
    records, labels = make_planted_corpus(seed=0)
    return records, labels


@pytest.fixture(scope="session")
def planted_file(tmp_path_factory, planted):
    records, _ = planted
    path = tmp_path_factory.mktemp("planted") / "corpus.jsonl"
    write_corpus(records, path)
    return path


@pytest.fixture(scope="session")
def small_index(tmp_path_factory):
    """A quick-to-build 2-community index for query/service/CLI tests."""
    records, labels = make_planted_corpus(
        n_papers=80, n_blocks=2, n_words=60, n_authors=20, seed=11
    )
    path = tmp_path_factory.mktemp("small") / "corpus.jsonl"
    write_corpus(records, path)
    config = EngineConfig(n_communities=2, chain_length=4, seed=7)
    return build_index(path, config)


@pytest.fixture(scope="session")
def bridged_index(tmp_path_factory):
    """Two topical blocks plus bridge papers that belong to both.

    Bridge papers mix both blocks' vocabularies, cite into both blocks
    and carry authors from both, so their topic distribution spreads
    over the two communities.
    """
    rng = np.random.default_rng(42)
    records, labels = make_planted_corpus(
        n_papers=80, n_blocks=2, n_words=60, n_authors=20, seed=21
    )
    from pegraph.synthetic import synthetic_words

    words = synthetic_words(60)
    for i in range(8):  # rewrite 8 papers as bridges
        rec = records[i * 10]
        tokens = [words[int(t)] for t in rng.integers(0, 60, 40)]
        rec["abstract"] = " ".join(tokens)
        rec["title"] = " ".join([words[int(rng.integers(0, 30))],
                                 words[int(rng.integers(30, 60))]])
        rec["keywords"] = [words[int(rng.integers(0, 60))]]
        rec["authors"] = ["author 01", "author 11"]
        cites = rng.choice(80, 12, replace=False)
        rec["cites"] = [records[int(j)]["id"] for j in cites if int(j) != i * 10]
    path = tmp_path_factory.mktemp("bridged") / "corpus.jsonl"
    write_corpus(records, path)
    config = EngineConfig(n_communities=2, chain_length=4, seed=5)
    return build_index(path, config)
