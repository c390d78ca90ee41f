"""Synthetic corpora with planted community structure.

Papers are split into equally sized blocks; each block owns a slice of
the vocabulary and of the author pool. Citations are Bernoulli edges
with separate within-block and cross-block probabilities. Useful for
demos and for exercising the full pipeline at desk scale.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

_CONSONANTS = "bcdfghjklnpqrstvz"
_VOWELS = "aeiou"


def synthetic_words(n: int) -> list[str]:
    """Distinct alphabetic pseudo-words that are fixed points of stemming.

    Pattern c-v-c-v-m: no Porter rule strips an ...vm ending, so tokens
    survive the text pipeline unchanged and never collide.
    """
    words = []
    for c1 in _CONSONANTS:
        for v1 in _VOWELS:
            for c2 in _CONSONANTS:
                for v2 in _VOWELS:
                    words.append(f"{c1}{v1}{c2}{v2}m")
                    if len(words) == n:
                        return words
    raise ValueError("requested vocabulary too large")


def make_planted_corpus(
    n_papers: int = 300,
    n_blocks: int = 3,
    n_words: int = 200,
    n_authors: int = 60,
    p_within: float = 0.2,
    p_cross: float = 0.01,
    year_range: tuple[int, int] = (1980, 2012),
    seed: int = 0,
) -> tuple[list[dict], np.ndarray]:
    """Return (records, block labels). Records are corpus-file ready dicts."""
    rng = np.random.default_rng(seed)
    words = synthetic_words(n_words)
    labels = np.repeat(np.arange(n_blocks), n_papers // n_blocks)
    labels = np.concatenate([labels, rng.integers(0, n_blocks, n_papers - labels.size)])

    word_blocks = np.array_split(np.arange(n_words), n_blocks)
    author_blocks = np.array_split(np.arange(n_authors), n_blocks)
    ids = [f"p{i:04d}" for i in range(n_papers)]

    records = []
    for i in range(n_papers):
        b = int(labels[i])
        own = word_blocks[b]
        n_tokens = 40
        from_block = rng.random(n_tokens) < 0.9
        tokens = np.where(
            from_block,
            rng.choice(own, n_tokens),
            rng.integers(0, n_words, n_tokens),
        )
        title_tokens = rng.choice(own, 4)
        keyword_tokens = rng.choice(own, 3)
        n_auth = int(rng.integers(1, 4))
        authors = rng.choice(author_blocks[b], n_auth, replace=False)

        same = labels == b
        prob = np.where(same, p_within, p_cross)
        prob[i] = 0.0
        cited = np.flatnonzero(rng.random(n_papers) < prob)

        records.append(
            {
                "id": ids[i],
                "title": " ".join(words[t] for t in title_tokens),
                "abstract": " ".join(words[t] for t in tokens),
                "keywords": [words[t] for t in keyword_tokens],
                "authors": [f"author {int(a):02d}" for a in authors],
                "year": int(rng.integers(year_range[0], year_range[1] + 1)),
                "venue": "synthetic",
                "cites": [ids[j] for j in cited],
            }
        )
    return records, labels


def write_corpus(records: list[dict], path: str | Path) -> None:
    """Write records in the JSONL corpus format."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
