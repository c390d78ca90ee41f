#!/usr/bin/env python3
"""Capture real /query responses as fixtures for the explorer UI tests.

Builds the 2-community bridged corpus, serves it through the HTTP app,
and saves one response per query kind plus a com_t sweep used by the
chain-count monotonicity check.
"""

import json
import sys
import tempfile
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from pegraph.engine import EngineConfig, build_index
from pegraph.factorization import membership_matrix
from pegraph.service import create_app
from pegraph.synthetic import make_planted_corpus, synthetic_words, write_corpus

OUT = Path(__file__).resolve().parents[1] / "frontend" / "tests" / "fixtures"


def bridged_records():
    rng = np.random.default_rng(42)
    records, _ = make_planted_corpus(
        n_papers=80, n_blocks=2, n_words=60, n_authors=20, seed=21
    )
    words = synthetic_words(60)
    for i in range(8):
        rec = records[i * 10]
        tokens = [words[int(t)] for t in rng.integers(0, 60, 40)]
        rec["abstract"] = " ".join(tokens)
        rec["title"] = " ".join(
            [words[int(rng.integers(0, 30))], words[int(rng.integers(30, 60))]]
        )
        rec["keywords"] = [words[int(rng.integers(0, 60))]]
        rec["authors"] = ["author 01", "author 11"]
        cites = rng.choice(80, 12, replace=False)
        rec["cites"] = [records[int(j)]["id"] for j in cites if int(j) != i * 10]
    return records


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    records = bridged_records()
    with tempfile.TemporaryDirectory() as tmp:
        corpus_path = Path(tmp) / "corpus.jsonl"
        write_corpus(records, corpus_path)
        index = build_index(
            corpus_path, EngineConfig(n_communities=2, chain_length=4, seed=5)
        )
    client = TestClient(create_app(index))

    member = membership_matrix(index.model, 0.2)
    bridge = int(np.flatnonzero(member.sum(axis=1) == 2)[0])
    bridge_id = index.corpus.papers[bridge].id
    members0 = np.flatnonzero(member[:, 0])
    years = np.array([index.corpus.papers[i].year for i in members0])
    order = np.argsort(years)
    pair = (
        index.corpus.papers[members0[order[0]]].id,
        index.corpus.papers[members0[order[-1]]].id,
    )
    keyword = index.corpus.papers[int(members0[order[1]])].keywords[0]

    requests = {
        "single_com02": {"kind": "single_paper", "paper_a": bridge_id,
                         "chain_length": 4, "com_t": 0.2},
        "single_com01": {"kind": "single_paper", "paper_a": bridge_id,
                         "chain_length": 4, "com_t": 0.1},
        "keyword": {"kind": "keyword", "keyword": keyword, "chain_length": 3},
        "two_paper": {"kind": "two_paper", "paper_a": pair[0], "paper_b": pair[1],
                      "chain_length": 3},
    }
    for name, body in requests.items():
        response = client.post("/query", json=body)
        response.raise_for_status()
        (OUT / f"{name}.json").write_bytes(response.content)
        (OUT / f"{name}.request.json").write_text(json.dumps(body, indent=2) + "\n")
        print(f"{name}: {len(response.content)} bytes, "
              f"{len(response.json()['chains'])} chains")

    (OUT / "config.json").write_bytes(client.get("/config").content)
    (OUT / "communities.json").write_bytes(client.get("/communities").content)
    papers = client.get("/papers", params={"q": bridge_id})
    (OUT / "papers_by_id.json").write_bytes(papers.content)
    print("fixtures written to", OUT)


if __name__ == "__main__":
    main()
