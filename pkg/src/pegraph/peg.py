"""Paper evolution graphs: per-community chains merged into one graph.

A query resolves to a set of relevant communities; each yields its most
coherent chain, and the chains are merged on shared papers. The merged
graph exports deterministically to DOT and JSON.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .chains import (
    QuerySpec,
    best_chain,
    candidate_pool_keyword,
    candidate_pool_pair,
    candidate_pool_single,
)
from .coherence import Chain, CoherenceResult
from .errors import PegraphError, QueryError, ValidationError
from .factorization import assign_communities, membership_matrix, topic_distribution

if TYPE_CHECKING:
    from .engine import EngineIndex

logger = logging.getLogger(__name__)

# colorbrewer Dark2; chains cycle through it by label ordinal
PALETTE = (
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a",
    "#66a61e", "#e6ab02", "#a6761d", "#666666",
)

TOP_TOPIC_WORDS = 5


@dataclass(frozen=True)
class GraphNode:
    id: str
    title: str
    year: int
    communities: tuple[int, ...]


@dataclass(frozen=True)
class GraphEdge:
    source: str
    target: str
    chains: tuple[str, ...]


@dataclass(frozen=True)
class ChainRecord:
    label: str
    papers: tuple[str, ...]
    score: float
    topic_words: tuple[str, ...]


@dataclass
class EvolutionGraph:
    nodes: list[GraphNode]
    edges: list[GraphEdge]
    chains: list[ChainRecord]


def _topic_words(result: CoherenceResult, terms: Sequence[str]) -> tuple[str, ...]:
    """Top words of the optimizing topic sequence, averaged over links."""
    mean = np.mean(result.topics.topics, axis=0)
    ranked = sorted(range(len(terms)), key=lambda i: (-mean[i], terms[i]))
    return tuple(terms[i] for i in ranked[:TOP_TOPIC_WORDS] if mean[i] > 0)


def merge_chains(
    entries: list[tuple[str, Chain, CoherenceResult]],
    paper_info: dict[str, tuple[str, int, tuple[int, ...]]],
    terms: Sequence[str],
) -> EvolutionGraph:
    """Union of labeled chains; shared papers become shared nodes.

    ``paper_info`` maps paper id -> (title, year, community memberships).
    """
    if not entries:
        raise ValidationError("at least one chain is required")
    node_ids: dict[str, None] = {}
    edge_labels: dict[tuple[str, str], list[str]] = {}
    records = []
    for label, chain, result in entries:
        for pid in chain.papers:
            node_ids.setdefault(pid)
        for a, b in chain.links:
            edge_labels.setdefault((a, b), [])
            if label not in edge_labels[(a, b)]:
                edge_labels[(a, b)].append(label)
        records.append(
            ChainRecord(label, chain.papers, float(result.score), _topic_words(result, terms))
        )

    def node_key(pid: str):
        title, year, _ = paper_info[pid]
        return (year, pid)

    nodes = []
    for pid in sorted(node_ids, key=node_key):
        title, year, communities = paper_info[pid]
        nodes.append(GraphNode(pid, title, year, tuple(communities)))
    edges = [
        GraphEdge(a, b, tuple(labels))
        for (a, b), labels in sorted(
            edge_labels.items(), key=lambda kv: (node_key(kv[0][0]), node_key(kv[0][1]))
        )
    ]
    return EvolutionGraph(nodes, edges, records)


def run_query(spec: QuerySpec, index: "EngineIndex") -> EvolutionGraph:
    """Resolve a query's communities, extract one chain each, and merge.

    Communities whose pool or chain extraction fails are skipped with a
    warning; the query fails only when no community yields a chain.
    """
    spec = spec.resolved(index.config)
    model = index.model
    corpus = index.corpus
    member = membership_matrix(model, spec.com_t)

    pools = []
    if spec.kind == "single_paper":
        p = corpus.index_of(spec.paper_a)
        communities = sorted(assign_communities(topic_distribution(model, p), spec.com_t))
        for community in communities:
            try:
                pools.append(
                    candidate_pool_single(
                        model, corpus, member, spec.paper_a, community,
                        spec.pool_size, spec.chain_length,
                    )
                )
            except PegraphError as exc:
                logger.warning("community %d skipped: %s", community, exc)
    elif spec.kind == "two_paper":
        pa, pb = corpus.index_of(spec.paper_a), corpus.index_of(spec.paper_b)
        # canonical order: earlier paper first under the (year, id) total order
        ka = (corpus.papers[pa].year, corpus.papers[pa].id)
        kb = (corpus.papers[pb].year, corpus.papers[pb].id)
        if ka > kb:
            spec = replace(spec, paper_a=corpus.papers[pb].id, paper_b=corpus.papers[pa].id)
            pa, pb = pb, pa
        shared = sorted(
            assign_communities(topic_distribution(model, pa), spec.com_t)
            & assign_communities(topic_distribution(model, pb), spec.com_t)
        )
        if not shared:
            raise QueryError("papers share no community")
        for community in shared:
            try:
                pools.append(
                    candidate_pool_pair(
                        model, corpus, member, spec.paper_a, spec.paper_b, community,
                        spec.pool_size, spec.chain_length,
                    )
                )
            except PegraphError as exc:
                logger.warning("community %d skipped: %s", community, exc)
    else:
        pools, dropped = candidate_pool_keyword(
            corpus, index.vocabulary, model, member, spec.keyword,
            spec.keyword_pool_size, spec.chain_length, content=index.relations.content,
        )
        for community, size in dropped:
            logger.warning("community %d skipped: only %d relevant papers", community, size)

    entries = []
    for pool in pools:
        try:
            chain, result = best_chain(pool, spec, index.profile_source, corpus)
        except PegraphError as exc:
            logger.warning("community %d skipped: %s", pool.community, exc)
            continue
        entries.append((pool.community, chain, result))
    if not entries:
        raise QueryError("no coherent chain found")

    entries.sort(key=lambda e: e[0])
    labeled = [
        (f"chain-{i + 1}", chain, result)
        for i, (_, chain, result) in enumerate(entries)
    ]
    paper_info = {}
    for _, chain, _ in labeled:
        for pid in chain.papers:
            if pid not in paper_info:
                i = corpus.index_of(pid)
                memberships = tuple(int(k) for k in np.flatnonzero(member[i]))
                paper_info[pid] = (corpus.papers[i].title, corpus.papers[i].year, memberships)
    return merge_chains(labeled, paper_info, index.vocabulary.terms)


# -- export ----------------------------------------------------------------


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_graph(graph: EvolutionGraph, fmt: str) -> bytes:
    """Serialize deterministically; same graph, same bytes."""
    if fmt == "json":
        return _export_json(graph)
    if fmt == "dot":
        return _export_dot(graph)
    raise ValidationError(f"unknown export format {fmt!r}")


def _export_json(graph: EvolutionGraph) -> bytes:
    payload = {
        "nodes": [
            {"id": n.id, "title": n.title, "year": n.year, "communities": list(n.communities)}
            for n in graph.nodes
        ],
        "edges": [
            {"from": e.source, "to": e.target, "chains": list(e.chains)}
            for e in graph.edges
        ],
        "chains": [
            {
                "label": c.label,
                "papers": list(c.papers),
                "score": c.score,
                "topic_words": list(c.topic_words),
            }
            for c in graph.chains
        ],
    }
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def chain_color(label: str) -> str:
    """Palette color for a chain label; labels cycle through 8 colors."""
    ordinal = int(label.rsplit("-", 1)[-1]) - 1 if label.rsplit("-", 1)[-1].isdigit() else 0
    return PALETTE[ordinal % len(PALETTE)]


def _export_dot(graph: EvolutionGraph) -> bytes:
    lines = ["digraph peg {", "  rankdir=LR;"]
    for node in graph.nodes:
        label = _dot_escape(f"{node.title} ({node.year})")
        lines.append(f'  "{_dot_escape(node.id)}" [label="{label}"];')
    for edge in graph.edges:
        color = ":".join(chain_color(label) for label in edge.chains)
        chains = _dot_escape(",".join(edge.chains))
        lines.append(
            f'  "{_dot_escape(edge.source)}" -> "{_dot_escape(edge.target)}"'
            f' [chain="{chains}", color="{color}"];'
        )
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def graph_from_json(data: bytes | str | dict) -> EvolutionGraph:
    """Inverse of the JSON export (round-trip oracle and client loader)."""
    if isinstance(data, (bytes, str)):
        data = json.loads(data)
    nodes = [
        GraphNode(n["id"], n["title"], int(n["year"]), tuple(n["communities"]))
        for n in data["nodes"]
    ]
    edges = [GraphEdge(e["from"], e["to"], tuple(e["chains"])) for e in data["edges"]]
    chains = [
        ChainRecord(c["label"], tuple(c["papers"]), float(c["score"]), tuple(c["topic_words"]))
        for c in data["chains"]
    ]
    return EvolutionGraph(nodes, edges, chains)
