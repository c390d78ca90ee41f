"""Candidate-pool narrowing and coherent-chain search.

A query first narrows each relevant community to its most query-similar
papers, then searches that pool for the chronological chain of the
requested length with the highest evolving-topic coherence. Exhaustive
enumeration is the correctness oracle; beam search is the default and
scores partial chains by the same LP as full chains, so a partial's
score never increases as it grows (which also yields the upper bounds
used to skip hopeless extensions).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations
from math import comb
from typing import Callable

import numpy as np

from .coherence import Chain, CoherenceResult, coherence_evolving_topic
from .corpus import Corpus, Vocabulary
from .errors import QueryError, ValidationError
from .factorization import MetaFacModel
from .influence import InfluenceProfile

ProfileSource = Callable[[int, int], np.ndarray]

QUERY_KINDS = ("keyword", "single_paper", "two_paper")

_EXHAUSTIVE_LIMIT = 200_000


@dataclass(frozen=True)
class QuerySpec:
    """One retrieval request; None fields fall back to engine defaults."""

    kind: str
    keyword: str | None = None
    paper_a: str | None = None
    paper_b: str | None = None
    chain_length: int | None = None
    r: float | None = None
    com_t: float | None = None
    pool_size: int | None = None  # per-community candidates for paper queries
    keyword_pool_size: int | None = None  # total candidates for keyword queries
    beam_width: int | None = None
    mode: str = "beam"

    def __post_init__(self):
        if self.kind not in QUERY_KINDS:
            raise ValidationError(f"unknown query kind {self.kind!r}")
        needs = {
            "keyword": (self.keyword, self.paper_a is None and self.paper_b is None),
            "single_paper": (self.paper_a, self.keyword is None and self.paper_b is None),
            "two_paper": (self.paper_a and self.paper_b, self.keyword is None),
        }[self.kind]
        if not needs[0] or not needs[1]:
            raise ValidationError(f"query kind {self.kind!r} requires exactly its own fields")
        if self.kind == "two_paper" and self.paper_a == self.paper_b:
            raise ValidationError("distinct papers required")
        if self.chain_length is not None and self.chain_length < 2:
            raise ValidationError("chain_length must be >= 2")
        if self.r is not None and self.r < 0:
            raise ValidationError("r must be >= 0")
        if self.com_t is not None and not 0 < self.com_t <= 1:
            raise ValidationError("com_t must be in (0, 1]")
        if self.mode not in ("beam", "exhaustive"):
            raise ValidationError(f"unknown search mode {self.mode!r}")

    def resolved(self, defaults) -> "QuerySpec":
        """Fill unset per-query parameters from an EngineConfig."""
        return replace(
            self,
            chain_length=self.chain_length or defaults.chain_length,
            r=self.r if self.r is not None else defaults.r,
            com_t=self.com_t if self.com_t is not None else defaults.com_t,
            pool_size=self.pool_size or defaults.pool_size,
            keyword_pool_size=self.keyword_pool_size or defaults.keyword_pool_size,
            beam_width=self.beam_width or defaults.beam_width,
        )


@dataclass
class CandidatePool:
    """Search region for one community: papers sorted by relevance."""

    community: int
    papers: list[tuple[str, float]]  # (paper id, score), non-increasing
    query: str
    indices: np.ndarray  # corpus indices aligned with papers
    years: np.ndarray


def _pool_from(
    corpus: Corpus, community: int, idx: np.ndarray, scores: np.ndarray, query: str
) -> CandidatePool:
    papers = [(corpus.papers[i].id, float(s)) for i, s in zip(idx, scores)]
    years = np.array([corpus.papers[i].year for i in idx])
    return CandidatePool(community, papers, query, np.asarray(idx), years)


def _rank(scores: np.ndarray, ids: list[str]) -> np.ndarray:
    """Indices sorted by score descending, paper id ascending on ties."""
    return np.array(
        sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i])), dtype=int
    )


def candidate_pool_single(
    model: MetaFacModel,
    corpus: Corpus,
    member: np.ndarray,
    paper_id: str,
    community: int,
    pool_size: int,
    chain_length: int,
) -> CandidatePool:
    """Most query-similar papers of one community for a single-paper query.

    Similarity to the query paper sums core-weighted factor products over
    all communities; the query paper itself is always in the pool.
    """
    p = corpus.index_of(paper_id)
    if not member[p, community]:
        raise ValidationError(f"paper {paper_id!r} is not in community {community}")
    members = np.flatnonzero(member[:, community])
    if members.size < chain_length:
        raise ValidationError(f"community {community} too small for the requested chain")
    scores = (model.paper_factor[members] * model.core) @ model.paper_factor[p]
    ids = [corpus.papers[i].id for i in members]
    order = _rank(scores, ids)
    keep = list(order[:pool_size])
    p_local = int(np.flatnonzero(members == p)[0])
    if p_local not in keep:
        keep[-1] = p_local
        keep = list(order[np.isin(order, keep)])  # restore rank order
    return _pool_from(
        corpus, community, members[keep], scores[keep], f"single:{paper_id}"
    )


def candidate_pool_pair(
    model: MetaFacModel,
    corpus: Corpus,
    member: np.ndarray,
    paper_a: str,
    paper_b: str,
    community: int,
    pool_size: int,
    chain_length: int,
) -> CandidatePool:
    """Candidates between two query papers within one shared community.

    Only papers published in the [year_a, year_b] window are eligible;
    the endpoints are included unconditionally.
    """
    if paper_a == paper_b:
        raise ValidationError("distinct papers required")
    pa, pb = corpus.index_of(paper_a), corpus.index_of(paper_b)
    if not (member[pa, community] and member[pb, community]):
        raise ValidationError(f"both papers must be in community {community}")
    lo = min(corpus.papers[pa].year, corpus.papers[pb].year)
    hi = max(corpus.papers[pa].year, corpus.papers[pb].year)
    members = np.flatnonzero(member[:, community])
    years = np.array([corpus.papers[i].year for i in members])
    in_window = (years >= lo) & (years <= hi)
    eligible = members[in_window & ~np.isin(members, (pa, pb))]
    if eligible.size + 2 < chain_length:
        raise ValidationError(f"community {community} too small for the requested chain")
    anchor = model.paper_factor[pa] * model.paper_factor[pb] * model.core
    scores = model.paper_factor[eligible] @ anchor
    ids = [corpus.papers[i].id for i in eligible]
    order = _rank(scores, ids)[: max(pool_size - 2, 0)]
    idx = np.concatenate([[pa, pb], eligible[order]])
    own = model.paper_factor[[pa, pb]] @ anchor
    pool_scores = np.concatenate([own, scores[order]])
    final = _rank(pool_scores, [corpus.papers[i].id for i in idx])
    return _pool_from(
        corpus, community, idx[final], pool_scores[final], f"pair:{paper_a},{paper_b}"
    )


def candidate_pool_keyword(
    corpus: Corpus,
    vocab: Vocabulary,
    model: MetaFacModel,
    member: np.ndarray,
    keyword: str,
    keyword_pool_size: int,
    chain_length: int,
    content=None,
) -> tuple[list[CandidatePool], list[tuple[int, int]]]:
    """TF-IDF-most-relevant papers, partitioned by soft community membership.

    Returns (pools ordered by community id, dropped) where dropped lists
    (community, size) for communities whose pool was smaller than the
    requested chain length. ``content`` optionally supplies the
    precomputed TF-IDF matrix; otherwise weights are recomputed.
    """
    stems = sorted(set(vocab.stems_of(keyword)))
    if not stems:
        raise QueryError(f"unknown keyword {keyword!r}")
    cols = [vocab.index[s] for s in stems]
    if content is not None:
        relevance = np.asarray(content[:, cols].sum(axis=1)).ravel()
    else:
        idf = np.log(len(corpus) / vocab.doc_freq[cols])
        relevance = np.zeros(len(corpus))
        for i, paper in enumerate(corpus.papers):
            counts = vocab.term_counts(paper)
            relevance[i] = sum(counts[s] * f for s, f in zip(stems, idf))
    eligible = np.flatnonzero(relevance > 0)
    ids = [corpus.papers[i].id for i in eligible]
    order = _rank(relevance[eligible], ids)[:keyword_pool_size]
    top = eligible[order]

    pools, dropped = [], []
    for community in range(model.n_communities):
        chosen = top[member[top, community]]
        if chosen.size == 0:
            continue
        if chosen.size < chain_length:
            dropped.append((community, int(chosen.size)))
            continue
        pools.append(
            _pool_from(corpus, community, chosen, relevance[chosen], f"keyword:{keyword}")
        )
    return pools, dropped


# -- chain search ---------------------------------------------------------


@dataclass
class _Search:
    """Chronologically sorted pool view plus the query's constraints."""

    indices: np.ndarray  # corpus index per position
    ids: list[str]
    years: np.ndarray
    n: int
    anchor: int | None  # position that must be contained (single-paper)
    start: int | None  # forced first position (two-paper)
    end: int | None  # forced last position (two-paper)


def _prepare_search(pool: CandidatePool, spec: QuerySpec, corpus: Corpus) -> _Search:
    order = sorted(
        range(len(pool.indices)),
        key=lambda i: (int(pool.years[i]), pool.papers[i][0]),
    )
    indices = pool.indices[order]
    ids = [pool.papers[i][0] for i in order]
    years = pool.years[order]
    anchor = start = end = None
    if spec.kind == "single_paper":
        where = [i for i, pid in enumerate(ids) if pid == spec.paper_a]
        if not where:
            raise QueryError(f"query paper {spec.paper_a!r} missing from the pool")
        anchor = where[0]
    elif spec.kind == "two_paper":
        ia = corpus.index_of(spec.paper_a)
        ib = corpus.index_of(spec.paper_b)
        pos = {int(ci): i for i, ci in enumerate(indices)}
        if ia not in pos or ib not in pos:
            raise QueryError("query papers missing from the pool")
        start, end = pos[ia], pos[ib]
        if start > end:
            start, end = end, start
    return _Search(indices, ids, years, spec.chain_length, anchor, start, end)


def _feasible(search: _Search, partial: tuple[int, ...]) -> bool:
    last = partial[-1]
    remaining = search.n - len(partial)
    if search.end is not None:
        # middles must fit strictly between last and the forced end
        room = search.end - last - 1
        return last < search.end and room >= remaining - 1
    total = len(search.ids)
    if total - last - 1 < remaining:
        return False
    if search.anchor is not None and search.anchor not in partial:
        return search.anchor > last
    return True


def _extensions(search: _Search, partial: tuple[int, ...]) -> list[int]:
    last = partial[-1]
    if search.end is not None:
        if len(partial) == search.n - 1:
            return [search.end]
        return list(range(last + 1, search.end))
    out = range(last + 1, len(search.ids))
    if search.anchor is not None and len(partial) == search.n - 1:
        if search.anchor not in partial:
            return [search.anchor] if search.anchor > last else []
    return list(out)


class _Scorer:
    """Evaluates partial chains; memoizes link vectors and results."""

    def __init__(self, search: _Search, profiles: ProfileSource, r: float, kernel: str):
        self.search = search
        self.profiles = profiles
        self.r = r
        self.kernel = kernel
        self._links: dict[tuple[int, int], np.ndarray] = {}

    def link(self, a: int, b: int) -> np.ndarray:
        key = (a, b)
        hit = self._links.get(key)
        if hit is None:
            hit = self.profiles(int(self.search.indices[a]), int(self.search.indices[b]))
            if isinstance(hit, InfluenceProfile):
                hit = hit.per_word
            self._links[key] = hit
        return hit

    def chain_of(self, positions: tuple[int, ...]) -> Chain:
        return Chain(
            tuple(self.search.ids[p] for p in positions),
            tuple(int(self.search.years[p]) for p in positions),
        )

    def score(self, positions: tuple[int, ...]) -> CoherenceResult:
        vectors = [self.link(a, b) for a, b in zip(positions[:-1], positions[1:])]
        return coherence_evolving_topic(
            self.chain_of(positions), vectors, self.r, kernel=self.kernel
        )


def _ids_key(search: _Search, positions: tuple[int, ...]) -> tuple[str, ...]:
    return tuple(search.ids[p] for p in positions)


def _beam_search(
    search: _Search, scorer: _Scorer, beam_width: int
) -> tuple[tuple[int, ...], CoherenceResult] | None:
    if search.start is not None:
        beam: list[tuple[tuple[int, ...], float]] = [((search.start,), np.inf)]
    elif search.anchor is not None:
        beam = [((p,), np.inf) for p in range(len(search.ids))]
    else:
        beam = [((p,), np.inf) for p in range(len(search.ids))]
    beam = [b for b in beam if _feasible(search, b[0])]

    best_final: tuple[tuple[int, ...], CoherenceResult] | None = None
    for length in range(2, search.n + 1):
        candidates = []
        for partial, partial_score in beam:
            for nxt in _extensions(search, partial):
                ext = partial + (nxt,)
                if length < search.n and not _feasible(search, ext):
                    continue
                bound = min(partial_score, float(scorer.link(partial[-1], nxt).max()))
                candidates.append((ext, bound))
        if not candidates:
            return None
        # lazy exact scoring: bounds are valid upper bounds, so stop once
        # the B-th best exact score dominates every remaining bound
        candidates.sort(key=lambda c: (-c[1], _ids_key(search, c[0])))
        keep = beam_width if length < search.n else 1
        exact: list[tuple[tuple[int, ...], CoherenceResult]] = []
        kth = -np.inf
        for ext, bound in candidates:
            if len(exact) >= keep and bound < kth - 1e-12:
                break
            result = scorer.score(ext)
            exact.append((ext, result))
            if len(exact) >= keep:
                kth = sorted(r.score for _, r in exact)[-keep]
        exact.sort(key=lambda e: (-e[1].score, _ids_key(search, e[0])))
        exact = exact[:keep]
        if length == search.n:
            valid = [e for e in exact if _final_ok(search, e[0])]
            if valid:
                best_final = valid[0]
        else:
            beam = [(ext, res.score) for ext, res in exact]
    return best_final


def _final_ok(search: _Search, positions: tuple[int, ...]) -> bool:
    if len(positions) != search.n:
        return False
    if search.anchor is not None and search.anchor not in positions:
        return False
    if search.start is not None and (
        positions[0] != search.start or positions[-1] != search.end
    ):
        return False
    return True


def _exhaustive_search(
    search: _Search, scorer: _Scorer
) -> tuple[tuple[int, ...], CoherenceResult] | None:
    total = len(search.ids)
    if search.start is not None:
        middles = range(search.start + 1, search.end)
        m = search.n - 2
        if comb(len(middles), max(m, 0)) > _EXHAUSTIVE_LIMIT:
            raise ValidationError("pool too large for exhaustive search")
        combos = (
            (search.start, *mid, search.end) for mid in combinations(middles, m)
        )
    else:
        if comb(total, search.n) > _EXHAUSTIVE_LIMIT:
            raise ValidationError("pool too large for exhaustive search")
        combos = combinations(range(total), search.n)

    best: tuple[tuple[int, ...], CoherenceResult] | None = None
    for positions in combos:
        positions = tuple(positions)
        if not _final_ok(search, positions):
            continue
        result = scorer.score(positions)
        if best is None or (
            (-result.score, _ids_key(search, positions))
            < (-best[1].score, _ids_key(search, best[0]))
        ):
            best = (positions, result)
    return best


def best_chain(
    pool: CandidatePool,
    spec: QuerySpec,
    profiles: ProfileSource,
    corpus: Corpus,
    kernel: str = "highs",
) -> tuple[Chain, CoherenceResult]:
    """Highest-coherence chronological chain of the requested length."""
    if spec.chain_length is None or spec.r is None:
        raise ValidationError("query spec must be resolved before chain search")
    if len(pool.indices) < spec.chain_length:
        raise QueryError(
            f"pool for community {pool.community} is smaller than the chain length"
        )
    search = _prepare_search(pool, spec, corpus)
    scorer = _Scorer(search, profiles, spec.r, kernel)
    if spec.mode == "exhaustive":
        found = _exhaustive_search(search, scorer)
    else:
        width = spec.beam_width or 64
        found = _beam_search(search, scorer, width)
    if found is None:
        raise QueryError("no valid chain satisfies the query constraints")
    positions, result = found
    return scorer.chain_of(positions), result
