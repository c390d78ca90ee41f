"""Topic coherence of chronological paper chains.

A chain's coherence is the best achievable strength of its weakest link,
where each link's strength is the topic-weighted sum of word influences.
With smoothness radius r = 0 a single topic serves every link; r > 0
lets the topic drift by at most r per word between consecutive links.
Both cases are one linear program.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import NumericError, ValidationError
from .influence import InfluenceProfile
from .lp import simplex_maximize

_SMOOTH_TOL = 1e-9
_MAX_CUT_ROUNDS = 500


@dataclass(frozen=True)
class Chain:
    """Simple directed path of papers, strictly chronological.

    Equal years are ordered by paper id, so (year, id) is a total order.
    """

    papers: tuple[str, ...]
    years: tuple[int, ...]

    def __post_init__(self):
        if len(self.papers) != len(self.years):
            raise ValidationError("papers and years must align")
        if len(self.papers) < 2:
            raise ValidationError("a chain needs at least 2 papers")
        if len(set(self.papers)) != len(self.papers):
            raise ValidationError("chain repeats a paper")
        order = list(zip(self.years, self.papers))
        if any(order[i] >= order[i + 1] for i in range(len(order) - 1)):
            raise ValidationError("chain is not chronologically ordered")

    def __len__(self) -> int:
        return len(self.papers)

    @property
    def links(self) -> list[tuple[str, str]]:
        return list(zip(self.papers[:-1], self.papers[1:]))


@dataclass
class TopicSequence:
    """One word-weight vector per link; consecutive vectors drift <= r."""

    topics: list[np.ndarray]
    smoothness: float


@dataclass
class CoherenceResult:
    score: float
    topics: TopicSequence
    active_words: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))


def _solve_shared_topic(vectors: np.ndarray) -> tuple[float, np.ndarray, np.ndarray, float]:
    """r = 0 kernel on a word subset: variables [t (d), s]."""
    n_links, d = vectors.shape
    c = np.zeros(d + 1)
    c[-1] = 1.0
    a_ub = np.hstack([-vectors, np.ones((n_links, 1))])
    a_eq = np.ones((1, d + 1))
    a_eq[0, -1] = 0.0
    x, score, dual_ub, dual_eq = simplex_maximize(
        c, a_ub, np.zeros(n_links), a_eq, [1.0], with_duals=True
    )
    return score, x[:d], dual_ub[:n_links], float(dual_eq[0])


def _solve_drifting_topics(
    vectors: np.ndarray, r: float
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """0 < r < 1 kernel on a word subset: variables [t^1..t^L, s].

    Drift inequalities are generated lazily: solve without them, add the
    violated ones, re-solve until the returned vertex satisfies all of
    them. Exact, and keeps the tableau near the handful of constraints
    that bind at an optimum.
    """
    n_links, d = vectors.shape
    n_vars = n_links * d + 1
    c = np.zeros(n_vars)
    c[-1] = 1.0
    link_rows = np.zeros((n_links, n_vars))
    eq_rows = np.zeros((n_links, n_vars))
    for j in range(n_links):
        link_rows[j, j * d : (j + 1) * d] = -vectors[j]
        link_rows[j, -1] = 1.0
        eq_rows[j, j * d : (j + 1) * d] = 1.0
    b_eq = np.ones(n_links)

    cuts: list[np.ndarray] = []
    for _ in range(_MAX_CUT_ROUNDS):
        a_ub = np.vstack([link_rows] + cuts) if cuts else link_rows
        b_ub = np.zeros(n_links + len(cuts))
        b_ub[n_links:] = r
        x, score, dual_ub, dual_eq = simplex_maximize(
            c, a_ub, b_ub, eq_rows, b_eq, with_duals=True
        )
        weights = x[:-1].reshape(n_links, d)
        drift = weights[1:] - weights[:-1]
        violated = np.argwhere(np.abs(drift) > r + _SMOOTH_TOL)
        if violated.size == 0:
            return score, weights, dual_ub[:n_links], dual_eq
        for j, i in violated:
            sign = 1.0 if drift[j, i] > 0 else -1.0
            row = np.zeros(n_vars)
            row[(j + 1) * d + i] = sign
            row[j * d + i] = -sign
            cuts.append(row)
    raise NumericError("drift constraint generation did not terminate")


def _solve_full_highs(vectors: np.ndarray, r: float) -> tuple[float, np.ndarray]:
    """One sparse solve of the whole LP with scipy's HiGHS backend."""
    n_links, d = vectors.shape
    n_vars = n_links * d + 1
    c = np.zeros(n_vars)
    c[-1] = -1.0  # linprog minimizes
    if r == 0.0:
        # shared topic: smaller system over [t (d), s]
        c = np.zeros(d + 1)
        c[-1] = -1.0
        a_ub = np.hstack([-vectors, np.ones((n_links, 1))])
        a_eq = np.ones((1, d + 1))
        a_eq[0, -1] = 0.0
        res = linprog(c, A_ub=a_ub, b_ub=np.zeros(n_links), A_eq=a_eq, b_eq=[1.0],
                      bounds=(0, None), method="highs")
        if res.status != 0:
            raise NumericError(f"LP solver failed: {res.message}")
        return -float(res.fun), np.tile(res.x[:d], (n_links, 1))

    link = sparse.hstack(
        [sparse.block_diag([-vectors[j : j + 1] for j in range(n_links)]),
         np.ones((n_links, 1))]
    )
    n_drift = 2 * d * (n_links - 1)
    data = np.tile([1.0, -1.0, -1.0, 1.0], n_drift // 2)
    row_idx = np.repeat(np.arange(n_drift), 2)
    base = np.arange(n_links - 1).repeat(d) * d + np.tile(np.arange(d), n_links - 1)
    col_hi, col_lo = base + d, base
    col_idx = np.empty(2 * n_drift, dtype=int)
    col_idx[0::4], col_idx[1::4] = col_hi, col_lo
    col_idx[2::4], col_idx[3::4] = col_hi, col_lo
    drift = sparse.csr_matrix((data, (row_idx, col_idx)), shape=(n_drift, n_vars))
    a_ub = sparse.vstack([link, drift], format="csr")
    b_ub = np.concatenate([np.zeros(n_links), np.full(n_drift, r)])
    a_eq = sparse.hstack(
        [sparse.block_diag([np.ones((1, d))] * n_links), sparse.csr_matrix((n_links, 1))]
    )
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=np.ones(n_links),
                  bounds=(0, None), method="highs")
    if res.status != 0:
        raise NumericError(f"LP solver failed: {res.message}")
    return -float(res.fun), res.x[:-1].reshape(n_links, d)


_SEED_WORDS_PER_LINK = 8
_PRICED_WORDS_PER_ROUND = 32


def _solve_full_bland(vectors: np.ndarray, r: float) -> tuple[float, np.ndarray]:
    """Reference solve with the in-package Bland-rule simplex.

    Few words carry weight at an optimum, so the LP runs on a working
    subset of words grown by exact dual pricing (a left-out word enters
    only while some link's dual values it above that link's simplex
    price); termination certifies optimality over the full vocabulary.
    """
    n_links, d = vectors.shape
    top = np.argsort(-vectors, axis=1, kind="stable")[:, : min(d, _SEED_WORDS_PER_LINK)]
    working = np.unique(top)
    for _ in range(d + 1):
        sub = vectors[:, working]
        if r == 0.0:
            score, t, lam, mu = _solve_shared_topic(sub)
            sub_weights = np.tile(t, (n_links, 1))
            margin = lam @ vectors - mu  # (d,): price of each word
        else:
            score, sub_weights, lam, mu = _solve_drifting_topics(sub, r)
            margin = (lam[:, None] * vectors - mu[:, None]).max(axis=0)
        margin[working] = -np.inf
        entering = np.flatnonzero(margin > 1e-9)
        if entering.size == 0:
            weights = np.zeros((n_links, d))
            weights[:, working] = sub_weights
            return score, weights
        order = entering[np.argsort(-margin[entering], kind="stable")]
        working = np.unique(np.concatenate([working, order[:_PRICED_WORDS_PER_ROUND]]))
    raise NumericError("word pricing did not terminate")


def solve_maximin_lp(
    link_vectors: list[np.ndarray] | np.ndarray, r: float, kernel: str = "highs"
) -> tuple[float, np.ndarray]:
    """Maximize the minimum link value over drift-bounded simplex weights.

    Variables are one weight vector per link plus the floor s; maximize s
    subject to each link's weighted value reaching s, each vector lying
    on the simplex, and per-word drift between consecutive vectors
    bounded by r. Returns (optimal s, weights of shape (links, d)).

    ``kernel`` selects the exact solver: "highs" (scipy, production) or
    "bland" (in-package dense simplex, the cross-checking reference).
    Both are deterministic and agree on the optimal value; the optimizing
    weights may sit on different vertices of the same optimal face.
    """
    vectors = np.atleast_2d(np.asarray(link_vectors, dtype=float))
    n_links, d = vectors.shape
    if d == 0:
        raise ValidationError("link vectors must have dimension >= 1")
    if np.any(vectors < -1e-9):
        raise ValidationError("link vectors must be nonnegative")
    if r < 0:
        raise ValidationError("smoothness radius must be >= 0")
    vectors = np.maximum(vectors, 0.0)

    if n_links == 1 or r >= 1.0:
        # each link independently puts all weight on its best word
        best = np.argmax(vectors, axis=1)
        weights = np.zeros_like(vectors)
        weights[np.arange(n_links), best] = 1.0
        return float(vectors[np.arange(n_links), best].min()), weights

    if kernel == "highs":
        return _solve_full_highs(vectors, r)
    if kernel == "bland":
        return _solve_full_bland(vectors, r)
    raise ValidationError(f"unknown LP kernel {kernel!r}")


def _link_matrix(profiles: list[InfluenceProfile] | list[np.ndarray]) -> np.ndarray:
    rows = [p.per_word if isinstance(p, InfluenceProfile) else np.asarray(p) for p in profiles]
    return np.maximum(np.vstack(rows), 0.0)


def coherence_evolving_topic(
    chain: Chain, profiles: list[InfluenceProfile], r: float, kernel: str = "highs"
) -> CoherenceResult:
    """Best weakest-link strength under smoothly drifting topics.

    The LP is restricted to words with nonzero influence on at least one
    link; every other word provably carries zero weight at some optimum.
    """
    if len(profiles) != len(chain) - 1:
        raise ValidationError("one influence profile per adjacent pair is required")
    vectors = _link_matrix(profiles)
    n_links, vocab_size = vectors.shape
    active = np.flatnonzero(vectors.any(axis=0))
    if active.size == 0:
        uniform = [np.full(vocab_size, 1.0 / vocab_size) for _ in range(n_links)]
        return CoherenceResult(0.0, TopicSequence(uniform, r))
    score, reduced = solve_maximin_lp(vectors[:, active], r, kernel=kernel)
    topics = []
    for j in range(n_links):
        full = np.zeros(vocab_size)
        full[active] = reduced[j]
        topics.append(full)
    return CoherenceResult(score, TopicSequence(topics, r), active)


def coherence_fixed_topic(
    chain: Chain, profiles: list[InfluenceProfile], kernel: str = "highs"
) -> CoherenceResult:
    """Single shared topic for every link: the r = 0 case."""
    return coherence_evolving_topic(chain, profiles, 0.0, kernel=kernel)
