"""Word influence between papers via restart walks on the paper-word graph.

The walk alternates between paper and word nodes; with probability
``restart`` it jumps back to the start paper, otherwise it follows the
current node's outgoing TF-IDF-normalized edges. Blocking a word removes
its outgoing edges so mass entering it is absorbed; the drop in reach of
a target paper is that word's influence on the pair.

``word_influence_vector`` avoids one blocked walk per word: zeroing word
w's out-edges is a rank-1 change of the walk's linear system, so each
blocked distribution is a closed-form combination of the baseline walk
and a start-independent per-word bridge vector (shared across all pairs
and computed once). ``visit_probabilities`` keeps the direct blocked
power iteration and serves as the independent oracle for that fast path.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .corpus import RelationSet
from .errors import NumericError, ValidationError

# Tighter than the 1e-9 oracle-equivalence bound by two orders: the walk
# error after renormalization is ~10x the raw residual in the worst case.
_RESIDUAL_TOL = 1e-12
_MAX_ITERS = 10_000


@dataclass
class InfluenceProfile:
    """Per-word influence values for one ordered paper pair."""

    source: int
    target: int
    per_word: np.ndarray


class BipartiteWalkGraph:
    """Immutable restart-walk graph over paper and word nodes.

    Papers occupy node indices [0, P); words [P, P+W). Lazy caches
    (baseline walks, per-word bridge solves, memoized profiles) are
    internal and guarded by a lock for concurrent use.
    """

    def __init__(
        self,
        paper_to_word: sparse.csr_array,
        word_to_paper: sparse.csr_array,
        restart: float,
        empty_papers: np.ndarray,
    ):
        if not 0 < restart < 1:
            raise ValidationError("restart must be in (0, 1)")
        self.paper_to_word = paper_to_word
        self.word_to_paper = word_to_paper
        self.restart = float(restart)
        self.empty_papers = empty_papers
        self.n_papers = paper_to_word.shape[0]
        self.n_words = paper_to_word.shape[1]
        self._lock = threading.Lock()
        self._baselines: dict[int, tuple[np.ndarray, float]] = {}
        self._bridge: tuple[np.ndarray, np.ndarray] | None = None
        self._profiles: dict[tuple[int, int], InfluenceProfile] = {}

    # -- walk internals ----------------------------------------------------

    def _walk(self, start: int, blocked_word: int | None = None) -> np.ndarray:
        """Fixed point of x = restart*e_start + (1-restart)*M^T x."""
        alpha = self.restart
        p, w = self.n_papers, self.n_words
        xp = np.zeros(p)
        xw = np.zeros(w)
        xp[start] = 1.0
        for _ in range(_MAX_ITERS):
            xw_out = xw if blocked_word is None else _masked(xw, blocked_word)
            new_p = (1 - alpha) * (self.word_to_paper.T @ xw_out)
            new_p[start] += alpha
            new_w = (1 - alpha) * (self.paper_to_word.T @ xp)
            residual = np.abs(new_p - xp).sum() + np.abs(new_w - xw).sum()
            xp, xw = new_p, new_w
            if residual < _RESIDUAL_TOL:
                return np.concatenate([xp, xw])
        raise NumericError(f"walk did not converge; L1 residual {residual:.3e}")

    def baseline(self, start: int) -> tuple[np.ndarray, float]:
        """Unblocked walk from ``start`` and its paper-mass normalizer."""
        with self._lock:
            hit = self._baselines.get(start)
        if hit is not None:
            return hit
        x = self._walk(start)
        z = float(x[: self.n_papers].sum())
        with self._lock:
            self._baselines[start] = (x, z)
        return x, z

    def bridge(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-word solves y_w of the walk system with injection row w of M.

        Returns (Y, diag) where Y[:, w] is y_w over all nodes and
        diag[w] = y_w at word w's own node. Start-independent, computed
        once and reused by every influence profile.
        """
        with self._lock:
            if self._bridge is not None:
                return self._bridge
        alpha = self.restart
        p, w = self.n_papers, self.n_words
        inject_p = self.word_to_paper.T.toarray()  # (P, W): column w = out-edges of word w
        yp = np.zeros((p, w))
        yw = np.zeros((w, w))
        for _ in range(_MAX_ITERS):
            new_p = inject_p + (1 - alpha) * (self.word_to_paper.T @ yw)
            new_w = (1 - alpha) * (self.paper_to_word.T @ yp)
            residual = float(
                (np.abs(new_p - yp).sum(axis=0) + np.abs(new_w - yw).sum(axis=0)).max()
            )
            yp, yw = new_p, new_w
            if residual < _RESIDUAL_TOL:
                break
        else:
            raise NumericError(f"bridge solve did not converge; L1 residual {residual:.3e}")
        full = np.vstack([yp, yw])
        diag = yw.diagonal().copy()
        with self._lock:
            self._bridge = (full, diag)
        return self._bridge


def _masked(xw: np.ndarray, blocked: int) -> np.ndarray:
    out = xw.copy()
    out[blocked] = 0.0
    return out


def build_walk_graph(relations: RelationSet, restart: float = 0.15) -> BipartiteWalkGraph:
    """Row/column-normalize the TF-IDF matrix into walk transitions.

    Papers with no text keep an empty row (flagged; the walker can only
    restart from them). Words whose TF-IDF column is all zero are
    isolated in both directions.
    """
    content = sparse.csr_array(relations.content)
    if content.nnz == 0:
        raise ValidationError("content matrix is empty")
    if np.any(content.data < 0):
        raise ValidationError("content matrix has negative entries")

    row_sums = content.sum(axis=1)
    empty_papers = np.flatnonzero(row_sums == 0)
    row_scale = np.divide(1.0, row_sums, out=np.zeros_like(row_sums), where=row_sums > 0)
    paper_to_word = sparse.csr_array(content.multiply(row_scale[:, None]))

    col_sums = content.sum(axis=0)
    col_scale = np.divide(1.0, col_sums, out=np.zeros_like(col_sums), where=col_sums > 0)
    word_to_paper = sparse.csr_array(content.multiply(col_scale[None, :]).T)

    return BipartiteWalkGraph(paper_to_word, word_to_paper, restart, empty_papers)


def visit_probabilities(
    graph: BipartiteWalkGraph, start: int, blocked_word: int | None = None
) -> np.ndarray:
    """Paper-restricted visit distribution of the restart walk.

    The unblocked distribution is renormalized over papers; a blocked
    walk reuses the baseline normalizer so absorbed mass stays lost and
    blocking can only lower probabilities.
    """
    if not 0 <= start < graph.n_papers:
        raise ValidationError(f"start paper {start} out of range")
    if blocked_word is not None and not 0 <= blocked_word < graph.n_words:
        raise ValidationError(f"blocked word {blocked_word} out of range")
    _, z = graph.baseline(start)
    if blocked_word is None:
        x, _ = graph.baseline(start)
    else:
        x = graph._walk(start, blocked_word)
    return x[: graph.n_papers] / z


def word_influence_vector(graph: BipartiteWalkGraph, p_i: int, p_j: int) -> InfluenceProfile:
    """Influence of every word on the pair (p_i -> p_j), memoized per pair."""
    for p in (p_i, p_j):
        if not 0 <= p < graph.n_papers:
            raise ValidationError(f"paper {p} out of range")
    with graph._lock:
        hit = graph._profiles.get((p_i, p_j))
    if hit is not None:
        return hit

    alpha = graph.restart
    x, z = graph.baseline(p_i)
    word_mass = x[graph.n_papers :]
    bridge, diag = graph.bridge()
    reach = bridge[p_j, :]
    per_word = (1 - alpha) * word_mass * reach / ((1.0 + (1 - alpha) * diag) * z)
    profile = InfluenceProfile(p_i, p_j, per_word)
    with graph._lock:
        graph._profiles.setdefault((p_i, p_j), profile)
    return profile


def topic_similarity(profile: InfluenceProfile, topic: np.ndarray) -> float:
    """Topic-weighted influence sum: dot(topic, per_word)."""
    topic = np.asarray(topic, dtype=float)
    if topic.shape != profile.per_word.shape:
        raise ValidationError(
            f"topic has size {topic.size}, vocabulary has {profile.per_word.size}"
        )
    if np.any(topic < 0):
        raise ValidationError("topic weights must be nonnegative")
    if abs(float(topic.sum()) - 1.0) > 1e-9:
        raise ValidationError("topic weights must sum to 1")
    return float(topic @ profile.per_word)
