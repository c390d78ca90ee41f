"""Joint factorization of the three relation matrices.

All relations share the paper factor and a diagonal core of community
probabilities; the fit minimizes a weighted sum of generalized KL
divergences with EM-style multiplicative updates. Every relation is
2-way, so the updates are carried out in sparse matrix form and
responsibilities are only ever materialized at observed cells.

Each relation matrix is scaled to unit total mass before fitting so the
core and the factor columns keep their probabilistic reading (core and
columns sum to 1); the original masses are recorded on the model.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from .corpus import RelationSet
from .errors import DegeneratePaperError, NumericError, ValidationError

_EPS = 1e-12

RELATION_NAMES = ("citation", "content", "authorship")
# facets incident to each relation: 0 = paper, 1 = word, 2 = author
_RELATION_FACETS = {"citation": (0, 0), "content": (0, 1), "authorship": (0, 2)}
FACET_NAMES = ("paper", "word", "author")


@dataclass
class TopicDistribution:
    """Per-paper probability vector over communities."""

    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.ndim != 1 or self.probs.size == 0:
            raise ValidationError("topic distribution must be a nonempty vector")
        if np.any(self.probs < 0):
            raise ValidationError("topic distribution has negative entries")
        if abs(float(self.probs.sum()) - 1.0) > 1e-8:
            raise ValidationError("topic distribution must sum to 1")


@dataclass
class MetaFacModel:
    """Converged factorization state: diagonal core plus one factor per facet."""

    n_communities: int
    core: np.ndarray  # (K,), sums to 1
    paper_factor: np.ndarray  # (P, K), column-stochastic
    word_factor: np.ndarray  # (W, K)
    author_factor: np.ndarray  # (A, K)
    weights: tuple[float, float, float]
    seed: int
    objective_trace: list[float]
    relation_mass: tuple[float, float, float]

    def factor(self, facet: int) -> np.ndarray:
        return (self.paper_factor, self.word_factor, self.author_factor)[facet]

    def reconstruction(self, relation: str, mass_scaled: bool = True) -> np.ndarray:
        """Dense model estimate of one relation (test/diagnostic use)."""
        a, b = _RELATION_FACETS[relation]
        est = (self.factor(a) * self.core) @ self.factor(b).T
        if mass_scaled:
            est = est * self.relation_mass[RELATION_NAMES.index(relation)]
        return est


@dataclass
class _Rel:
    """One relation prepared for the EM loop (COO view + CSR template)."""

    name: str
    facet_a: int
    facet_b: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    weight: float
    template: sparse.csr_array

    def with_data(self, data: np.ndarray) -> sparse.csr_array:
        out = self.template.copy()
        out.data = data
        return out


def _as_coo(matrix: sparse.csr_array) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    coo = sparse.coo_array(matrix)
    coo.sum_duplicates()
    return coo.row.copy(), coo.col.copy(), coo.data.astype(float)


def _prepare_relations(relations: RelationSet, weights: np.ndarray) -> list[_Rel]:
    rels = []
    mats = (relations.citation, relations.content, relations.authorship)
    for name, matrix, weight in zip(RELATION_NAMES, mats, weights):
        rows, cols, vals = _as_coo(matrix)
        if vals.size == 0 or vals.sum() <= 0:
            raise ValidationError(f"relation {name!r} is empty")
        if np.any(vals < 0):
            raise ValidationError(f"relation {name!r} has negative entries")
        mass = float(vals.sum())
        vals = vals / mass  # unit total mass per relation
        template = sparse.csr_array((vals, (rows, cols)), shape=matrix.shape)
        rows, cols, vals = _as_coo(template)  # canonical CSR cell order
        a, b = _RELATION_FACETS[name]
        rels.append(_Rel(name, a, b, rows, cols, vals, float(weight), template))
    return rels


def _entity_seeded_rows(global_seed: int, facet: str, keys: list[str], k: int) -> np.ndarray:
    """Initial factor rows keyed by entity identity, not position.

    Seeding each row from (seed, facet, entity key) makes initialization
    invariant to record order, so relabeling papers permutes factor rows.
    """
    out = np.empty((len(keys), k))
    for i, key in enumerate(keys):
        digest = hashlib.sha256(f"{global_seed}:{facet}:{key}".encode()).digest()
        rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "little")))
        out[i] = rng.uniform(0.1, 1.0, k)
    return out


def _divergence(rel: _Rel, ua: np.ndarray, ub: np.ndarray, core: np.ndarray) -> float:
    """Generalized KL divergence D(X || U_a diag(core) U_b^T) at observed cells."""
    est = ((ua[rel.rows] * ub[rel.cols]) @ core)
    if np.any(est <= 0):
        return float("inf")
    total_est = float(core @ (ua.sum(axis=0) * ub.sum(axis=0)))
    return float(np.sum(rel.vals * np.log(rel.vals / est)) - rel.vals.sum() + total_est)


def factorize(
    relations: RelationSet,
    n_communities: int,
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3),
    seed: int = 0,
    max_iters: int = 300,
    tol: float = 1e-6,
    entity_keys: tuple[list[str], list[str], list[str]] | None = None,
) -> MetaFacModel:
    """Fit the shared-factor model by alternating E and M steps.

    E-step: each observed cell's mass is split over communities in
    proportion to ``core_k * U_a(i,k) * U_b(j,k)``. M-step: the core is
    the weighted accumulation of responsibilities over all relations and
    each factor accumulates over the relations incident to its facet,
    then is column-normalized. Stops when the relative objective change
    drops below ``tol`` or after ``max_iters`` iterations.

    ``entity_keys`` optionally names the (paper, word, author) entities;
    initialization is then keyed to identity rather than position.
    """
    k = int(n_communities)
    if k < 1:
        raise ValidationError("n_communities must be >= 1")
    w = np.asarray(weights, dtype=float)
    if w.shape != (3,) or np.any(w < 0):
        raise ValidationError("weights must be three nonnegative numbers")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValidationError("weights must sum to 1")
    w = w / w.sum()

    sizes = (
        relations.citation.shape[0],
        relations.content.shape[1],
        relations.authorship.shape[1],
    )
    if k > min(sizes):
        raise ValidationError(
            f"n_communities={k} exceeds the smallest facet dimension {min(sizes)}"
        )

    rels = _prepare_relations(relations, w)
    masses = tuple(
        float(m.sum()) for m in (relations.citation, relations.content, relations.authorship)
    )

    if entity_keys is None:
        entity_keys = tuple([str(i) for i in range(size)] for size in sizes)  # type: ignore[assignment]
    factors = []
    for facet, (name, keys) in enumerate(zip(FACET_NAMES, entity_keys)):
        if len(keys) != sizes[facet]:
            raise ValidationError(f"entity_keys for facet {name!r} has wrong length")
        init = _entity_seeded_rows(seed, name, keys, k)
        factors.append(init / init.sum(axis=0))
    core = np.full(k, 1.0 / k)

    def objective() -> float:
        # zero-weight relations do not participate (0 * inf stays out)
        return float(
            sum(r.weight * _divergence(r, factors[r.facet_a], factors[r.facet_b], core)
                for r in rels if r.weight > 0)
        )

    trace = [objective()]
    if not np.isfinite(trace[0]):
        raise NumericError("non-finite objective at initialization")

    for iteration in range(max_iters):
        new_core = np.zeros(k)
        acc = [np.zeros_like(f) for f in factors]
        for rel in rels:
            ua, ub = factors[rel.facet_a], factors[rel.facet_b]
            denom = (ua[rel.rows] * ub[rel.cols]) @ core
            ratio = rel.vals / np.maximum(denom, _EPS)
            t = rel.with_data(ratio)
            to_a = core * ua * (t @ ub)
            to_b = core * ub * (t.T @ ua)
            new_core += rel.weight * to_a.sum(axis=0)
            acc[rel.facet_a] += rel.weight * to_a
            acc[rel.facet_b] += rel.weight * to_b
        core = new_core / max(new_core.sum(), _EPS)
        for facet, arr in enumerate(acc):
            colsum = arr.sum(axis=0)
            alive = colsum > _EPS
            # dead communities keep their previous (normalized) columns
            factors[facet] = np.where(alive, arr / np.maximum(colsum, _EPS), factors[facet])

        value = objective()
        if not np.isfinite(value):
            raise NumericError(f"non-finite objective at iteration {iteration + 1}")
        previous = trace[-1]
        trace.append(value)
        if previous == 0.0 or abs(previous - value) / max(abs(previous), _EPS) < tol:
            break

    return MetaFacModel(
        n_communities=k,
        core=core,
        paper_factor=factors[0],
        word_factor=factors[1],
        author_factor=factors[2],
        weights=tuple(float(x) for x in w),
        seed=int(seed),
        objective_trace=trace,
        relation_mass=masses,
    )


def objective_value(relations: RelationSet, model: MetaFacModel) -> float:
    """Weighted generalized KL of the given relations against the model.

    The model estimate is the unit-mass reconstruction
    ``U_a diag(core) U_b^T``; callers comparing against raw matrices must
    normalize them first (``factorize`` does so internally). Returns
    +infinity when an observed cell has zero estimated mass.
    """
    mats = (relations.citation, relations.content, relations.authorship)
    total = 0.0
    for name, matrix, weight in zip(RELATION_NAMES, mats, model.weights):
        if weight == 0:
            continue
        rows, cols, vals = _as_coo(matrix)
        a, b = _RELATION_FACETS[name]
        ua, ub = model.factor(a), model.factor(b)
        if matrix.shape != (ua.shape[0], ub.shape[0]):
            raise ValidationError(f"relation {name!r} shape mismatch with model")
        rel = _Rel(name, a, b, rows, cols, vals, weight, None)  # type: ignore[arg-type]
        total += weight * _divergence(rel, ua, ub, model.core)
    return float(total)


def cell_responsibilities(
    relations: RelationSet, model: MetaFacModel, relation: str
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-cell allocation of observed mass to communities (E-step view).

    Returns (rows, cols, alloc) where ``alloc[c, k]`` is cell c's mass
    assigned to community k; each row of ``alloc`` sums to the cell value.
    """
    matrix = getattr(relations, relation)
    rows, cols, vals = _as_coo(matrix)
    a, b = _RELATION_FACETS[relation]
    ua, ub = model.factor(a), model.factor(b)
    parts = model.core * ua[rows] * ub[cols]
    denom = np.maximum(parts.sum(axis=1, keepdims=True), _EPS)
    return rows, cols, vals[:, None] * parts / denom


def topic_distribution(model: MetaFacModel, paper: int) -> TopicDistribution:
    """Posterior community probabilities of one paper (Bayes over the core)."""
    if not 0 <= paper < model.paper_factor.shape[0]:
        raise ValidationError(f"paper index {paper} out of range")
    raw = model.paper_factor[paper] * model.core
    total = float(raw.sum())
    if total <= 0:
        raise DegeneratePaperError(f"paper {paper} has no community signal")
    return TopicDistribution(raw / total)


def assign_communities(dist: TopicDistribution, com_t: float) -> set[int]:
    """Communities whose probability reaches ``com_t``; argmax fallback."""
    if not 0 < com_t <= 1:
        raise ValidationError("com_t must be in (0, 1]")
    chosen = {int(i) for i in np.flatnonzero(dist.probs >= com_t)}
    if not chosen:
        chosen = {int(np.argmax(dist.probs))}
    return chosen


def membership_matrix(model: MetaFacModel, com_t: float) -> np.ndarray:
    """Boolean (P, K) soft-membership matrix under ``com_t`` with fallback."""
    if not 0 < com_t <= 1:
        raise ValidationError("com_t must be in (0, 1]")
    raw = model.paper_factor * model.core
    totals = raw.sum(axis=1, keepdims=True)
    if np.any(totals <= 0):
        bad = int(np.flatnonzero(totals.ravel() <= 0)[0])
        raise DegeneratePaperError(f"paper {bad} has no community signal")
    probs = raw / totals
    member = probs >= com_t
    empty = ~member.any(axis=1)
    member[empty, np.argmax(probs[empty], axis=1)] = True
    return member


def model_to_dict(model: MetaFacModel) -> dict:
    """JSON-ready checkpoint; float lists round-trip bit-exactly."""
    return {
        "n_communities": model.n_communities,
        "core": model.core.tolist(),
        "paper_factor": model.paper_factor.tolist(),
        "word_factor": model.word_factor.tolist(),
        "author_factor": model.author_factor.tolist(),
        "weights": list(model.weights),
        "seed": model.seed,
        "objective_trace": list(model.objective_trace),
        "relation_mass": list(model.relation_mass),
    }


def model_from_dict(data: dict) -> MetaFacModel:
    return MetaFacModel(
        n_communities=int(data["n_communities"]),
        core=np.asarray(data["core"], dtype=float),
        paper_factor=np.asarray(data["paper_factor"], dtype=float),
        word_factor=np.asarray(data["word_factor"], dtype=float),
        author_factor=np.asarray(data["author_factor"], dtype=float),
        weights=tuple(data["weights"]),
        seed=int(data["seed"]),
        objective_trace=[float(x) for x in data["objective_trace"]],
        relation_mass=tuple(data["relation_mass"]),
    )


def save_model(model: MetaFacModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model)), encoding="utf-8")


def load_model(path: str | Path) -> MetaFacModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
