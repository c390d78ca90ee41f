"""Max-min LP, chain types, and coherence scoring."""

from itertools import product

import numpy as np
import pytest
from scipy.optimize import linprog

from pegraph.coherence import (
    Chain,
    coherence_evolving_topic,
    coherence_fixed_topic,
    solve_maximin_lp,
)
from pegraph.errors import ValidationError
from pegraph.influence import InfluenceProfile, topic_similarity


# -- independent oracles -----------------------------------------------------


def scipy_maximin(vectors, r):
    """Full-formulation solve with scipy's LP as an independent oracle."""
    vectors = np.asarray(vectors, dtype=float)
    n_links, d = vectors.shape
    n = n_links * d + 1
    c = np.zeros(n)
    c[-1] = -1.0
    rows, rhs = [], []
    for j in range(n_links):
        row = np.zeros(n)
        row[j * d : (j + 1) * d] = -vectors[j]
        row[-1] = 1.0
        rows.append(row)
        rhs.append(0.0)
    for j in range(n_links - 1):
        for i in range(d):
            for sign in (1.0, -1.0):
                row = np.zeros(n)
                row[(j + 1) * d + i] = sign
                row[j * d + i] = -sign
                rows.append(row)
                rhs.append(r)
    a_eq = np.zeros((n_links, n))
    for j in range(n_links):
        a_eq[j, j * d : (j + 1) * d] = 1.0
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), A_eq=a_eq,
                  b_eq=np.ones(n_links), bounds=(0, None), method="highs")
    assert res.status == 0
    return -float(res.fun)


def _box_max(values, radius, size):
    """max over per-coordinate shifts <= radius whose total stays <= radius."""
    dims = values.ndim
    out = np.full_like(values, -np.inf)
    for delta in product(range(-radius, radius + 1), repeat=dims):
        if abs(sum(delta)) > radius:
            continue
        src, dst = [], []
        for step in delta:
            if step >= 0:
                src.append(slice(step, size + 1))
                dst.append(slice(0, size + 1 - step))
            else:
                src.append(slice(0, size + 1 + step))
                dst.append(slice(-step, size + 1))
        region = out[tuple(dst)]
        np.maximum(region, values[tuple(src)], out=region)
    return out


def grid_maximin(vectors, r, step=0.01):
    """Exact max-min over the step-lattice of the simplex product.

    Dynamic program over links: the value of ending at a lattice topic is
    the min of that link's similarity and the best reachable predecessor
    within the per-word drift box. Lattice solutions are feasible LP
    points, so the result is a lower bound on the LP optimum.
    """
    vectors = np.asarray(vectors, dtype=float)
    n_links, d = vectors.shape
    size = round(1 / step)
    radius = int(round(r / step))
    assert abs(radius * step - r) < 1e-12, "r must be a lattice multiple"
    if d == 1:
        return float(vectors[:, 0].min())

    idx = np.indices((size + 1,) * (d - 1))
    rest = size - idx.sum(axis=0)
    feasible = rest >= 0
    sims = []
    for j in range(n_links):
        sim = step * (
            sum(vectors[j, i] * idx[i] for i in range(d - 1)) + vectors[j, -1] * rest
        )
        sim = np.where(feasible, sim, -np.inf)
        sims.append(sim)
    value = sims[0]
    for j in range(1, n_links):
        value = np.minimum(sims[j], _box_max(value, radius, size))
    return float(value.max())


# -- solve_maximin_lp ---------------------------------------------------------


class TestMaximinLP:
    def test_single_link_picks_best_word(self):
        score, weights = solve_maximin_lp([np.array([3.0, 1.0])], 0.0)
        assert score == 3.0
        assert weights.tolist() == [[1.0, 0.0]]

    def test_orthogonal_links_split(self):
        score, weights = solve_maximin_lp(
            [np.array([1.0, 0.0]), np.array([0.0, 1.0])], 0.0
        )
        assert score == pytest.approx(0.5, abs=1e-9)
        np.testing.assert_allclose(weights, [[0.5, 0.5], [0.5, 0.5]], atol=1e-9)

    def test_all_zero_vectors(self):
        score, weights = solve_maximin_lp(np.zeros((3, 4)), 0.05)
        assert score == 0.0
        np.testing.assert_allclose(weights.sum(axis=1), 1.0, atol=1e-9)

    def test_identical_links(self):
        vec = np.array([0.2, 0.7, 0.1])
        score, _ = solve_maximin_lp([vec, vec, vec], 0.0)
        assert score == pytest.approx(0.7, abs=1e-9)

    def test_vacuous_radius_decouples_links(self):
        rng = np.random.default_rng(0)
        vectors = rng.random((4, 6))
        score, _ = solve_maximin_lp(vectors, 1.0)
        assert score == pytest.approx(float(vectors.max(axis=1).min()), abs=1e-12)

    def test_monotone_in_r(self):
        rng = np.random.default_rng(1)
        for _ in range(15):
            vectors = rng.random((int(rng.integers(2, 5)), int(rng.integers(2, 6))))
            previous = -np.inf
            for r in (0.0, 0.05, 0.2, 1.0):
                score, _ = solve_maximin_lp(vectors, r)
                assert score >= previous - 1e-9
                previous = score

    def test_matches_scipy(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n_links = int(rng.integers(2, 5))
            d = int(rng.integers(2, 8))
            vectors = rng.random((n_links, d)) * (rng.random((n_links, d)) < 0.8)
            for r in (0.0, 0.03, 0.1):
                score, _ = solve_maximin_lp(vectors, r)
                assert score == pytest.approx(scipy_maximin(vectors, r), abs=1e-9)

    def test_kernels_agree(self):
        rng = np.random.default_rng(3)
        for _ in range(15):
            vectors = rng.random((int(rng.integers(2, 5)), int(rng.integers(2, 7))))
            for r in (0.0, 0.05, 0.25):
                fast, _ = solve_maximin_lp(vectors, r, kernel="highs")
                reference, _ = solve_maximin_lp(vectors, r, kernel="bland")
                assert fast == pytest.approx(reference, abs=1e-9)

    def test_grid_oracle_three_words_two_links(self):
        rng = np.random.default_rng(4)
        vectors = rng.random((2, 3))
        score, _ = solve_maximin_lp(vectors, 0.2)
        grid = grid_maximin(vectors, 0.2)
        assert grid <= score + 1e-9  # lattice points are feasible
        assert score - grid <= 1e-2

    def test_weights_are_feasible_certificates(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            n_links = int(rng.integers(1, 5))
            vectors = rng.random((n_links, int(rng.integers(1, 6))))
            for r in (0.0, 0.1, 1.0):
                score, weights = solve_maximin_lp(vectors, r)
                np.testing.assert_allclose(weights.sum(axis=1), 1.0, atol=1e-7)
                assert np.all(weights >= -1e-9)
                values = (vectors * weights).sum(axis=1)
                assert values.min() >= score - 1e-7
                if n_links > 1:
                    assert np.abs(np.diff(weights, axis=0)).max() <= r + 1e-7

    def test_empty_dimension(self):
        with pytest.raises(ValidationError):
            solve_maximin_lp(np.zeros((2, 0)), 0.1)

    def test_negative_radius(self):
        with pytest.raises(ValidationError):
            solve_maximin_lp(np.ones((2, 2)), -0.1)


# -- Chain ---------------------------------------------------------------


class TestChain:
    def test_valid_chain(self):
        chain = Chain(("a", "b", "c"), (1999, 1999, 2004))
        assert chain.links == [("a", "b"), ("b", "c")]
        assert len(chain) == 3

    def test_equal_year_ordered_by_id(self):
        Chain(("a", "b"), (2000, 2000))
        with pytest.raises(ValidationError):
            Chain(("b", "a"), (2000, 2000))

    def test_rejects_duplicates(self):
        with pytest.raises(ValidationError):
            Chain(("a", "a"), (1999, 2002))

    def test_rejects_decreasing_years(self):
        with pytest.raises(ValidationError):
            Chain(("a", "b"), (2004, 1999))

    def test_rejects_short(self):
        with pytest.raises(ValidationError):
            Chain(("a",), (1999,))


# -- coherence scoring ----------------------------------------------------


def profiles_for(chain, vectors):
    return [
        InfluenceProfile(i, i + 1, np.asarray(v, dtype=float))
        for i, v in enumerate(vectors)
    ]


class TestCoherence:
    def test_two_paper_chain_best_word(self):
        chain = Chain(("a", "b"), (1990, 1995))
        result = coherence_fixed_topic(chain, profiles_for(chain, [[0.4, 0.9, 0.1]]))
        assert result.score == pytest.approx(0.9, abs=1e-9)

    def test_fixed_equals_evolving_at_zero(self):
        rng = np.random.default_rng(6)
        chain = Chain(("a", "b", "c", "d"), (1990, 1995, 1999, 2003))
        vectors = rng.random((3, 8))
        fixed = coherence_fixed_topic(chain, profiles_for(chain, vectors))
        evolving = coherence_evolving_topic(chain, profiles_for(chain, vectors), 0.0)
        assert fixed.score == evolving.score

    def test_empty_active_vocabulary(self):
        chain = Chain(("a", "b", "c"), (1990, 1995, 1999))
        result = coherence_evolving_topic(chain, profiles_for(chain, np.zeros((2, 5))), 0.1)
        assert result.score == 0.0
        assert result.active_words.size == 0
        for topic in result.topics.topics:
            np.testing.assert_allclose(topic, 0.2)

    def test_profile_count_checked(self):
        chain = Chain(("a", "b", "c"), (1990, 1995, 1999))
        with pytest.raises(ValidationError):
            coherence_evolving_topic(chain, profiles_for(chain, [[1.0]]), 0.1)

    def test_certificate_reproduces_score(self):
        rng = np.random.default_rng(7)
        for _ in range(8):
            length = int(rng.integers(2, 6))
            chain = Chain(
                tuple(f"p{i}" for i in range(length)),
                tuple(1990 + 2 * i for i in range(length)),
            )
            vectors = rng.random((length - 1, 10)) * (rng.random((length - 1, 10)) < 0.7)
            profiles = profiles_for(chain, vectors)
            result = coherence_evolving_topic(chain, profiles, 0.05)
            # every topic is a distribution, drift is bounded, and plugging
            # the sequence into the similarity reproduces the score
            link_values = []
            for profile, topic in zip(profiles, result.topics.topics):
                np.testing.assert_allclose(topic.sum(), 1.0, atol=1e-7)
                assert np.all(topic >= -1e-9)
                link_values.append(topic_similarity(profile, topic / topic.sum()))
            if length > 2:
                drifts = np.abs(np.diff(np.vstack(result.topics.topics), axis=0))
                assert drifts.max() <= 0.05 + 1e-7
            assert min(link_values) == pytest.approx(result.score, abs=1e-7)

    def test_sandwich_bounds(self):
        rng = np.random.default_rng(8)
        chain = Chain(("a", "b", "c", "d"), (1990, 1993, 1999, 2000))
        for _ in range(10):
            vectors = rng.random((3, 6))
            profiles = profiles_for(chain, vectors)
            lower = coherence_evolving_topic(chain, profiles, 0.0).score
            upper = float(vectors.max(axis=1).min())
            for r in (0.02, 0.1, 0.4):
                score = coherence_evolving_topic(chain, profiles, r).score
                assert lower - 1e-9 <= score <= upper + 1e-9

    def test_weakest_link_removal_never_hurts(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            vectors = rng.random((4, 5))
            score, weights = solve_maximin_lp(vectors, 0.0)
            values = (vectors * weights).sum(axis=1)
            weakest = int(np.argmin(values))
            remaining = np.delete(vectors, weakest, axis=0)
            sub_score, _ = solve_maximin_lp(remaining, 0.0)
            assert sub_score >= score - 1e-9

    def test_active_words_reported(self):
        chain = Chain(("a", "b"), (1990, 1995))
        vectors = np.array([[0.0, 0.5, 0.0, 0.2]])
        result = coherence_fixed_topic(chain, profiles_for(chain, vectors))
        assert result.active_words.tolist() == [1, 3]
