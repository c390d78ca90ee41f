"""Restart-walk visit probabilities and per-word influence."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import sparse

from pegraph.corpus import RelationSet
from pegraph.errors import ValidationError
from pegraph.influence import (
    InfluenceProfile,
    build_walk_graph,
    topic_similarity,
    visit_probabilities,
    word_influence_vector,
)


def graph_from_content(content, restart=0.15):
    content = np.asarray(content, dtype=float)
    p, w = content.shape
    rels = RelationSet(
        sparse.csr_array((p, p)),
        sparse.csr_array(content),
        sparse.csr_array((p, 1)),
        {},
    )
    return build_walk_graph(rels, restart)


def dense_walk_oracle(graph, start, blocked=None):
    """Direct linear solve of (I - (1-a) M^T) x = a e_start over all nodes."""
    p, w = graph.n_papers, graph.n_words
    m = np.zeros((p + w, p + w))
    m[:p, p:] = graph.paper_to_word.toarray()
    m[p:, :p] = graph.word_to_paper.toarray()
    if blocked is not None:
        m[p + blocked, :] = 0.0
    rhs = np.zeros(p + w)
    rhs[start] = graph.restart
    return np.linalg.solve(np.eye(p + w) - (1 - graph.restart) * m.T, rhs)


def random_content(rng, p, w):
    content = rng.random((p, w)) * (rng.random((p, w)) < 0.6)
    if content.sum() == 0:
        content[0, 0] = 1.0
    return content


class TestBuildWalkGraph:
    def test_single_edge(self):
        g = graph_from_content([[2.5]])
        assert g.paper_to_word.toarray().tolist() == [[1.0]]
        assert g.word_to_paper.toarray().tolist() == [[1.0]]

    def test_row_normalization(self):
        g = graph_from_content([[2.0, 6.0]])
        np.testing.assert_allclose(g.paper_to_word.toarray(), [[0.25, 0.75]])

    def test_column_normalization(self):
        g = graph_from_content([[1.0], [1.0], [2.0]])
        np.testing.assert_allclose(g.word_to_paper.toarray(), [[0.25, 0.25, 0.5]])

    def test_empty_paper_row_flagged(self):
        g = graph_from_content([[1.0, 1.0], [0.0, 0.0]])
        assert g.empty_papers.tolist() == [1]
        assert g.paper_to_word[[1], :].nnz == 0

    def test_rows_stochastic(self):
        rng = np.random.default_rng(3)
        g = graph_from_content(random_content(rng, 7, 5))
        for matrix in (g.paper_to_word, g.word_to_paper):
            sums = matrix.sum(axis=1)
            nonempty = sums > 0
            np.testing.assert_allclose(sums[nonempty], 1.0, atol=1e-10)

    def test_support_symmetry(self):
        rng = np.random.default_rng(4)
        g = graph_from_content(random_content(rng, 6, 4))
        a = (g.paper_to_word.toarray() > 0)
        b = (g.word_to_paper.toarray().T > 0)
        assert np.array_equal(a, b)

    def test_invalid_restart(self):
        with pytest.raises(ValidationError):
            graph_from_content([[1.0]], restart=0.0)
        with pytest.raises(ValidationError):
            graph_from_content([[1.0]], restart=1.0)


class TestVisitProbabilities:
    def test_single_paper_is_point_mass(self):
        g = graph_from_content([[1.0, 3.0]])
        np.testing.assert_allclose(visit_probabilities(g, 0), [1.0])

    def test_blocking_only_word_kills_transfer(self):
        g = graph_from_content([[1.0], [1.0]])
        blocked = visit_probabilities(g, 0, blocked_word=0)
        assert blocked[1] == pytest.approx(0.0, abs=1e-12)
        assert blocked[0] > 0

    def test_matches_dense_solve(self):
        rng = np.random.default_rng(7)
        for _ in range(6):
            p, w = int(rng.integers(2, 9)), int(rng.integers(1, 7))
            g = graph_from_content(random_content(rng, p, w))
            for start in range(p):
                oracle = dense_walk_oracle(g, start)
                z = oracle[:p].sum()
                np.testing.assert_allclose(
                    visit_probabilities(g, start), oracle[:p] / z, atol=1e-9
                )

    def test_blocked_matches_dense_solve(self):
        rng = np.random.default_rng(8)
        g = graph_from_content(random_content(rng, 5, 4))
        z = dense_walk_oracle(g, 2)[:5].sum()
        for word in range(4):
            oracle = dense_walk_oracle(g, 2, blocked=word)
            np.testing.assert_allclose(
                visit_probabilities(g, 2, blocked_word=word), oracle[:5] / z, atol=1e-9
            )

    def test_out_of_range(self):
        g = graph_from_content([[1.0]])
        with pytest.raises(ValidationError):
            visit_probabilities(g, 5)
        with pytest.raises(ValidationError):
            visit_probabilities(g, 0, blocked_word=3)

    def test_nonconvergence_reports_residual(self):
        from pegraph.errors import NumericError

        # a restart this small contracts too slowly for the iteration cap
        g = graph_from_content([[1.0, 0.5], [0.5, 1.0]], restart=1e-9)
        with pytest.raises(NumericError, match="residual"):
            visit_probabilities(g, 0)


class TestWordInfluence:
    def test_self_influence_nonnegative(self):
        rng = np.random.default_rng(9)
        g = graph_from_content(random_content(rng, 5, 4))
        profile = word_influence_vector(g, 1, 1)
        assert np.all(profile.per_word >= -1e-12)

    def test_unique_channel(self):
        # two papers share exactly one word: all influence flows through it
        g = graph_from_content([[1.0], [1.0]])
        profile = word_influence_vector(g, 0, 1)
        baseline = visit_probabilities(g, 0)
        assert profile.per_word[0] == pytest.approx(baseline[1], abs=1e-10)
        assert profile.per_word[0] > 0

    def test_matches_blocked_walk_oracle(self):
        rng = np.random.default_rng(10)
        for trial in range(4):
            p, w = int(rng.integers(3, 7)), int(rng.integers(2, 7))
            g = graph_from_content(random_content(rng, p, w))
            i, j = int(rng.integers(p)), int(rng.integers(p))
            profile = word_influence_vector(g, i, j)
            base = visit_probabilities(g, i)
            brute = np.array([
                base[j] - visit_probabilities(g, i, blocked_word=word)[j]
                for word in range(w)
            ])
            np.testing.assert_allclose(profile.per_word, brute, atol=1e-9)

    def test_blocking_never_increases_reach(self):
        rng = np.random.default_rng(11)
        g = graph_from_content(random_content(rng, 6, 5))
        for start in range(6):
            base = visit_probabilities(g, start)
            for word in range(5):
                blocked = visit_probabilities(g, start, blocked_word=word)
                assert np.all(blocked <= base + 1e-12)

    def test_isolated_word_gets_zero(self):
        # second word appears in every paper so its tfidf column can be zero
        content = np.array([[1.0, 0.0], [2.0, 0.0]])
        g = graph_from_content(content)
        profile = word_influence_vector(g, 0, 1)
        assert profile.per_word[1] == 0.0

    def test_symmetric_pair(self):
        # fully symmetric two-paper graph: influence is symmetric too
        g = graph_from_content([[1.0, 2.0], [1.0, 2.0]])
        forward = word_influence_vector(g, 0, 1).per_word
        backward = word_influence_vector(g, 1, 0).per_word
        np.testing.assert_allclose(forward, backward, atol=1e-9)

    def test_memoized(self):
        g = graph_from_content([[1.0, 2.0], [1.0, 2.0]])
        assert word_influence_vector(g, 0, 1) is word_influence_vector(g, 0, 1)

    def test_concurrent_profiles_match_serial(self):
        from concurrent.futures import ThreadPoolExecutor

        rng = np.random.default_rng(13)
        content = random_content(rng, 8, 6)
        pairs = [(i, j) for i in range(8) for j in range(8)]
        serial_graph = graph_from_content(content)
        serial = {p: word_influence_vector(serial_graph, *p).per_word for p in pairs}
        shared_graph = graph_from_content(content)
        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(
                lambda p: (p, word_influence_vector(shared_graph, *p).per_word), pairs
            ))
        for pair, vector in results:
            np.testing.assert_array_equal(vector, serial[pair])


class TestTopicSimilarity:
    def test_one_hot_topic(self):
        profile = InfluenceProfile(0, 1, np.array([0.1, 0.0, 0.3]))
        one_hot = np.array([0.0, 0.0, 1.0])
        assert topic_similarity(profile, one_hot) == pytest.approx(0.3)

    def test_zero_profile(self):
        profile = InfluenceProfile(0, 1, np.zeros(4))
        assert topic_similarity(profile, np.full(4, 0.25)) == 0.0

    def test_uniform_topic(self):
        profile = InfluenceProfile(0, 1, np.array([0.1, 0.0, 0.3, 0.0]))
        assert topic_similarity(profile, np.full(4, 0.25)) == pytest.approx(0.1)

    def test_wrong_size(self):
        profile = InfluenceProfile(0, 1, np.zeros(4))
        with pytest.raises(ValidationError):
            topic_similarity(profile, np.full(3, 1 / 3))

    def test_unnormalized_topic(self):
        profile = InfluenceProfile(0, 1, np.zeros(2))
        with pytest.raises(ValidationError):
            topic_similarity(profile, np.array([0.5, 0.6]))

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6),
           st.floats(0.05, 0.95))
    def test_linear_in_topic(self, values, mix):
        # similarity of a convex mix of topics equals the mix of similarities
        per_word = np.array(values)
        profile = InfluenceProfile(0, 1, per_word)
        rng = np.random.default_rng(int(mix * 1000))
        t1 = rng.random(len(values)) + 0.01
        t1 /= t1.sum()
        t2 = rng.random(len(values)) + 0.01
        t2 /= t2.sum()
        blend = mix * t1 + (1 - mix) * t2
        blend /= blend.sum()
        left = topic_similarity(profile, blend)
        right = mix * topic_similarity(profile, t1) + (1 - mix) * topic_similarity(profile, t2)
        assert left == pytest.approx(right, abs=1e-9)
