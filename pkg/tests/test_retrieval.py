"""Exact nearest-neighbor index: ordering, ties, oracle agreement."""

import numpy as np
import pytest

from moodbridge.errors import DataError
from moodbridge.models import COSINE, EUCLIDEAN, EmbeddingSpaceSpec, EmbeddingVector
from moodbridge.retrieval import build_index, query


def unit_rows(rng, n, dim):
    m = rng.standard_normal((n, dim))
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def make_index(n=20, dim=4, metric=COSINE, seed=0):
    rng = np.random.default_rng(seed)
    space = EmbeddingSpaceSpec(dim, metric)
    matrix = unit_rows(rng, n, dim) if metric == COSINE else rng.standard_normal((n, dim))
    ids = [f"m{i:03d}" for i in range(n)]
    tags = [f"tag{i % 3}" for i in range(n)]
    return build_index(ids=ids, tags=tags, matrix=matrix, space=space), matrix


class TestBuildIndex:
    def test_empty_index_returns_empty_hits(self):
        space = EmbeddingSpaceSpec(3, COSINE)
        index = build_index(ids=[], tags=[], matrix=np.zeros((0, 3)), space=space)
        res = query(index, EmbeddingVector(space, np.array([1.0, 0, 0])), 5)
        assert res.hits == []

    def test_duplicate_ids_rejected(self):
        space = EmbeddingSpaceSpec(2, COSINE)
        with pytest.raises(DataError, match="duplicate"):
            build_index(ids=["a", "a"], tags=["x", "y"],
                        matrix=np.eye(2), space=space)

    def test_entry_form_with_mixed_spaces_rejected(self):
        s1 = EmbeddingSpaceSpec(2, COSINE)
        s2 = EmbeddingSpaceSpec(2, EUCLIDEAN)
        entries = [("a", "x", EmbeddingVector(s1, np.array([1.0, 0]))),
                   ("b", "y", EmbeddingVector(s2, np.array([0.0, 1])))]
        with pytest.raises(DataError, match="space"):
            build_index(entries)

    def test_self_retrieval_comes_first(self):
        index, matrix = make_index(n=50, dim=6, seed=3)
        for i in (0, 17, 49):
            res = query(index, EmbeddingVector(index.space, matrix[i]), 3)
            assert res.hits[0][0] == index.ids[i]
            assert res.hits[0][1] == pytest.approx(0.0, abs=1e-12)


class TestQuery:
    def test_k_at_least_size_returns_everything_sorted(self):
        index, _ = make_index(n=7)
        res = query(index, EmbeddingVector(index.space,
                                           np.array([1.0, 0, 0, 0])), 100)
        assert len(res.hits) == 7
        dists = [d for _, d in res.hits]
        assert dists == sorted(dists)

    def test_va_space_hand_distances(self):
        space = EmbeddingSpaceSpec(2, EUCLIDEAN)
        index = build_index(
            ids=["near", "far"], tags=["a", "b"],
            matrix=np.array([[0.0, 0.1], [0.3, 0.4]]), space=space)
        res = query(index, EmbeddingVector(space, np.array([0.0, 0.0])), 2)
        assert res.hits[0] == ("near", pytest.approx(0.1))
        assert res.hits[1] == ("far", pytest.approx(0.5))

    def test_matches_brute_force_oracle(self):
        index, matrix = make_index(n=200, dim=8, seed=9)
        rng = np.random.default_rng(10)
        for _ in range(10):
            q = rng.standard_normal(8)
            q /= np.linalg.norm(q)
            res = query(index, EmbeddingVector(index.space, q), 5)
            brute = sorted(
                ((1.0 - float(np.dot(row, q)
                              / (np.linalg.norm(row) * np.linalg.norm(q))),
                  rid) for rid, row in zip(index.ids, matrix)),
            )[:5]
            assert [rid for _, rid in brute] == [rid for rid, _ in res.hits]

    def test_prefix_property(self):
        index, _ = make_index(n=40, dim=5, seed=4)
        q = EmbeddingVector(index.space, unit_rows(np.random.default_rng(5), 1, 5)[0])
        small = query(index, q, 3)
        big = query(index, q, 11)
        assert big.hits[:3] == small.hits

    def test_cosine_and_euclidean_agree_on_unit_vectors(self):
        rng = np.random.default_rng(6)
        matrix = unit_rows(rng, 30, 6)
        ids = [f"m{i}" for i in range(30)]
        tags = ["t"] * 30
        cos_index = build_index(ids=ids, tags=tags, matrix=matrix,
                                space=EmbeddingSpaceSpec(6, COSINE))
        euc_index = build_index(ids=ids, tags=tags, matrix=matrix,
                                space=EmbeddingSpaceSpec(6, EUCLIDEAN))
        for _ in range(8):
            q = unit_rows(rng, 1, 6)[0]
            a = query(cos_index, EmbeddingVector(cos_index.space, q), 30)
            b = query(euc_index, EmbeddingVector(euc_index.space, q), 30)
            assert [rid for rid, _ in a.hits] == [rid for rid, _ in b.hits]

    def test_ties_break_by_ascending_id(self):
        space = EmbeddingSpaceSpec(2, EUCLIDEAN)
        index = build_index(
            ids=["zebra", "apple", "mango"], tags=["t"] * 3,
            matrix=np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]), space=space)
        res = query(index, EmbeddingVector(space, np.array([0.0, 0.0])), 3)
        assert [rid for rid, _ in res.hits] == ["apple", "mango", "zebra"]

    def test_space_mismatch_rejected(self):
        index, _ = make_index(dim=4)
        wrong = EmbeddingVector(EmbeddingSpaceSpec(4, EUCLIDEAN), np.ones(4))
        with pytest.raises(DataError, match="space"):
            query(index, wrong, 3)

    def test_k_below_one_rejected(self):
        index, matrix = make_index()
        with pytest.raises(DataError):
            query(index, EmbeddingVector(index.space, matrix[0]), 0)
