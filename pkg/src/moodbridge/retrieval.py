"""Exact nearest-neighbor retrieval over music embeddings.

Brute force on purpose: corpora here are small enough that exactness is
cheaper than the noise an approximate index would add to evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError
from .models import COSINE, EmbeddingSpaceSpec


@dataclass
class EmbeddingIndex:
    space: EmbeddingSpaceSpec
    ids: list
    tags: list
    matrix: np.ndarray

    def __len__(self):
        return len(self.ids)

    def tag_of(self, rec_id):
        return self.tags[self.ids.index(rec_id)]


@dataclass
class RankedResult:
    query_id: str
    hits: list      # (music id, distance), distances non-decreasing

    def hit_ids(self):
        return [h[0] for h in self.hits]


def build_index(entries=None, *, ids=None, tags=None, matrix=None, space=None):
    """Index over (id, tag, EmbeddingVector) entries, or prebuilt arrays."""
    if entries is not None:
        ids, tags, vecs, space = [], [], [], None
        for rec_id, tag, emb in entries:
            if space is None:
                space = emb.space
            elif emb.space != space:
                raise DataError(
                    f"entry {rec_id!r} is in space {emb.space}, index is {space}")
            ids.append(rec_id)
            tags.append(tag)
            vecs.append(emb.values)
        matrix = np.stack(vecs) if vecs else np.zeros((0, space.dim if space else 1))
        if space is None:
            space = EmbeddingSpaceSpec(matrix.shape[1] if matrix.size else 1, COSINE)
    else:
        if space is None or ids is None or tags is None or matrix is None:
            raise DataError("need either entries or all of ids/tags/matrix/space")
        ids, tags = list(ids), list(tags)
        matrix = np.asarray(matrix, dtype=np.float64)
    if len(set(ids)) != len(ids):
        seen, dupes = set(), set()
        for i in ids:
            (dupes if i in seen else seen).add(i)
        raise DataError(f"duplicate ids in index: {', '.join(sorted(dupes))}")
    if matrix.shape[0] != len(ids) or (len(ids) and matrix.shape[1] != space.dim):
        raise DataError("index matrix shape does not match entries/space")
    return EmbeddingIndex(space, ids, tags, matrix)


def _distances(index, q):
    if index.space.metric == COSINE:
        norms = np.linalg.norm(index.matrix, axis=1)
        qn = np.linalg.norm(q)
        if qn == 0.0 or np.any(norms == 0.0):
            raise NumericError("cosine retrieval with a zero-norm embedding")
        return 1.0 - (index.matrix @ q) / (norms * qn)
    return np.linalg.norm(index.matrix - q, axis=1)


def query(index, query_emb, k, query_id=""):
    """Top-k entries by the index's metric; ties broken by ascending id."""
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if query_emb.space != index.space:
        raise DataError(
            f"query space {query_emb.space} does not match index {index.space}")
    if len(index) == 0:
        return RankedResult(query_id, [])
    dist = _distances(index, query_emb.values)
    order = sorted(range(len(index)), key=lambda i: (dist[i], index.ids[i]))
    hits = [(index.ids[i], float(dist[i])) for i in order[:k]]
    return RankedResult(query_id, hits)
