"""Triplet construction for the metric-learning strategies.

Cross-modal triplets pair a text anchor with music whose tag is
map-relevant (positive) and music whose tag is not (negative). The
three-branch model adds within-modality streams anchored on tag
embeddings. Negatives are drawn with distance-weighted sampling: pick
candidates with probability proportional to min(clamp, 1/q(d)), where
q(d) ~ d^(n-2) (1 - d^2/4)^((n-3)/2) is the density of pairwise distances
between unit vectors in n dimensions. Everything runs in the log domain;
d is clamped away from 0 and 2 where 1/q blows up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .features import MUSIC, TEXT
from .models import METRIC_3BRANCH, embed_many, embed_tag
from .taxonomy import relevant_set

CROSS = "CROSS"
TAG_TEXT = "TAG_TEXT"
TAG_MUSIC = "TAG_MUSIC"
TRIPLET_KINDS = (CROSS, TAG_TEXT, TAG_MUSIC)


@dataclass
class TripletBatch:
    """(anchor, positive, negative) references.

    For CROSS the anchor is a text record id; for TAG_* it is a tag name
    whose embedding comes from the tag branch. Positives and negatives are
    record ids of the batch's target modality.
    """

    kind: str
    triplets: list

    def __post_init__(self):
        if self.kind not in TRIPLET_KINDS:
            raise DataError(f"unknown triplet batch kind {self.kind!r}")

    def __len__(self):
        return len(self.triplets)

    def slice(self, start, stop):
        return TripletBatch(self.kind, self.triplets[start:stop])


@dataclass
class MinerConfig:
    dim: int
    weight_clamp: float = 10.0
    distance_floor: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.dim <= 0:
            raise DataError(f"miner dim must be positive, got {self.dim}")
        if self.weight_clamp <= 0:
            raise DataError(f"weight clamp must be > 0, got {self.weight_clamp}")
        if not 0.0 < self.distance_floor < 1.0:
            raise DataError(
                f"distance floor must be in (0, 1), got {self.distance_floor}")


def positive_pool(text_tag, tax_map, music_table):
    """Ids of music records whose tag is map-relevant for text_tag."""
    relevant = relevant_set(tax_map, text_tag)
    ids = [r.id for r in music_table if r.tag in relevant]
    if not ids:
        raise DataError(f"no positive music items for text tag {text_tag!r}")
    return ids


def log_sphere_density(d, dim):
    """log q(d) for distances between uniform unit vectors in `dim` dims."""
    d = np.asarray(d, dtype=np.float64)
    return (dim - 2) * np.log(d) + 0.5 * (dim - 3) * np.log1p(-0.25 * d * d)


def _negative_probs(distances, cfg):
    d = np.clip(distances, cfg.distance_floor, 2.0 - cfg.distance_floor)
    log_w = np.minimum(np.log(cfg.weight_clamp), -log_sphere_density(d, cfg.dim))
    if not np.all(np.isfinite(log_w)):
        return np.full(d.shape[0], 1.0 / d.shape[0])
    w = np.exp(log_w - np.max(log_w))
    total = w.sum()
    if not np.isfinite(total) or total <= 0.0:
        return np.full(d.shape[0], 1.0 / d.shape[0])
    return w / total


def _sample_negative(anchor_emb, ids, emb_matrix, cfg, rng):
    distances = np.linalg.norm(emb_matrix - anchor_emb, axis=1)
    probs = _negative_probs(distances, cfg)
    return ids[int(rng.choice(len(ids), p=probs))]


def distance_weighted_negative(anchor_emb, candidates, cfg, rng):
    """Draw one candidate id, far-biased-corrected as described above.

    candidates is a non-empty list of (id, unit embedding) pairs.
    """
    if not candidates:
        raise DataError("no negative candidates to sample from")
    ids = [c[0] for c in candidates]
    matrix = np.stack([np.asarray(c[1], dtype=np.float64) for c in candidates])
    return _sample_negative(np.asarray(anchor_emb, dtype=np.float64), ids,
                            matrix, cfg, rng)


def build_epoch_triplets(text_table, music_table, tax_map, params, config,
                         miner_cfg, rng, embeddings=None):
    """One epoch of triplet streams, mined against current embeddings.

    Every text record anchors one CROSS triplet; for three-branch models
    every record additionally serves once as the positive of a TAG_* triplet
    anchored on its own tag (word embeddings required for those anchors).
    Embeddings are refreshed here, once per epoch.
    """
    text_ids, text_tags, text_emb, _ = embed_many(params, config, text_table)
    music_ids, music_tags, music_emb, _ = embed_many(params, config, music_table)
    music_tags = np.array(music_tags)
    text_tags_arr = np.array(text_tags)

    # per-text-tag positive/negative pools over the music table
    pools = {}
    for tag in dict.fromkeys(text_tags):
        relevant = relevant_set(tax_map, tag)
        pos_mask = np.isin(music_tags, sorted(relevant))
        pos = [music_ids[i] for i in np.flatnonzero(pos_mask)]
        if not pos:
            raise DataError(f"no positive music items for text tag {tag!r}")
        neg_idx = np.flatnonzero(~pos_mask)
        pools[tag] = (pos, [music_ids[i] for i in neg_idx], music_emb[neg_idx])

    cross = []
    for i, rec in enumerate(text_table):
        pos, neg_ids, neg_emb = pools[rec.tag]
        if not neg_ids:
            continue
        positive = pos[int(rng.integers(len(pos)))]
        negative = _sample_negative(text_emb[i], neg_ids, neg_emb, miner_cfg, rng)
        cross.append((rec.id, positive, negative))
    batches = [TripletBatch(CROSS, cross)]

    if config.kind != METRIC_3BRANCH:
        return batches
    if embeddings is None:
        raise DataError("three-branch triplets need a word-embedding table")

    for kind, table, ids, tags_arr, emb in (
        (TAG_TEXT, text_table, text_ids, text_tags_arr, text_emb),
        (TAG_MUSIC, music_table, music_ids, music_tags, music_emb),
    ):
        tag_emb = {}
        neg_pools = {}
        for tag in dict.fromkeys(tags_arr.tolist()):
            tag_emb[tag] = embed_tag(params, config, tag, embeddings).values
            neg_idx = np.flatnonzero(tags_arr != tag)
            neg_pools[tag] = ([ids[i] for i in neg_idx], emb[neg_idx])
        triplets = []
        for rec in table:
            neg_ids, neg_emb = neg_pools[rec.tag]
            if not neg_ids:
                continue
            negative = _sample_negative(tag_emb[rec.tag], neg_ids, neg_emb,
                                        miner_cfg, rng)
            triplets.append((rec.tag, rec.id, negative))
        batches.append(TripletBatch(kind, triplets))
    return batches
