"""The six bridging strategies.

Every strategy owns per-branch MLPs that map precomputed features into a
target space: class logits (classifier, multi-head), valence/arousal
coordinates or a word-embedding vector (regressions), or a learned shared
space trained with triplet losses (two- and three-branch metric learning).

Loss functions return analytic gradients alongside values; the trainer
never differentiates anything numerically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, NumericError, ShapeError, UnsupportedOperation
from .features import MUSIC, TEXT, Vocabulary
from .numcore import (
    MLPGrads,
    MLPParams,
    as_vector,
    init_mlp,
    mlp_backward_batch,
    mlp_forward,
    mlp_forward_batch,
)
from .taxonomy import VA, W2V, resolve_embedding, resolve_va

CLASSIFIER = "classifier"
MULTI_HEAD = "multi_head"
VA_REGRESSION = "va_regression"
W2V_REGRESSION = "w2v_regression"
METRIC_2BRANCH = "metric_2branch"
METRIC_3BRANCH = "metric_3branch"

ALL_KINDS = (CLASSIFIER, MULTI_HEAD, VA_REGRESSION, W2V_REGRESSION,
             METRIC_2BRANCH, METRIC_3BRANCH)
CLASSIFIER_KINDS = (CLASSIFIER, MULTI_HEAD)
REGRESSION_KINDS = (VA_REGRESSION, W2V_REGRESSION)
METRIC_KINDS = (METRIC_2BRANCH, METRIC_3BRANCH)

EUCLIDEAN = "euclidean"
COSINE = "cosine"


@dataclass(frozen=True)
class EmbeddingSpaceSpec:
    """Target space: dimensionality plus the distance used inside it."""

    dim: int
    metric: str

    def __post_init__(self):
        if self.metric not in (EUCLIDEAN, COSINE):
            raise DataError(f"unknown metric {self.metric!r}")
        if self.dim <= 0:
            raise DataError(f"space dim must be positive, got {self.dim}")


@dataclass
class EmbeddingVector:
    space: EmbeddingSpaceSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = as_vector(self.values, "embedding")
        if self.values.shape[0] != self.space.dim:
            raise ShapeError(
                f"embedding length {self.values.shape[0]} != space dim {self.space.dim}"
            )


@dataclass
class StrategyConfig:
    kind: str
    embedding_dim: int = 64
    margin: float = 0.2
    hidden: tuple = (256, 256)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise DataError(f"unknown strategy kind {self.kind!r}")
        self.hidden = tuple(int(h) for h in self.hidden)
        if not self.hidden or any(h <= 0 for h in self.hidden):
            raise DataError(f"hidden widths must be positive, got {self.hidden}")
        if self.kind in METRIC_KINDS and self.margin <= 0:
            raise DataError(f"margin must be > 0 for {self.kind}, got {self.margin}")
        if self.kind == VA_REGRESSION:
            self.embedding_dim = 2
        if self.embedding_dim <= 0:
            raise DataError(f"embedding_dim must be positive, got {self.embedding_dim}")

    def to_dict(self):
        return {
            "kind": self.kind,
            "embedding_dim": self.embedding_dim,
            "margin": self.margin,
            "hidden": list(self.hidden),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(kind=d["kind"], embedding_dim=d["embedding_dim"],
                   margin=d["margin"], hidden=tuple(d["hidden"]), seed=d["seed"])


@dataclass
class ModelParams:
    """All trainable tensors of one strategy, grouped in named branches."""

    kind: str
    text_vocab: Vocabulary
    music_vocab: Vocabulary
    branches: dict = field(default_factory=dict)   # name -> MLPParams

    def branch(self, name):
        if name not in self.branches:
            raise ShapeError(f"strategy {self.kind} has no branch {name!r}")
        return self.branches[name]

    @property
    def text_trunk(self):
        return self.branch("text_trunk")

    @property
    def music_trunk(self):
        return self.branch("music_trunk")

    def copy(self):
        return ModelParams(self.kind, self.text_vocab, self.music_vocab,
                           {n: p.copy() for n, p in self.branches.items()})


def _branch_layout(config, text_dim, music_dim, word_dim):
    """Layer sizes for every branch a strategy needs."""
    h = config.hidden
    k = config.kind
    layout = {}
    if k == CLASSIFIER:
        layout["text_trunk"] = (text_dim,) + h + (h[-1],)
        layout["music_trunk"] = (music_dim,) + h + (h[-1],)
        layout["text_head"] = None   # filled in init_model (needs vocab sizes)
        layout["music_head"] = None
    elif k == MULTI_HEAD:
        # thin per-modality adapters into one shared 3-layer trunk
        layout["text_trunk"] = (text_dim, h[0])
        layout["music_trunk"] = (music_dim, h[0])
        layout["shared_trunk"] = (h[0],) + h + (h[-1],)
        layout["text_head"] = None
        layout["music_head"] = None
    elif k in (VA_REGRESSION, W2V_REGRESSION, METRIC_2BRANCH, METRIC_3BRANCH):
        out = config.embedding_dim
        if k == W2V_REGRESSION:
            if word_dim is None:
                raise DataError("w2v regression needs a word-embedding table")
            out = word_dim
        layout["text_trunk"] = (text_dim,) + h + (out,)
        layout["music_trunk"] = (music_dim,) + h + (out,)
        if k == METRIC_3BRANCH:
            if word_dim is None:
                raise DataError("three-branch metric learning needs word embeddings")
            layout["tag_branch"] = (word_dim, out)
    return layout


BRANCH_ORDER = ("text_trunk", "music_trunk", "shared_trunk", "tag_branch",
                "text_head", "music_head")


def init_model(config, text_dim, music_dim, text_vocab, music_vocab, word_dim=None):
    """Seeded initialization of every branch a strategy kind requires."""
    rng = np.random.default_rng(config.seed)
    layout = _branch_layout(config, text_dim, music_dim, word_dim)
    if "text_head" in layout:
        rep = config.hidden[-1]
        layout["text_head"] = (rep, len(text_vocab))
        layout["music_head"] = (rep, len(music_vocab))
    branches = {}
    for name in BRANCH_ORDER:
        if name in layout:
            branches[name] = init_mlp(layout[name], rng)
    if config.kind == W2V_REGRESSION:
        config.embedding_dim = word_dim
    return ModelParams(config.kind, text_vocab, music_vocab, branches)


def zero_grads(params):
    return {name: MLPGrads.zeros_like(p) for name, p in params.branches.items()}


def embedding_space(config):
    """The retrieval space a strategy embeds into."""
    k = config.kind
    if k == CLASSIFIER:
        raise UnsupportedOperation("classification produces rankings, not embeddings")
    if k == VA_REGRESSION:
        return EmbeddingSpaceSpec(2, EUCLIDEAN)
    if k == MULTI_HEAD:
        return EmbeddingSpaceSpec(config.hidden[-1], COSINE)
    return EmbeddingSpaceSpec(config.embedding_dim, COSINE)


def _trunk_output_batch(params, X, modality):
    """Raw (pre-normalization) trunk outputs for one modality, plus caches."""
    caches = []
    if params.kind == MULTI_HEAD:
        adapter = params.branch("text_trunk" if modality == TEXT else "music_trunk")
        A, c1 = mlp_forward_batch(adapter, X)
        Y, c2 = mlp_forward_batch(params.branch("shared_trunk"), A)
        caches = [(adapter, c1), (params.branch("shared_trunk"), c2)]
    else:
        trunk = params.branch("text_trunk" if modality == TEXT else "music_trunk")
        Y, c = mlp_forward_batch(trunk, X)
        caches = [(trunk, c)]
    return Y, caches


def _normalize_rows(Y, context):
    norms = np.linalg.norm(Y, axis=1)
    if np.any(norms == 0.0):
        raise NumericError(f"{context}: zero-norm embedding cannot be normalized")
    return Y / norms[:, None], norms


def _normalize_backward(G, E, norms):
    # Jacobian of y -> y/|y|: (I - e e^T)/|y| applied row-wise
    return (G - np.sum(G * E, axis=1, keepdims=True) * E) / norms[:, None]


def embed(params, config, record):
    """Map one record into the strategy's target space (Eq.-style M(P(x)))."""
    space = embedding_space(config)
    Y, _ = _trunk_output_batch(params, record.features[None, :], record.modality)
    y = Y[0]
    if space.metric == COSINE:
        n = np.linalg.norm(y)
        if n == 0.0:
            raise NumericError(f"record {record.id!r}: zero-norm embedding")
        y = y / n
    return EmbeddingVector(space, y)


def embed_many(params, config, table):
    """Vectorized embed over a whole table. Returns (ids, tags, matrix, space)."""
    space = embedding_space(config)
    if len(table) == 0:
        return [], [], np.zeros((0, space.dim)), space
    Y, _ = _trunk_output_batch(params, table.matrix(), table.modality)
    if space.metric == COSINE:
        Y, _ = _normalize_rows(Y, f"{table.modality} embeddings")
    return table.ids(), table.tags(), Y, space


def embed_tag(params, config, tag, embeddings):
    """Tag-branch embedding of a tag's word vector (three-branch models)."""
    if config.kind != METRIC_3BRANCH:
        raise UnsupportedOperation(f"{config.kind} has no tag branch")
    vec = resolve_embedding(tag, embeddings)
    if vec is None:
        raise DataError(f"tag {tag!r} not in embedding table")
    y, _ = mlp_forward(params.branch("tag_branch"), vec)
    n = np.linalg.norm(y)
    if n == 0.0:
        raise NumericError(f"tag {tag!r}: zero-norm embedding")
    return EmbeddingVector(embedding_space(config), y / n)


# ----------------------------------------------------------------------
# losses

def cross_entropy_loss(logits, class_index):
    """Softmax cross-entropy of one logit vector. Returns (loss, dloss/dlogits)."""
    z = as_vector(logits, "logits")
    if not 0 <= class_index < z.shape[0]:
        raise DataError(f"class index {class_index} out of range for {z.shape[0]} classes")
    zmax = np.max(z)
    exp = np.exp(z - zmax)
    total = np.sum(exp)
    loss = float(np.log(total) - (z[class_index] - zmax))
    grad = exp / total
    grad[class_index] -= 1.0
    return loss, grad


def mse_loss(pred, target):
    """Mean squared error over components. Returns (loss, dloss/dpred)."""
    p = as_vector(pred, "pred")
    t = as_vector(target, "target")
    if p.shape != t.shape:
        raise ShapeError(f"length mismatch: {p.shape[0]} vs {t.shape[0]}")
    diff = p - t
    return float(np.mean(diff * diff)), 2.0 * diff / p.shape[0]


def regression_target(tag, scheme, lexicon=None, embeddings=None):
    """Where a tag should land: (v, a) for VA, a unit word vector for W2V."""
    if scheme == VA:
        if lexicon is None:
            raise DataError("VA targets need a lexicon")
        coords = resolve_va(tag, lexicon)
        if coords is None:
            raise DataError(f"tag {tag!r} not in VA lexicon")
        return coords
    if scheme == W2V:
        if embeddings is None:
            raise DataError("W2V targets need an embedding table")
        vec = resolve_embedding(tag, embeddings)
        if vec is None:
            raise DataError(f"tag {tag!r} not in embedding table")
        return vec / np.linalg.norm(vec)
    raise DataError(f"no regression targets for scheme {scheme!r}")


def _cosine_parts(u, v):
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise NumericError("triplet_loss: zero-norm embedding")
    s = float(np.dot(u, v)) / (nu * nv)
    # d/du of cosine similarity
    du = v / (nu * nv) - s * u / (nu * nu)
    dv = u / (nu * nv) - s * v / (nv * nv)
    return 1.0 - s, -du, -dv


def _euclidean_parts(u, v):
    diff = u - v
    d = float(np.linalg.norm(diff))
    if d < 1e-12:
        return d, np.zeros_like(u), np.zeros_like(v)
    return d, diff / d, -diff / d


def triplet_loss(e_a, e_p, e_n, margin, metric=COSINE):
    """Hinge on D(a,p) - D(a,n) + margin; gradients for all three embeddings.

    Inactive (satisfied) triplets return zero loss and zero gradients.
    """
    a = as_vector(e_a, "anchor")
    p = as_vector(e_p, "positive")
    n = as_vector(e_n, "negative")
    if not (a.shape == p.shape == n.shape):
        raise ShapeError("triplet embeddings must share one space")
    if margin <= 0:
        raise DataError(f"margin must be > 0, got {margin}")
    parts = _cosine_parts if metric == COSINE else _euclidean_parts
    d_ap, da_p, dp = parts(a, p)
    d_an, da_n, dn = parts(a, n)
    h = d_ap - d_an + margin
    if h <= 0.0:
        z = np.zeros_like(a)
        return 0.0, (z, z.copy(), z.copy())
    return float(h), (da_p - da_n, dp, -dn)


# ----------------------------------------------------------------------
# full-strategy losses over batches

@dataclass
class LabeledBatch:
    """Records with their own tags as supervision (classifier/regression)."""

    records: list


@dataclass
class TrainingData:
    """Everything a loss needs besides the batch: tables and tag resources."""

    text: object
    music: object
    lexicon: object = None
    embeddings: object = None

    def record(self, modality, rec_id):
        return (self.text if modality == TEXT else self.music)[rec_id]


def _branch_name(params, branch):
    for name, p in params.branches.items():
        if p is branch:
            return name
    raise ShapeError("branch object not registered in params")


def _classifier_loss(params, config, batch, data):
    accum = zero_grads(params)
    total = 0.0
    count = 0
    for modality in (TEXT, MUSIC):
        recs = [r for r in batch.records if r.modality == modality]
        if not recs:
            continue
        vocab = params.text_vocab if modality == TEXT else params.music_vocab
        head_name = "text_head" if modality == TEXT else "music_head"
        X = np.stack([r.features for r in recs])
        H, trunk_caches = _trunk_output_batch(params, X, modality)
        head = params.branch(head_name)
        logits, head_cache = mlp_forward_batch(head, H)
        G = np.zeros_like(logits)
        for i, rec in enumerate(recs):
            loss, g = cross_entropy_loss(logits[i], vocab.index(rec.tag))
            total += loss
            G[i] = g
            count += 1
        head_grads, G_cur = mlp_backward_batch(head, head_cache, G)
        accum[head_name].add_(head_grads)
        for branch, cache in reversed(trunk_caches):
            g, G_cur = mlp_backward_batch(branch, cache, G_cur)
            accum[_branch_name(params, branch)].add_(g)
    if count == 0:
        raise DataError("empty labeled batch")
    for g in accum.values():
        g.scale_(1.0 / count)
    return total / count, accum


def _regression_loss(params, config, batch, data):
    scheme = VA if config.kind == VA_REGRESSION else W2V
    accum = zero_grads(params)
    targets = {}
    for rec in batch.records:
        if rec.tag not in targets:
            targets[rec.tag] = regression_target(
                rec.tag, scheme, lexicon=data.lexicon, embeddings=data.embeddings)
    total = 0.0
    count = 0
    for modality in (TEXT, MUSIC):
        recs = [r for r in batch.records if r.modality == modality]
        if not recs:
            continue
        trunk_name = "text_trunk" if modality == TEXT else "music_trunk"
        trunk = params.branch(trunk_name)
        X = np.stack([r.features for r in recs])
        Y, cache = mlp_forward_batch(trunk, X)
        if scheme == W2V:
            E, norms = _normalize_rows(Y, f"{modality} regression output")
        else:
            E = Y
        G = np.zeros_like(E)
        for i, rec in enumerate(recs):
            loss, g = mse_loss(E[i], targets[rec.tag])
            total += loss
            G[i] = g
            count += 1
        if scheme == W2V:
            G = _normalize_backward(G, E, norms)
        accum[trunk_name].add_(mlp_backward_batch(trunk, cache, G)[0])
    if count == 0:
        raise DataError("empty labeled batch")
    for g in accum.values():
        g.scale_(1.0 / count)
    return total / count, accum


def _resolve_triplet_features(params, config, batch, data):
    """Anchor/positive/negative feature matrices plus branch roles for a batch."""
    from .sampling import CROSS, TAG_MUSIC   # batch kind names only

    kind = batch.kind
    if config.kind == METRIC_2BRANCH and kind != CROSS:
        raise DataError(f"two-branch models train on CROSS batches, got {kind}")
    if kind == CROSS:
        anchors = np.stack([data.record(TEXT, a).features for a, _, _ in batch.triplets])
        anchor_role = "text_trunk"
    else:
        if data.embeddings is None:
            raise DataError("tag batches need a word-embedding table")
        vecs = []
        for a, _, _ in batch.triplets:
            v = resolve_embedding(a, data.embeddings)
            if v is None:
                raise DataError(f"anchor tag {a!r} not in embedding table")
            vecs.append(v)
        anchors = np.stack(vecs)
        anchor_role = "tag_branch"
    side = MUSIC if kind in (CROSS, TAG_MUSIC) else TEXT
    pos = np.stack([data.record(side, p).features for _, p, _ in batch.triplets])
    neg = np.stack([data.record(side, n).features for _, _, n in batch.triplets])
    side_role = "music_trunk" if side == MUSIC else "text_trunk"
    return anchors, anchor_role, pos, neg, side_role


def _metric_loss(params, config, batches, data):
    """Sum of per-batch mean triplet losses; CROSS plus optional TAG_* streams."""
    accum = zero_grads(params)
    total = 0.0
    for batch in batches:
        if not batch.triplets:
            continue
        A, a_role, P, N, s_role = _resolve_triplet_features(params, config, batch, data)
        a_branch = params.branch(a_role)
        s_branch = params.branch(s_role)
        Ya, cache_a = mlp_forward_batch(a_branch, A)
        Yp, cache_p = mlp_forward_batch(s_branch, P)
        Yn, cache_n = mlp_forward_batch(s_branch, N)
        Ea, na = _normalize_rows(Ya, "anchor embeddings")
        Ep, np_ = _normalize_rows(Yp, "positive embeddings")
        En, nn = _normalize_rows(Yn, "negative embeddings")
        # cosine distance between unit rows is 1 - dot
        s_ap = np.sum(Ea * Ep, axis=1)
        s_an = np.sum(Ea * En, axis=1)
        h = (1.0 - s_ap) - (1.0 - s_an) + config.margin
        active = h > 0.0
        b = len(batch.triplets)
        total += float(np.sum(np.maximum(h, 0.0))) / b
        w = active.astype(np.float64)[:, None] / b
        G_Ea = (En - Ep) * w
        G_Ep = -Ea * w
        G_En = Ea * w
        G_Ya = _normalize_backward(G_Ea, Ea, na)
        G_Yp = _normalize_backward(G_Ep, Ep, np_)
        G_Yn = _normalize_backward(G_En, En, nn)
        accum[a_role].add_(mlp_backward_batch(a_branch, cache_a, G_Ya)[0])
        accum[s_role].add_(mlp_backward_batch(s_branch, cache_p, G_Yp)[0])
        accum[s_role].add_(mlp_backward_batch(s_branch, cache_n, G_Yn)[0])
    return total, accum


def strategy_loss(params, config, batch, data):
    """Loss and gradients for one step of any strategy.

    `batch` is a LabeledBatch for classifier/regression kinds, or one
    TripletBatch / sequence of TripletBatches for the metric kinds (the
    three-branch total is the unit-weight sum over the supplied streams).
    """
    if config.kind in CLASSIFIER_KINDS:
        if not isinstance(batch, LabeledBatch):
            raise DataError(f"{config.kind} expects a LabeledBatch")
        return _classifier_loss(params, config, batch, data)
    if config.kind in REGRESSION_KINDS:
        if not isinstance(batch, LabeledBatch):
            raise DataError(f"{config.kind} expects a LabeledBatch")
        return _regression_loss(params, config, batch, data)
    if isinstance(batch, LabeledBatch):
        raise DataError(f"{config.kind} expects triplet batches")
    batches = batch if isinstance(batch, (list, tuple)) else [batch]
    return _metric_loss(params, config, batches, data)


# ----------------------------------------------------------------------
# classification-based retrieval

def _tower_logits(params, X, modality, head_name=None):
    H, _ = _trunk_output_batch(params, X, modality)
    head = params.branch(head_name or
                         ("text_head" if modality == TEXT else "music_head"))
    logits, _ = mlp_forward_batch(head, H)
    return logits


def _softmax_rows(Z):
    E = np.exp(Z - Z.max(axis=1, keepdims=True))
    return E / E.sum(axis=1, keepdims=True)


def rank_by_classification(params, config, text_record, music_table,
                           mode=None, with_scores=False):
    """Rank music items by the predicted text mood's likelihood.

    Plain classification can only score moods that exist verbatim in the
    music vocabulary; when the predicted mood is missing there, the ranking
    is empty. The multi-head variant scores music through the shared trunk
    with the *text* head instead, so it always ranks.
    """
    mode = mode or config.kind
    if mode not in CLASSIFIER_KINDS:
        raise UnsupportedOperation(f"{mode} is not a classification strategy")
    text_logits = _tower_logits(params, text_record.features[None, :], TEXT,
                                "text_head")[0]
    t_hat = int(np.argmax(text_logits))
    predicted_tag = params.text_vocab.tags[t_hat]
    if len(music_table) == 0:
        return []
    if mode == CLASSIFIER:
        if predicted_tag not in params.music_vocab:
            return []
        col = params.music_vocab.index(predicted_tag)
        logits = _tower_logits(params, music_table.matrix(), MUSIC, "music_head")
    else:
        col = t_hat
        logits = _tower_logits(params, music_table.matrix(), MUSIC, "text_head")
    scores = _softmax_rows(logits)[:, col]
    order = sorted(range(len(music_table)),
                   key=lambda i: (-scores[i], music_table.records[i].id))
    ids = [music_table.records[i].id for i in order]
    if with_scores:
        return [(rec_id, float(scores[i])) for rec_id, i in zip(ids, order)]
    return ids


# ----------------------------------------------------------------------
# checkpoints

CHECKPOINT_MAGIC = b"MOODBRIDGE-CKPT v1\n"


def save_checkpoint(params, config, path, meta=None):
    """Versioned header plus raw float64 tensors; byte-stable round trip."""
    header = {
        "kind": params.kind,
        "config": config.to_dict(),
        "text_vocab": list(params.text_vocab.tags),
        "music_vocab": list(params.music_vocab.tags),
        "meta": meta or {},
        "tensors": [],
    }
    blobs = []
    for name in BRANCH_ORDER:
        if name not in params.branches:
            continue
        mlp = params.branches[name]
        for k in range(mlp.n_layers):
            for suffix, arr in (("w", mlp.weights[k]), ("b", mlp.biases[k])):
                header["tensors"].append(
                    {"name": f"{name}.{suffix}{k}", "shape": list(arr.shape)})
                blobs.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path):
    """Inverse of save_checkpoint. Returns (params, config, meta)."""
    with open(path, "rb") as fh:
        magic = fh.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise DataError("not a moodbridge checkpoint", path=path)
        header = json.loads(fh.readline().decode("utf-8"))
        config = StrategyConfig.from_dict(header["config"])
        tensors = {}
        for entry in header["tensors"]:
            shape = tuple(entry["shape"])
            n = int(np.prod(shape)) if shape else 1
            raw = fh.read(8 * n)
            if len(raw) != 8 * n:
                raise DataError(f"truncated tensor {entry['name']}", path=path)
            tensors[entry["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    branches = {}
    by_branch = {}
    for name in tensors:
        branch, tensor = name.rsplit(".", 1)
        by_branch.setdefault(branch, {})[tensor] = tensors[name]
    for branch, parts in by_branch.items():
        n_layers = sum(1 for t in parts if t.startswith("w"))
        weights = [parts[f"w{k}"] for k in range(n_layers)]
        biases = [parts[f"b{k}"] for k in range(n_layers)]
        branches[branch] = MLPParams(weights, biases)
    params = ModelParams(
        header["kind"],
        Vocabulary(TEXT, tuple(header["text_vocab"])),
        Vocabulary(MUSIC, tuple(header["music_vocab"])),
        branches,
    )
    return params, config, header.get("meta", {})
