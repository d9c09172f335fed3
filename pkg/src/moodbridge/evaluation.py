"""Ranked-retrieval evaluation and diagnostics.

Macro P@5 and macro MRR with taxonomy-mapped relevance: metrics are
computed per text emotion class and then averaged unweighted, so majority
classes cannot mask failures on rare ones. Also: confusion matrices for
the classifier strategies and a fit-one-modality PCA projection export
for inspecting cross-modal alignment in 2-D.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, NumericError, UnsupportedOperation
from .features import TEXT
from .models import (
    CLASSIFIER_KINDS,
    EmbeddingVector,
    embed_many,
    rank_by_classification,
)
from .retrieval import build_index, query
from .taxonomy import lookup_candidates, relevant_set


def precision_at_k(hit_tags, relevant, k=5):
    """Fraction of the top k that is relevant; short rankings pad as misses."""
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    hits = list(hit_tags)[:k]
    return sum(1 for t in hits if t in relevant) / k


def reciprocal_rank(hit_tags, relevant):
    """1/rank of the first relevant hit, 0 when nothing relevant appears."""
    for rank, tag in enumerate(hit_tags, start=1):
        if tag in relevant:
            return 1.0 / rank
    return 0.0


@dataclass
class EvalReport:
    scheme: str
    kind: str
    seed: int
    config_digest: str
    per_class: dict          # text tag -> {"p_at_5", "mrr", "queries"}
    macro_p5: float
    macro_mrr: float
    empty_classes: list = field(default_factory=list)

    def to_json(self):
        doc = {
            "scheme": self.scheme,
            "kind": self.kind,
            "seed": self.seed,
            "config_digest": self.config_digest,
            "macro_p5": self.macro_p5,
            "macro_mrr": self.macro_mrr,
            "per_class": self.per_class,
            "empty_classes": self.empty_classes,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(
            scheme=doc["scheme"], kind=doc["kind"], seed=doc["seed"],
            config_digest=doc["config_digest"], per_class=doc["per_class"],
            macro_p5=doc["macro_p5"], macro_mrr=doc["macro_mrr"],
            empty_classes=doc.get("empty_classes", []),
        )


def _canonical_class(tag, tax_map):
    for cand in lookup_candidates(tag):
        if cand in tax_map.map:
            return cand
    raise DataError(f"text tag {tag!r} not covered by the {tax_map.scheme} map")


def music_index(params, config, music_table):
    ids, tags, matrix, space = embed_many(params, config, music_table)
    return build_index(ids=ids, tags=tags, matrix=matrix, space=space)


def evaluate(params, config, text_table, music_table, tax_map, k=5,
             seed=0, config_digest=""):
    """Macro P@5 / macro MRR of one trained strategy on the given splits."""
    if len(text_table) == 0 or len(music_table) == 0:
        raise DataError("evaluation needs non-empty text and music splits")
    music_tag_by_id = {r.id: r.tag for r in music_table}
    classifier = config.kind in CLASSIFIER_KINDS

    rankings = {}
    if classifier:
        for rec in text_table:
            ranked = rank_by_classification(params, config, rec, music_table)
            rankings[rec.id] = [music_tag_by_id[i] for i in ranked]
    else:
        index = music_index(params, config, music_table)
        ids, _, matrix, space = embed_many(params, config, text_table)
        for rec_id, row in zip(ids, matrix):
            res = query(index, EmbeddingVector(space, row), len(index), rec_id)
            rankings[rec_id] = [music_tag_by_id[i] for i in res.hit_ids()]

    per_class = {}
    for rec in text_table:
        cls = _canonical_class(rec.tag, tax_map)
        relevant = relevant_set(tax_map, rec.tag)
        stats = per_class.setdefault(cls, {"p": [], "rr": []})
        stats["p"].append(precision_at_k(rankings[rec.id], relevant, k))
        stats["rr"].append(reciprocal_rank(rankings[rec.id], relevant))

    report_classes = {}
    for cls in sorted(per_class):
        p = per_class[cls]["p"]
        rr = per_class[cls]["rr"]
        report_classes[cls] = {
            "p_at_5": float(np.mean(p)),
            "mrr": float(np.mean(rr)),
            "queries": len(p),
        }
    empty = sorted(set(tax_map.map) - set(report_classes))
    if not report_classes:
        raise DataError("no evaluable classes: every class had zero queries")
    macro_p5 = float(np.mean([c["p_at_5"] for c in report_classes.values()]))
    macro_mrr = float(np.mean([c["mrr"] for c in report_classes.values()]))
    return EvalReport(
        scheme=tax_map.scheme, kind=config.kind, seed=seed,
        config_digest=config_digest, per_class=report_classes,
        macro_p5=macro_p5, macro_mrr=macro_mrr, empty_classes=empty,
    )


def confusion_matrix(params, config, table):
    """Counts of (true class, predicted class) for one modality's tower."""
    from .models import _tower_logits

    if config.kind not in CLASSIFIER_KINDS:
        raise UnsupportedOperation(f"{config.kind} has no classification heads")
    vocab = params.text_vocab if table.modality == TEXT else params.music_vocab
    n = len(vocab)
    counts = np.zeros((n, n), dtype=np.int64)
    if len(table) == 0:
        return counts, vocab
    logits = _tower_logits(params, table.matrix(), table.modality)
    predicted = np.argmax(logits, axis=1)
    for rec, pred in zip(table, predicted):
        counts[vocab.index(rec.tag), int(pred)] += 1
    return counts, vocab


# ----------------------------------------------------------------------
# 2-D projection: fit on one modality, push everything else through

@dataclass
class ProjectionExport:
    fitted: str
    rows: list               # (id or tag, kind, x, y)

    def to_csv(self):
        lines = ["id,kind,x,y"]
        for rid, kind, x, y in self.rows:
            lines.append(f"{rid},{kind},{x!r},{y!r}")
        return "\n".join(lines) + "\n"


def _power_iteration(A, rng, max_iter=200_000, tol=1e-14):
    v = rng.standard_normal(A.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = A @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            raise NumericError("power iteration hit the null space")
        w /= nw
        if min(np.linalg.norm(w - v), np.linalg.norm(w + v)) < tol:
            v = w
            break
        v = w
    return float(v @ A @ v), v


def pca_fit(X):
    """Mean and top-2 principal directions of the rows of X.

    Power iteration with deflation; raises when the covariance has rank
    below 2 (no meaningful plane to project onto).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 3:
        raise DataError("PCA fit needs at least 3 points")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = (Xc.T @ Xc) / (X.shape[0] - 1)
    rng = np.random.default_rng(0)
    lam1, v1 = _power_iteration(cov, rng)
    if lam1 <= 0.0:
        raise NumericError("covariance rank < 2: no variance to project")
    deflated = cov - lam1 * np.outer(v1, v1)
    lam2, v2 = _power_iteration(deflated, rng)
    if lam2 <= lam1 * 1e-12:
        raise NumericError("covariance rank < 2: second component is degenerate")
    # re-orthogonalize against v1 to stop deflation round-off from leaking in
    v2 = v2 - (v2 @ v1) * v1
    v2 /= np.linalg.norm(v2)
    return mean, np.stack([v1, v2]), np.array([lam1, lam2])


def pca_project(fit, others=(), fit_kind="fit"):
    """Project the fit rows and any labeled extra rows onto the fit plane.

    fit: list of (id, vector); others: list of (id, kind, vector).
    The fitted rows come out zero-mean by construction.
    """
    fit = list(fit)
    mean, components, _ = pca_fit(np.stack([np.asarray(v) for _, v in fit]))
    rows = []
    for rid, vec in fit:
        x, y = components @ (np.asarray(vec, dtype=np.float64) - mean)
        rows.append((rid, fit_kind, float(x), float(y)))
    for rid, kind, vec in others:
        v = np.asarray(vec, dtype=np.float64)
        if v.shape != mean.shape:
            raise DataError(f"row {rid!r} has dim {v.shape[0]}, fit is {mean.shape[0]}")
        x, y = components @ (v - mean)
        rows.append((rid, kind, float(x), float(y)))
    return ProjectionExport(fit_kind, rows)
