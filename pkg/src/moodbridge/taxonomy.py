"""Bridging heterogeneous emotion vocabularies.

A TaxonomyMap sends every text tag to an ordered set of music tags. Three
schemes: nearest neighbor in valence/arousal space (VA), nearest neighbor
in a word-embedding space (W2V), or a built-in hand-curated table (MANUAL).
The map doubles as retrieval relevance ground truth and as the positive-pair
definition for triplet sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .numcore import cosine_distance, euclidean_distance

VA = "VA"
W2V = "W2V"
MANUAL = "MANUAL"
SCHEMES = (VA, W2V, MANUAL)

# Spelling adapters between dataset taxonomies and lexicon headwords.
# Used only as lookup fallbacks, never for tag identity: "anger" and "angry"
# stay distinct vocabulary entries.
ALIASES = {
    "anger": ("angry",),
    "angry": ("anger",),
    "fear": ("fearful",),
    "fearful": ("fear",),
    "sadness": ("sad",),
    "surprised": ("surprise",),
}


def lookup_candidates(tag):
    """The tag itself, then its known spelling variants."""
    return (tag,) + ALIASES.get(tag, ())


@dataclass(frozen=True)
class TaxonomyMap:
    scheme: str
    map: dict          # text tag -> tuple of music tags, ordered
    provenance: str

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DataError(f"unknown scheme {self.scheme!r}")
        for tag, targets in self.map.items():
            if not targets:
                raise DataError(f"text tag {tag!r} maps to nothing")
            if self.scheme in (VA, W2V) and len(targets) != 1:
                raise DataError(
                    f"{self.scheme} maps must be single-valued, {tag!r} -> {targets}"
                )

    def text_tags(self):
        return tuple(self.map)

    def music_tags(self):
        out = []
        for targets in self.map.values():
            out.extend(targets)
        return tuple(dict.fromkeys(out))


def relevant_set(tax_map, text_tag):
    """Music tags counted as relevant for a text tag (alias-tolerant lookup)."""
    for cand in lookup_candidates(text_tag):
        if cand in tax_map.map:
            return set(tax_map.map[cand])
    raise DataError(f"text tag {text_tag!r} not in {tax_map.scheme} map")


@dataclass(frozen=True)
class TagPoint:
    """A tag's position in the target space (2-D for VA, embedding-dim for W2V)."""

    tag: str
    coords: np.ndarray


def resolve_va(tag, lexicon):
    """(valence, arousal) for a tag, trying spelling variants in order."""
    for cand in lookup_candidates(tag):
        if cand in lexicon:
            return lexicon.va(cand)
    return None


def resolve_embedding(tag, embeddings):
    for cand in lookup_candidates(tag):
        if cand in embeddings:
            return embeddings.vector(cand)
    return None


def _nearest_map(text_points, music_points, distance):
    out = {}
    for tag, coords in text_points:
        best_tag, best_d = None, None
        for m_tag, m_coords in music_points:
            d = distance(coords, m_coords)
            if best_d is None or d < best_d:   # strict <: ties keep vocab order
                best_tag, best_d = m_tag, d
        out[tag] = (best_tag,)
    return out


def _collect_points(vocab, resolver, source_name):
    points, missing = [], []
    for tag in vocab.tags:
        coords = resolver(tag)
        if coords is None:
            missing.append(tag)
        else:
            points.append(TagPoint(tag, coords))
    if missing:
        raise DataError(
            f"tags not resolvable in {source_name}: {', '.join(missing)}"
        )
    return points


def map_va(text_vocab, music_vocab, lexicon):
    """Each text tag -> nearest music tag by euclidean distance in (v, a)."""
    text_points = _collect_points(text_vocab, lambda t: resolve_va(t, lexicon),
                                  "VA lexicon")
    music_points = _collect_points(music_vocab, lambda t: resolve_va(t, lexicon),
                                   "VA lexicon")
    mapping = _nearest_map(
        [(p.tag, p.coords) for p in text_points],
        [(p.tag, p.coords) for p in music_points],
        euclidean_distance,
    )
    return TaxonomyMap(VA, mapping, provenance="computed from VA lexicon")


def map_w2v(text_vocab, music_vocab, embeddings):
    """Each text tag -> nearest music tag by cosine distance of word vectors."""
    text_points = _collect_points(
        text_vocab, lambda t: resolve_embedding(t, embeddings), "embedding table")
    music_points = _collect_points(
        music_vocab, lambda t: resolve_embedding(t, embeddings), "embedding table")
    mapping = _nearest_map(
        [(p.tag, p.coords) for p in text_points],
        [(p.tag, p.coords) for p in music_points],
        cosine_distance,
    )
    return TaxonomyMap(W2V, mapping, provenance="computed from word embeddings")


# ----------------------------------------------------------------------
# built-in tables for the Alm and ISEAR taxonomies against the AudioSet
# mood vocabulary, as published

ALM = "ALM"
ISEAR = "ISEAR"

AUDIOSET_MOOD_TAGS = ("happy", "funny", "sad", "tender", "exciting", "angry", "scary")

MANUAL_TABLES = {
    ALM: {
        "anger": ("angry",),
        "fearful": ("scary",),
        "happy": ("exciting", "funny", "happy"),
        "sad": ("sad",),
        "surprised": ("exciting",),
    },
    ISEAR: {
        "anger": ("angry",),
        "disgust": ("angry", "scary"),
        "fear": ("scary",),
        "guilt": ("angry", "sad"),
        "joy": ("exciting", "funny", "happy"),
        "sadness": ("sad",),
        "shame": ("angry", "sad"),
    },
}

# Same datasets, computed columns as published; golden data for validating
# the computed mappers without redistributing the lexicon/embedding files.
VA_GOLDEN = {
    ALM: {
        "anger": "angry",
        "fearful": "sad",
        "happy": "happy",
        "sad": "sad",
        "surprised": "exciting",
    },
    ISEAR: {
        "anger": "angry",
        "disgust": "angry",
        "fear": "angry",
        "guilt": "sad",
        "joy": "exciting",
        "sadness": "sad",
        "shame": "angry",
    },
}

W2V_GOLDEN = {
    ALM: {
        "anger": "angry",
        "fearful": "scary",
        "happy": "happy",
        "sad": "sad",
        "surprised": "happy",
    },
    ISEAR: {
        "anger": "angry",
        "disgust": "angry",
        "fear": "angry",
        "guilt": "angry",
        "joy": "tender",
        "sadness": "tender",
        "shame": "sad",
    },
}


def manual_map(dataset):
    """The built-in hand-curated table for ALM or ISEAR, verbatim."""
    key = str(dataset).strip().upper()
    if key not in MANUAL_TABLES:
        raise DataError(f"no built-in manual table for {dataset!r}")
    return TaxonomyMap(MANUAL, {t: tuple(v) for t, v in MANUAL_TABLES[key].items()},
                       provenance=f"built-in manual table ({key})")


def w2v_golden_map(dataset):
    """Published W2V mapping as a TaxonomyMap (golden data, not computed)."""
    key = str(dataset).strip().upper()
    if key not in W2V_GOLDEN:
        raise DataError(f"no golden W2V table for {dataset!r}")
    return TaxonomyMap(W2V, {t: (v,) for t, v in W2V_GOLDEN[key].items()},
                       provenance=f"built-in golden W2V table ({key})")


def write_map_tsv(tax_map, path):
    """One `scheme<TAB>text_tag<TAB>music,tags` row per text tag."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# provenance: {tax_map.provenance}\n")
        for tag, targets in tax_map.map.items():
            fh.write(f"{tax_map.scheme}\t{tag}\t{','.join(targets)}\n")


def read_map_tsv(path):
    scheme = None
    mapping = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"expected 3 tab-separated fields, got {len(parts)}",
                                path=path, line=lineno)
            row_scheme = parts[0].strip().upper()
            if scheme is None:
                scheme = row_scheme
            elif row_scheme != scheme:
                raise DataError(f"mixed schemes {scheme} and {row_scheme}",
                                path=path, line=lineno)
            targets = tuple(t.strip() for t in parts[2].split(",") if t.strip())
            if not targets:
                raise DataError(f"tag {parts[1]!r} maps to nothing",
                                path=path, line=lineno)
            mapping[parts[1].strip().lower()] = targets
    if not mapping:
        raise DataError("empty taxonomy map", path=path)
    return TaxonomyMap(scheme, mapping, provenance=f"loaded from {path}")


def va_diff_report(lexicon, dataset=None):
    """Compare a computed VA map against the golden VA column.

    Returns a list of diff lines; empty means full agreement. Lexicon
    versions differ in the wild, so callers report rather than assert.
    """
    from .features import Vocabulary, MUSIC, TEXT

    datasets = [dataset.upper()] if dataset else [ALM, ISEAR]
    music_vocab = Vocabulary(MUSIC, AUDIOSET_MOOD_TAGS)
    diffs = []
    for ds in datasets:
        golden = VA_GOLDEN[ds]
        text_vocab = Vocabulary(TEXT, tuple(golden))
        try:
            computed = map_va(text_vocab, music_vocab, lexicon)
        except DataError as err:
            diffs.append(f"{ds}: cannot compute VA map: {err}")
            continue
        for tag, expected in golden.items():
            got = computed.map[tag][0]
            if got != expected:
                diffs.append(f"{ds}: {tag} -> {got} (published: {expected})")
    return diffs
