"""Feature ingestion and generation.

File formats handled here:

* feature interchange: UTF-8 text, header ``#dim=<D> modality=<TEXT|MUSIC>``,
  then one record per line as ``id<TAB>tag<TAB>v1,v2,...,vD``
* valence/arousal lexicon: TSV ``word<TAB>valence<TAB>arousal[<TAB>dominance]``
  with all values in [0, 1]
* word embeddings: word2vec text format, first line ``V D`` then
  ``token v1 ... vD``

Plus stratified train/val/test splitting and a seeded synthetic
two-modality corpus for desk-scale experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .numcore import as_vector

TEXT = "TEXT"
MUSIC = "MUSIC"
MODALITIES = (TEXT, MUSIC)

TRAIN = "TRAIN"
VAL = "VAL"
TEST = "TEST"
SPLITS = (TRAIN, VAL, TEST)


def normalize_tag(tag):
    """Lowercase, strip, spaces to underscores. Tags must be non-empty ASCII."""
    t = str(tag).strip().lower().replace(" ", "_")
    if not t:
        raise DataError("empty tag")
    if not t.isascii():
        raise DataError(f"non-ASCII tag {tag!r}")
    return t


@dataclass
class FeatureRecord:
    """One retrieval unit: a text passage or a music clip, pre-featurized."""

    id: str
    modality: str
    tag: str
    features: np.ndarray

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise DataError(f"unknown modality {self.modality!r} for id {self.id!r}")
        self.tag = normalize_tag(self.tag)
        self.features = as_vector(self.features, f"features of {self.id!r}")


class FeatureTable:
    """Immutable-by-convention list of records sharing modality and dim.

    Iteration order is insertion (= file) order; ids are unique.
    """

    def __init__(self, modality, dim, records=()):
        if modality not in MODALITIES:
            raise DataError(f"unknown modality {modality!r}")
        if dim <= 0:
            raise DataError(f"feature dim must be positive, got {dim}")
        self.modality = modality
        self.dim = int(dim)
        self.records = []
        self._by_id = {}
        for rec in records:
            self.append(rec)

    def append(self, rec):
        if rec.modality != self.modality:
            raise DataError(
                f"record {rec.id!r} has modality {rec.modality}, table is {self.modality}"
            )
        if rec.features.shape[0] != self.dim:
            raise DataError(
                f"record {rec.id!r} has dim {rec.features.shape[0]}, table is {self.dim}"
            )
        if rec.id in self._by_id:
            raise DataError(f"duplicate id {rec.id!r}")
        self._by_id[rec.id] = rec
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, rec_id):
        try:
            return self._by_id[rec_id]
        except KeyError:
            raise DataError(f"no record with id {rec_id!r}") from None

    def __contains__(self, rec_id):
        return rec_id in self._by_id

    def ids(self):
        return [r.id for r in self.records]

    def tags(self):
        return [r.tag for r in self.records]

    def matrix(self):
        """Features stacked row-per-record."""
        return np.stack([r.features for r in self.records]) if self.records else (
            np.zeros((0, self.dim))
        )

    def subset(self, ids):
        return FeatureTable(self.modality, self.dim, [self._by_id[i] for i in ids])


@dataclass(frozen=True)
class Vocabulary:
    """Ordered tag set of one modality; position defines the class index."""

    modality: str
    tags: tuple

    def __post_init__(self):
        if not self.tags:
            raise DataError(f"empty {self.modality} vocabulary")
        if len(set(self.tags)) != len(self.tags):
            raise DataError(f"duplicate tags in {self.modality} vocabulary")

    @classmethod
    def from_tags(cls, modality, tags):
        return cls(modality, tuple(normalize_tag(t) for t in tags))

    @classmethod
    def from_table(cls, table):
        seen = []
        for rec in table:
            if rec.tag not in seen:
                seen.append(rec.tag)
        return cls(table.modality, tuple(seen))

    def index(self, tag):
        try:
            return self.tags.index(tag)
        except ValueError:
            raise DataError(f"tag {tag!r} not in {self.modality} vocabulary") from None

    def __len__(self):
        return len(self.tags)

    def __contains__(self, tag):
        return tag in self.tags


# ----------------------------------------------------------------------
# feature interchange files

def load_features(path, expected_dim=None):
    """Parse a feature interchange file into a FeatureTable."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataError("missing header", path=path, line=1)
    header = lines[0].strip()
    if not header.startswith("#"):
        raise DataError(f"expected '#dim=... modality=...' header, got {header!r}",
                        path=path, line=1)
    fields = dict(
        part.split("=", 1) for part in header.lstrip("#").split() if "=" in part
    )
    try:
        dim = int(fields["dim"])
        modality = fields["modality"]
    except (KeyError, ValueError):
        raise DataError(f"bad header {header!r}", path=path, line=1) from None
    if modality not in MODALITIES:
        raise DataError(f"unknown modality {modality!r}", path=path, line=1)
    if expected_dim is not None and dim != expected_dim:
        raise DataError(f"file dim {dim} != expected {expected_dim}", path=path, line=1)

    table = FeatureTable(modality, dim)
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        parts = raw.split("\t")
        if len(parts) != 3:
            raise DataError(f"expected 3 tab-separated fields, got {len(parts)}",
                            path=path, line=lineno)
        rec_id, tag, vec_text = parts
        try:
            values = np.array([float(v) for v in vec_text.split(",")], dtype=np.float64)
        except ValueError:
            raise DataError(f"unparseable feature vector for id {rec_id!r}",
                            path=path, line=lineno) from None
        if values.shape[0] != dim:
            raise DataError(
                f"id {rec_id!r} has {values.shape[0]} values, header says dim={dim}",
                path=path, line=lineno)
        try:
            table.append(FeatureRecord(rec_id, modality, tag, values))
        except DataError as err:
            raise DataError(str(err), path=path, line=lineno) from None
    return table


def write_features(table, path):
    """Write a FeatureTable in the interchange format (repr floats, lossless)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#dim={table.dim} modality={table.modality}\n")
        for rec in table:
            vec = ",".join(repr(float(v)) for v in rec.features)
            fh.write(f"{rec.id}\t{rec.tag}\t{vec}\n")


# ----------------------------------------------------------------------
# valence/arousal lexicon

class VadLexicon:
    """word -> (valence, arousal, dominance?) with case-insensitive lookup."""

    def __init__(self, entries=None):
        self.entries = {}
        for word, vals in (entries or {}).items():
            self.add(word, *vals)

    def add(self, word, valence, arousal, dominance=None):
        for name, val in (("valence", valence), ("arousal", arousal),
                          ("dominance", dominance)):
            if val is not None and not (0.0 <= val <= 1.0):
                raise DataError(f"{name} {val} out of [0,1] for word {word!r}")
        self.entries[str(word).strip().lower()] = (
            float(valence), float(arousal),
            None if dominance is None else float(dominance),
        )

    def __contains__(self, word):
        return str(word).strip().lower() in self.entries

    def __len__(self):
        return len(self.entries)

    def lookup(self, word):
        key = str(word).strip().lower()
        if key not in self.entries:
            raise DataError(f"word {word!r} not in lexicon")
        return self.entries[key]

    def va(self, word):
        """(valence, arousal) as an array; dominance is deliberately dropped."""
        v, a, _ = self.lookup(word)
        return np.array([v, a])


def load_vad_lexicon(path):
    lex = VadLexicon()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (3, 4):
                raise DataError(f"expected 3 or 4 tab-separated fields, got {len(parts)}",
                                path=path, line=lineno)
            word = parts[0]
            try:
                nums = [float(p) for p in parts[1:]]
            except ValueError:
                # tolerate a single header row like "Word\tValence\tArousal\tDominance"
                if lineno == 1:
                    continue
                raise DataError(f"unparseable values in {line!r}",
                                path=path, line=lineno) from None
            try:
                lex.add(word, *nums)
            except DataError as err:
                raise DataError(str(err), path=path, line=lineno) from None
    return lex


def write_vad_lexicon(lexicon, path):
    with open(path, "w", encoding="utf-8") as fh:
        for word in sorted(lexicon.entries):
            v, a, d = lexicon.entries[word]
            row = [word, repr(v), repr(a)]
            if d is not None:
                row.append(repr(d))
            fh.write("\t".join(row) + "\n")


# ----------------------------------------------------------------------
# word embeddings (word2vec text format)

class WordEmbeddingTable:
    """token -> dense vector; tokens lowercase, underscores join n-grams."""

    def __init__(self, dim, entries=None):
        if dim <= 0:
            raise DataError(f"embedding dim must be positive, got {dim}")
        self.dim = int(dim)
        self.entries = {}
        for token, vec in (entries or {}).items():
            self.add(token, vec)

    def add(self, token, vec):
        key = str(token).strip().lower()
        v = as_vector(vec, f"embedding of {token!r}")
        if v.shape[0] != self.dim:
            raise DataError(f"token {token!r} has dim {v.shape[0]}, table is {self.dim}")
        if np.linalg.norm(v) == 0.0:
            raise DataError(f"token {token!r} has a zero embedding vector")
        self.entries[key] = v

    def __contains__(self, token):
        return str(token).strip().lower() in self.entries

    def __len__(self):
        return len(self.entries)

    def vector(self, token):
        key = str(token).strip().lower()
        if key not in self.entries:
            raise DataError(f"token {token!r} not in embedding table")
        return self.entries[key]


def load_word_embeddings(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataError("empty embedding file", path=path, line=1)
    head = lines[0].split()
    if len(head) != 2:
        raise DataError(f"expected 'V D' header, got {lines[0]!r}", path=path, line=1)
    try:
        count, dim = int(head[0]), int(head[1])
    except ValueError:
        raise DataError(f"expected 'V D' header, got {lines[0]!r}",
                        path=path, line=1) from None
    table = WordEmbeddingTable(dim)
    rows = 0
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != dim + 1:
            raise DataError(
                f"token {parts[0]!r} row has {len(parts) - 1} values, header says {dim}",
                path=path, line=lineno)
        try:
            vec = np.array([float(p) for p in parts[1:]], dtype=np.float64)
        except ValueError:
            raise DataError(f"unparseable embedding row for {parts[0]!r}",
                            path=path, line=lineno) from None
        try:
            table.add(parts[0], vec)
        except DataError as err:
            raise DataError(str(err), path=path, line=lineno) from None
        rows += 1
    if rows != count:
        raise DataError(f"header promises {count} tokens, file has {rows}", path=path)
    return table


def write_word_embeddings(table, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.entries)} {table.dim}\n")
        for token in sorted(table.entries):
            vec = " ".join(repr(float(v)) for v in table.entries[token])
            fh.write(f"{token} {vec}\n")


# ----------------------------------------------------------------------
# stratified splits

@dataclass
class SplitAssignment:
    """record id -> TRAIN/VAL/TEST; a partition of the table's ids."""

    assignment: dict

    def split_of(self, rec_id):
        return self.assignment[rec_id]

    def ids(self, split):
        if split not in SPLITS:
            raise DataError(f"unknown split {split!r}")
        return [i for i, s in self.assignment.items() if s == split]

    def select(self, table, split):
        return table.subset([r.id for r in table if self.assignment[r.id] == split])


def _largest_remainder_counts(n, ratios):
    raw = [n * r for r in ratios]
    counts = [int(math.floor(x)) for x in raw]
    rem = n - sum(counts)
    # hand leftover items to the largest fractional parts, ties by position
    order = sorted(range(len(ratios)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:rem]:
        counts[i] += 1
    return counts


def stratified_split(table, ratios=(0.70, 0.15, 0.15), seed=0):
    """Per-tag split into train/val/test with largest-remainder rounding.

    Every tag needs at least 3 members. Deterministic for a given seed.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise DataError(f"ratios must be 3 non-negative values summing to 1, got {ratios}")
    by_tag = {}
    for rec in table:
        by_tag.setdefault(rec.tag, []).append(rec.id)
    small = sorted(t for t, ids in by_tag.items() if len(ids) < 3)
    if small:
        raise DataError(f"classes with fewer than 3 members: {', '.join(small)}")
    rng = np.random.default_rng(seed)
    assignment = {}
    for tag in sorted(by_tag):
        ids = list(by_tag[tag])
        rng.shuffle(ids)
        n_train, n_val, n_test = _largest_remainder_counts(len(ids), ratios)
        for i, rec_id in enumerate(ids):
            if i < n_train:
                assignment[rec_id] = TRAIN
            elif i < n_train + n_val:
                assignment[rec_id] = VAL
            else:
                assignment[rec_id] = TEST
    # present in file order so downstream iteration is stable
    return SplitAssignment({r.id: assignment[r.id] for r in table})


# ----------------------------------------------------------------------
# synthetic corpus

@dataclass
class SynthSpec:
    """Generator recipe for a two-modality corpus with a known tag mapping.

    Music tags carry latent centers on the unit sphere of dimension
    latent_dim; each text tag sits near the center of one music tag.
    Observed features are a fixed seeded affine transform of
    (center + gaussian noise) per modality.
    """

    latent_dim: int
    music_centers: dict      # music tag -> unit vector
    text_centers: dict       # text tag -> unit vector
    text_to_music: dict      # text tag -> music tag (ground truth)
    text_dim: int = 32
    music_dim: int = 48
    cluster_std: float = 0.05
    per_text_tag: int = 400
    per_music_tag: int = 286
    va_points: dict = field(default_factory=dict)   # tag -> (valence, arousal)

    def validate(self):
        if self.cluster_std < 0:
            raise DataError(f"cluster std must be >= 0, got {self.cluster_std}")
        if self.per_text_tag <= 0 or self.per_music_tag <= 0:
            raise DataError("per-tag counts must be positive")
        if self.text_dim <= 0 or self.music_dim <= 0 or self.latent_dim <= 0:
            raise DataError("dims must be positive")
        if not self.music_centers or not self.text_centers:
            raise DataError("need at least one tag per modality")
        for tag, target in self.text_to_music.items():
            if target not in self.music_centers:
                raise DataError(f"text tag {tag!r} maps to unknown music tag {target!r}")
        for name, centers in (("music", self.music_centers), ("text", self.text_centers)):
            for tag, c in centers.items():
                vec = as_vector(c, f"{name} center {tag!r}")
                if vec.shape[0] != self.latent_dim:
                    raise DataError(f"{name} center {tag!r} has dim {vec.shape[0]}")


DEFAULT_MUSIC_TAGS = ("happy", "funny", "sad", "tender", "exciting", "angry", "scary")
DEFAULT_TEXT_TO_MUSIC = {
    "joyful": "happy",
    "gloomy": "sad",
    "furious": "angry",
    "terrified": "scary",
    "astonished": "exciting",
}


def default_synth_spec(seed=7, latent_dim=16, text_dim=32, music_dim=48,
                       cluster_std=0.05, per_text_tag=400, per_music_tag=286):
    """Disjoint-vocabulary corpus spec: 7 music tags, 5 text tags.

    Music centers are rows of a random orthogonal matrix, so distinct tags
    are mutually orthogonal in latent space. Text centers are a small
    perturbation of their mapped music center. VA points place music tags
    on a circle in [0,1]^2 with text tags nudged toward the middle.
    """
    if latent_dim < len(DEFAULT_MUSIC_TAGS):
        raise DataError("latent_dim must be >= number of music tags")
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((latent_dim, latent_dim)))
    music_centers = {t: q[i].copy() for i, t in enumerate(DEFAULT_MUSIC_TAGS)}
    text_centers = {}
    for text_tag, music_tag in DEFAULT_TEXT_TO_MUSIC.items():
        c = music_centers[music_tag] + 0.1 * rng.standard_normal(latent_dim)
        text_centers[text_tag] = c / np.linalg.norm(c)
    va_points = {}
    for i, t in enumerate(DEFAULT_MUSIC_TAGS):
        ang = 2.0 * np.pi * i / len(DEFAULT_MUSIC_TAGS)
        va_points[t] = (0.5 + 0.4 * np.cos(ang), 0.5 + 0.4 * np.sin(ang))
    for text_tag, music_tag in DEFAULT_TEXT_TO_MUSIC.items():
        v, a = va_points[music_tag]
        va_points[text_tag] = (v + 0.02 * (0.5 - v), a + 0.02 * (0.5 - a))
    return SynthSpec(
        latent_dim=latent_dim,
        music_centers=music_centers,
        text_centers=text_centers,
        text_to_music=dict(DEFAULT_TEXT_TO_MUSIC),
        text_dim=text_dim,
        music_dim=music_dim,
        cluster_std=cluster_std,
        per_text_tag=per_text_tag,
        per_music_tag=per_music_tag,
        va_points=va_points,
    )


@dataclass
class SynthCorpus:
    text: FeatureTable
    music: FeatureTable
    mapping: dict            # text tag -> music tag, the ground truth
    text_latents: np.ndarray
    music_latents: np.ndarray
    spec: SynthSpec


def _synth_modality(modality, prefix, centers, count_per_tag, feature_dim, spec, rng):
    affine = rng.standard_normal((feature_dim, spec.latent_dim)) / np.sqrt(spec.latent_dim)
    offset = 0.1 * rng.standard_normal(feature_dim)
    table = FeatureTable(modality, feature_dim)
    latents = []
    idx = 0
    for tag in centers:
        center = centers[tag]
        for _ in range(count_per_tag):
            latent = center + spec.cluster_std * rng.standard_normal(spec.latent_dim)
            latents.append(latent)
            table.append(FeatureRecord(
                f"{prefix}{idx:05d}", modality, tag, affine @ latent + offset))
            idx += 1
    return table, np.stack(latents)


def synth_generate(spec, seed):
    """Draw a corpus from a SynthSpec. Same seed, same corpus, bit for bit."""
    spec.validate()
    text_rng, music_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2)
    )
    text, text_latents = _synth_modality(
        TEXT, "t", spec.text_centers, spec.per_text_tag, spec.text_dim, spec, text_rng)
    music, music_latents = _synth_modality(
        MUSIC, "m", spec.music_centers, spec.per_music_tag, spec.music_dim, spec,
        music_rng)
    return SynthCorpus(text, music, dict(spec.text_to_music), text_latents,
                       music_latents, spec)


def synth_word_embeddings(spec):
    """Tag embedding table for a synthetic corpus: the latent centers themselves."""
    table = WordEmbeddingTable(spec.latent_dim)
    for tag, center in spec.music_centers.items():
        table.add(tag, center)
    for tag, center in spec.text_centers.items():
        table.add(tag, center)
    return table


def synth_vad_lexicon(spec):
    if not spec.va_points:
        raise DataError("synth spec has no VA points")
    lex = VadLexicon()
    for tag, (v, a) in spec.va_points.items():
        lex.add(tag, v, a)
    return lex
