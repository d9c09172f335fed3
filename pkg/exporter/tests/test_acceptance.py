"""Exporter acceptance: everything written here loads through the engine.

The retrieval engine is the consumer; its loader enforces the interchange
invariants (dim uniformity, id uniqueness, known modality, tag hygiene).
These tests push exporter output through that loader directly.
"""

import numpy as np

from moodbridge.features import load_features

from feature_exporter.export import export_music, export_text
from feature_exporter.manifest import MUSIC, TEXT, load_manifest

from test_audio import sine, write_wav

SENTENCES = [
    ("s0", "happy", "A bright parade swept through the town square."),
    ("s1", "sad", "The last lamp went out and nobody noticed."),
    ("s2", "angry", "He slammed the ledger shut, knuckles white."),
    ("s3", "happy", "Kites! Dozens of them, chasing the wind."),
    ("s4", "fearful", "Something moved behind the mirror."),
]


def test_text_exports_load_through_engine_loader(tmp_path):
    mpath = tmp_path / "sentences.tsv"
    mpath.write_text("".join(f"{i}\t{t}\t{s}\n" for i, t, s in SENTENCES))
    out = tmp_path / "text.features"
    report = export_text(load_manifest(mpath, TEXT, "hashed-ngram"), out)
    assert report.ok

    table = load_features(out, expected_dim=report.dim)
    assert table.modality == "TEXT"
    assert table.ids() == [i for i, _, _ in SENTENCES]
    assert table.tags() == [t for _, t, _ in SENTENCES]
    assert np.all(np.isfinite(table.matrix()))


def test_music_exports_load_through_engine_loader(tmp_path):
    clips = [("c0", sine(0.5, 220.0), 16_000),
             ("c1", sine(0.5, 880.0), 16_000),
             ("c2", np.zeros(8_000), 16_000),
             ("c3", sine(0.4, 440.0, rate=22_050), 22_050)]
    rows = []
    for name, signal, rate in clips:
        path = tmp_path / f"{name}.wav"
        write_wav(path, signal, rate=rate)
        rows.append(f"{name}\ttender\t{path}\n")
    mpath = tmp_path / "clips.tsv"
    mpath.write_text("".join(rows))
    out = tmp_path / "music.features"
    report = export_music(load_manifest(mpath, MUSIC, "mel-projection"), out)
    assert report.ok

    table = load_features(out, expected_dim=report.dim)
    assert table.modality == "MUSIC"
    assert len(table) == 4
    assert np.all(np.isfinite(table.matrix()))


def test_identical_inputs_identical_vectors_end_to_end(tmp_path):
    mpath = tmp_path / "dup.tsv"
    mpath.write_text("a\thappy\tword for word the same\n"
                     "b\thappy\tword for word the same\n")
    out = tmp_path / "text.features"
    assert export_text(load_manifest(mpath, TEXT, "hashed-ngram"), out).ok
    table = load_features(out)
    assert np.array_equal(table["a"].features, table["b"].features)


def test_export_twice_byte_identical(tmp_path):
    mpath = tmp_path / "m.tsv"
    mpath.write_text("".join(f"{i}\t{t}\t{s}\n" for i, t, s in SENTENCES))
    outs = []
    for name in ("one.features", "two.features"):
        out = tmp_path / name
        assert export_text(load_manifest(mpath, TEXT, "hashed-ngram"), out).ok
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
