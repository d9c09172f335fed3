"""Run an encoder over a manifest and write the feature interchange file.

The output format matches the retrieval engine's loader bit for bit:
``#dim=<D> modality=<TEXT|MUSIC>`` header, then ``id<TAB>tag<TAB>v1,...,vD``
rows in manifest order. All items are encoded and validated first; the
file is then written once, atomically. Per-item failures are collected
into a report instead of aborting the batch, but nothing is written unless
at least one item succeeded, and callers exit nonzero when errors remain.
"""

import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import encoders
from .errors import EncoderError, ExporterError
from .manifest import MUSIC, TEXT

_TAG_OK = set("abcdefghijklmnopqrstuvwxyz0123456789_")


@dataclass
class ExportReport:
    written: int = 0
    dim: int = 0
    encoder: str = ""
    errors: list = field(default_factory=list)   # (item id, message)

    @property
    def ok(self):
        return not self.errors


def _normalize_tag(tag):
    t = tag.strip().lower().replace(" ", "_")
    if not t or not set(t) <= _TAG_OK:
        raise EncoderError(f"tag {tag!r} is not a lowercase ASCII label")
    return t


def _validate_rows(rows, dim):
    seen = set()
    for rec_id, _tag, vec in rows:
        if rec_id in seen:
            raise ExporterError(f"duplicate id {rec_id!r} after encoding")
        seen.add(rec_id)
        if vec.shape != (dim,):
            raise ExporterError(
                f"id {rec_id!r}: dim {vec.shape[0]} != expected {dim}")
        if not np.all(np.isfinite(vec)):
            raise ExporterError(f"id {rec_id!r}: non-finite feature values")


def _write_atomic(path, modality, dim, rows, encoder_name, pooling):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(f"#dim={dim} modality={modality}\n")
            fh.write(f"# encoder={encoder_name} pooling={pooling}\n")
            for rec_id, tag, vec in rows:
                values = ",".join(repr(float(v)) for v in vec)
                fh.write(f"{rec_id}\t{tag}\t{values}\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _run_export(manifest, encoder, out_path):
    report = ExportReport(encoder=encoder.name, dim=encoder.dim)
    rows = []
    for item in manifest.items:
        try:
            vec = np.asarray(encoder.encode(item.source, manifest.pooling),
                             dtype=np.float64)
            tag = _normalize_tag(item.tag)
        except (EncoderError, OSError) as err:
            report.errors.append((item.id, str(err)))
            continue
        rows.append((item.id, tag, vec))
    if rows:
        _validate_rows(rows, encoder.dim)
        _write_atomic(out_path, manifest.modality, encoder.dim, rows,
                      encoder.name, manifest.pooling)
        report.written = len(rows)
    return report


def export_text(manifest, out_path, dim=encoders.DEFAULT_TEXT_DIM):
    """Encode a TEXT manifest; returns an ExportReport."""
    if manifest.modality != TEXT:
        raise ExporterError("export_text needs a TEXT manifest")
    encoder = encoders.text_encoder(manifest.encoder, dim)
    return _run_export(manifest, encoder, out_path)


def export_music(manifest, out_path, dim=encoders.DEFAULT_MUSIC_DIM):
    """Encode a MUSIC manifest (paths to audio files); returns an ExportReport."""
    if manifest.modality != MUSIC:
        raise ExporterError("export_music needs a MUSIC manifest")
    encoder = encoders.music_encoder(manifest.encoder, dim)
    return _run_export(manifest, encoder, out_path)
