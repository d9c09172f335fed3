"""Export manifests: one input item per TSV row.

Format: ``id<TAB>tag<TAB>path_or_text``. The third field is everything after
the second tab, so free text with spaces (or further tabs) survives. Ids
must be unique and tags non-empty; both are checked up front so a bad
manifest fails before any encoding work starts.
"""

from dataclasses import dataclass

from .errors import ManifestError

TEXT = "TEXT"
MUSIC = "MUSIC"

MEAN = "mean"
FIRST = "first"
POOLINGS = (MEAN, FIRST)


@dataclass
class ManifestItem:
    id: str
    tag: str
    source: str          # raw text for TEXT manifests, a file path for MUSIC


@dataclass
class ExportManifest:
    modality: str
    items: list
    encoder: str
    pooling: str = MEAN

    def __post_init__(self):
        if self.modality not in (TEXT, MUSIC):
            raise ManifestError(f"unknown modality {self.modality!r}")
        if self.pooling not in POOLINGS:
            raise ManifestError(f"unknown pooling {self.pooling!r}")
        seen = set()
        for item in self.items:
            if not item.id:
                raise ManifestError("empty id")
            if item.id in seen:
                raise ManifestError(f"duplicate id {item.id!r}")
            seen.add(item.id)
            if not item.tag.strip():
                raise ManifestError(f"empty tag for id {item.id!r}")


def load_manifest(path, modality, encoder, pooling=MEAN):
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t", 2)
            if len(parts) != 3:
                raise ManifestError(
                    f"{path}:{lineno}: expected id<TAB>tag<TAB>path_or_text")
            items.append(ManifestItem(parts[0].strip(), parts[1].strip(),
                                      parts[2]))
    if not items:
        raise ManifestError(f"{path}: empty manifest")
    return ExportManifest(modality, items, encoder, pooling)
