"""Feature exporter: raw sentences and audio clips in, interchange files out.

A thin adapter in front of the retrieval engine: it owns encoders and the
audio front-end, speaks the engine's feature interchange format on the way
out, and nothing else crosses the boundary.
"""

from .errors import EncoderError, ExporterError, ManifestError
from .export import ExportReport, export_music, export_text
from .manifest import ExportManifest, ManifestItem, load_manifest

__version__ = "0.1.0"
