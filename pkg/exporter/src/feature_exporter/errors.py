class ExporterError(Exception):
    """Base class for exporter failures."""


class ManifestError(ExporterError):
    """Malformed manifest: bad row, duplicate id, empty tag."""


class EncoderError(ExporterError):
    """Encoder unavailable or unable to process an item."""
