"""feature-export: encode raw sentences / audio into interchange files.

    feature-export text  --manifest items.tsv --out text.features
    feature-export music --manifest clips.tsv --out music.features

Manifest rows are ``id<TAB>tag<TAB>path_or_text``. Exit codes: 0 every item
encoded, 1 some items failed (the rest were still written), 2 bad usage or
manifest, 3 encoder unavailable.
"""

import argparse
import sys

from .encoders import DEFAULT_MUSIC_DIM, DEFAULT_TEXT_DIM
from .errors import EncoderError, ExporterError, ManifestError
from .export import export_music, export_text
from .manifest import MUSIC, TEXT, load_manifest


def _report(report, out):
    print(f"wrote {report.written} records (dim {report.dim}, "
          f"encoder {report.encoder}) to {out}")
    for item_id, message in report.errors:
        print(f"error: {item_id}: {message}", file=sys.stderr)
    return 0 if report.ok else 1


def main(argv=None):
    parser = argparse.ArgumentParser(prog="feature-export")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("text", help="encode raw sentences")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--encoder", default="hashed-ngram",
                   help="hashed-ngram or transformers:<model-or-path>")
    p.add_argument("--pooling", choices=["mean", "first"], default="mean")
    p.add_argument("--dim", type=int, default=DEFAULT_TEXT_DIM,
                   help="built-in encoder output dim (ignored by transformers)")

    p = sub.add_parser("music", help="encode audio clips")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--encoder", default="mel-projection")
    p.add_argument("--pooling", choices=["mean", "first"], default="mean")
    p.add_argument("--dim", type=int, default=DEFAULT_MUSIC_DIM)

    args = parser.parse_args(argv)
    try:
        if args.command == "text":
            manifest = load_manifest(args.manifest, TEXT, args.encoder,
                                     args.pooling)
            return _report(export_text(manifest, args.out, args.dim), args.out)
        manifest = load_manifest(args.manifest, MUSIC, args.encoder,
                                 args.pooling)
        return _report(export_music(manifest, args.out, args.dim), args.out)
    except (ManifestError, OSError) as err:
        print(f"manifest error: {err}", file=sys.stderr)
        return 2
    except EncoderError as err:
        print(f"encoder error: {err}", file=sys.stderr)
        return 3
    except ExporterError as err:
        print(f"export error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
