"""Encoder registry.

Built-ins run fully offline and deterministically:

* ``hashed-ngram`` (text): every token gets a fixed pseudo-random unit
  vector derived from a SHA-256 of the token, so identical inputs produce
  identical vectors on any machine. A cheap, dependency-free stand-in for
  a sentence transformer.
* ``mel-projection`` (music): log-mel frames pushed through a fixed seeded
  linear projection; the clip vector is pooled over frames downstream.

``transformers:<model-or-path>`` wraps a locally available Hugging Face
text model (mean or first-token pooled hidden states). It activates only
when the library and weights are importable; there is no download step.
"""

import hashlib
import re

import numpy as np

from . import audio
from .errors import EncoderError

DEFAULT_TEXT_DIM = 256
DEFAULT_MUSIC_DIM = 128

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def _token_vector(token, dim):
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    seed = int.from_bytes(digest[:8], "little")
    v = np.random.default_rng(seed).standard_normal(dim)
    return v / np.linalg.norm(v)


class HashedNgramTextEncoder:
    """Deterministic bag-of-token-vectors text encoder."""

    name = "hashed-ngram"

    def __init__(self, dim=DEFAULT_TEXT_DIM):
        self.dim = int(dim)
        self._cache = {}

    def encode(self, text, pooling):
        tokens = _TOKEN_RE.findall(text.lower())
        if not tokens:
            raise EncoderError("empty text after tokenization")
        if pooling == "first":
            tokens = tokens[:1]
        total = np.zeros(self.dim)
        for tok in tokens:
            if tok not in self._cache:
                self._cache[tok] = _token_vector(tok, self.dim)
            total += self._cache[tok]
        return total / len(tokens)


class TransformersTextEncoder:
    """Locally available Hugging Face model; no downloads are attempted."""

    def __init__(self, model_ref):
        self.name = f"transformers:{model_ref}"
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as err:
            raise EncoderError(f"transformers backend unavailable: {err}") from None
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(
                model_ref, local_files_only=True)
            self._model = AutoModel.from_pretrained(
                model_ref, local_files_only=True)
        except Exception as err:
            raise EncoderError(
                f"cannot load local model {model_ref!r}: {err}") from None
        self._model.eval()
        self._torch = torch
        self.dim = int(self._model.config.hidden_size)

    def encode(self, text, pooling):
        if not text.strip():
            raise EncoderError("empty text")
        with self._torch.no_grad():
            tokens = self._tokenizer(text, return_tensors="pt", truncation=True)
            hidden = self._model(**tokens).last_hidden_state[0]
        if pooling == "first":
            vec = hidden[0]
        else:
            vec = hidden.mean(dim=0)
        return vec.numpy().astype(np.float64)


class MelProjectionMusicEncoder:
    """Log-mel frames through a fixed random projection, one vector per frame."""

    name = "mel-projection"
    _PROJECTION_SEED = 20_16  # bump when the front-end recipe changes

    def __init__(self, dim=DEFAULT_MUSIC_DIM):
        self.dim = int(dim)
        rng = np.random.default_rng(self._PROJECTION_SEED)
        self._w = rng.standard_normal((self.dim, audio.N_MELS)) / np.sqrt(audio.N_MELS)
        self._b = 0.1 * rng.standard_normal(self.dim)

    def encode(self, path, pooling):
        signal, rate = audio.load_wav_mono(path)
        signal = audio.resample_to_16k(signal, rate)
        frames = audio.log_mel_spectrogram(signal)
        embedded = frames @ self._w.T + self._b
        if pooling == "first":
            return embedded[0].astype(np.float64)
        return embedded.mean(axis=0).astype(np.float64)


def text_encoder(name, dim=DEFAULT_TEXT_DIM):
    if name == HashedNgramTextEncoder.name:
        return HashedNgramTextEncoder(dim)
    if name.startswith("transformers:"):
        return TransformersTextEncoder(name.split(":", 1)[1])
    raise EncoderError(f"unknown text encoder {name!r}")


def music_encoder(name, dim=DEFAULT_MUSIC_DIM):
    if name == MelProjectionMusicEncoder.name:
        return MelProjectionMusicEncoder(dim)
    raise EncoderError(f"unknown music encoder {name!r}")
