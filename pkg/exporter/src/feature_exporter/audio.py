"""Audio front-end: WAV decoding, resampling, log-mel spectrograms.

The analysis chain is fixed: resample to 16 kHz, frame with a 512-point
FFT and 50% overlap (hop 256), Hann window, then a 128-band mel filterbank
up to Nyquist and log compression. Silence stays finite thanks to the log
floor.
"""

import math

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .errors import EncoderError

SAMPLE_RATE = 16_000
N_FFT = 512
HOP = N_FFT // 2           # 50% frame overlap
N_MELS = 128
LOG_FLOOR = 1e-10


def load_wav_mono(path):
    """Decode a WAV file to mono float64 in [-1, 1] plus its sample rate."""
    try:
        rate, data = wavfile.read(path)
    except (OSError, ValueError) as err:
        raise EncoderError(f"cannot decode {path!r}: {err}") from None
    data = np.asarray(data)
    if data.ndim == 2:
        data = data.mean(axis=1)
    if np.issubdtype(data.dtype, np.integer):
        data = data.astype(np.float64) / float(np.iinfo(data.dtype).max)
    else:
        data = data.astype(np.float64)
    if data.size == 0:
        raise EncoderError(f"{path!r}: empty audio stream")
    return data, int(rate)


def resample_to_16k(signal, rate):
    if rate == SAMPLE_RATE:
        return signal
    g = math.gcd(SAMPLE_RATE, rate)
    return resample_poly(signal, SAMPLE_RATE // g, rate // g)


def _hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + hz / 700.0)


def _mel_to_hz(mel):
    return 700.0 * (10.0 ** (mel / 2595.0) - 1.0)


def mel_filterbank(n_mels=N_MELS, n_fft=N_FFT, rate=SAMPLE_RATE):
    """Triangular mel filters over the rfft bins, shape (n_mels, n_fft//2+1)."""
    n_bins = n_fft // 2 + 1
    freqs = np.linspace(0.0, rate / 2.0, n_bins)
    edges = _mel_to_hz(np.linspace(_hz_to_mel(0.0), _hz_to_mel(rate / 2.0),
                                   n_mels + 2))
    bank = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        lo, center, hi = edges[m], edges[m + 1], edges[m + 2]
        rising = (freqs - lo) / max(center - lo, 1e-12)
        falling = (hi - freqs) / max(hi - center, 1e-12)
        bank[m] = np.clip(np.minimum(rising, falling), 0.0, None)
    return bank


_BANK = None


def log_mel_spectrogram(signal):
    """(frames, 128) log-mel features of a 16 kHz signal."""
    global _BANK
    if _BANK is None:
        _BANK = mel_filterbank()
    if signal.shape[0] < N_FFT:
        signal = np.pad(signal, (0, N_FFT - signal.shape[0]))
    window = np.hanning(N_FFT)
    n_frames = 1 + (signal.shape[0] - N_FFT) // HOP
    frames = np.lib.stride_tricks.sliding_window_view(signal, N_FFT)[::HOP]
    frames = frames[:n_frames]
    spectrum = np.abs(np.fft.rfft(frames * window, axis=1)) ** 2
    mel = spectrum @ _BANK.T
    return np.log(mel + LOG_FLOOR)
