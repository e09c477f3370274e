"""Log-mel spectrogram frontend and patch tokenization.

Pure numpy, no learned parameters. An 8 s chunk at the default config
(16 kHz, 80 mels, 25 ms window, 10 ms hop) yields an 80x800 spectrogram
and 250 tokens of 16x16 after patchification.

Framing is center-aligned: the signal is reflect-padded by half a window
on each side and frame ``i`` is centered on sample ``i * hop``, so an
exact 8 s crop produces exactly 800 frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import get_window

from .config import FrontendConfig
from .errors import ConfigurationError, InputError


@dataclass
class AudioChunk:
    """Mono PCM audio. ``samples`` is a 1-D float array in [-1, 1] scale."""

    samples: np.ndarray
    sample_rate: int

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class LogMelSpectrogram:
    values: np.ndarray  # [n_mels, n_frames], log-power units
    n_mels: int
    frame_hop: float  # seconds
    window: float  # seconds

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


@dataclass
class PatchGrid:
    patches: np.ndarray  # [K, patch_f, patch_t]
    grid_shape: tuple[int, int]  # (F_p, T_p)
    coords: np.ndarray  # [K, 2] int (freq-index, time-index), row-major

    @property
    def n_tokens(self) -> int:
        return self.patches.shape[0]


def hz_to_mel(f: np.ndarray | float) -> np.ndarray | float:
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m: np.ndarray | float) -> np.ndarray | float:
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=8)
def _filterbank_cached(
    sample_rate: int, n_fft: int, n_mels: int, fmin: float, fmax: float
) -> np.ndarray:
    n_freqs = n_fft // 2 + 1
    freqs = np.linspace(0.0, sample_rate / 2.0, n_freqs)
    mel_pts = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)

    fb = np.zeros((n_mels, n_freqs))
    for m in range(n_mels):
        lo, ctr, hi = hz_pts[m], hz_pts[m + 1], hz_pts[m + 2]
        up = (freqs - lo) / max(ctr - lo, 1e-12)
        down = (hi - freqs) / max(hi - ctr, 1e-12)
        fb[m] = np.clip(np.minimum(up, down), 0.0, None)
    return fb


def mel_filterbank(cfg: FrontendConfig) -> np.ndarray:
    """Triangular mel filterbank, [n_mels, n_fft//2 + 1]."""
    fmax = cfg.fmax_hz if cfg.fmax_hz is not None else cfg.sample_rate / 2.0
    return _filterbank_cached(cfg.sample_rate, fft_size(cfg), cfg.n_mels, cfg.fmin_hz, fmax)


def mel_band_centers(cfg: FrontendConfig) -> np.ndarray:
    """Center frequency (Hz) of each mel band."""
    fmax = cfg.fmax_hz if cfg.fmax_hz is not None else cfg.sample_rate / 2.0
    mel_pts = np.linspace(hz_to_mel(cfg.fmin_hz), hz_to_mel(fmax), cfg.n_mels + 2)
    return np.asarray(mel_to_hz(mel_pts[1:-1]))


def window_length(cfg: FrontendConfig) -> int:
    return int(round(cfg.window_seconds * cfg.sample_rate))


def hop_length(cfg: FrontendConfig) -> int:
    return int(round(cfg.hop_seconds * cfg.sample_rate))


def fft_size(cfg: FrontendConfig) -> int:
    return 1 << (window_length(cfg) - 1).bit_length()


def log_floor(cfg: FrontendConfig) -> float:
    """The value silence maps to: log of the power clamp."""
    return math.log(cfg.power_floor)


def num_frames(n_samples: int, cfg: FrontendConfig) -> int:
    return 1 + (n_samples - 1) // hop_length(cfg)


def compute_log_mel(audio: AudioChunk, cfg: FrontendConfig) -> LogMelSpectrogram:
    """Convert an audio chunk to a log-power mel spectrogram.

    Power is clamped to ``cfg.power_floor`` before the log, so silence maps
    to a finite floor. If ``cfg.standardize`` is set, the whole spectrogram
    is shifted/scaled to zero mean and unit variance (std clamped from below).
    """
    if audio.sample_rate != cfg.sample_rate:
        raise ConfigurationError(
            f"audio sample rate {audio.sample_rate} != configured {cfg.sample_rate}"
        )
    x = np.asarray(audio.samples, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise InputError("audio must be non-empty mono")
    if not np.all(np.isfinite(x)):
        raise InputError("audio contains non-finite samples")

    win = window_length(cfg)
    hop = hop_length(cfg)
    n_fft = fft_size(cfg)
    n_frames = num_frames(x.size, cfg)

    pad = win // 2
    if x.size > 1:
        padded = np.pad(x, pad, mode="reflect")
    else:
        padded = np.pad(x, pad, mode="constant")
    # Frame i covers padded[i*hop : i*hop + win], centered on original sample i*hop.
    frames = np.lib.stride_tricks.sliding_window_view(padded, win)[:: hop][:n_frames]
    window = get_window("hann", win, fftbins=True)
    spectrum = np.fft.rfft(frames * window, n=n_fft, axis=1)
    power = spectrum.real**2 + spectrum.imag**2  # [n_frames, n_freqs]

    mel_power = power @ mel_filterbank(cfg).T  # [n_frames, n_mels]
    values = np.log(np.maximum(mel_power, cfg.power_floor)).T  # [n_mels, n_frames]

    if cfg.standardize:
        std = max(float(values.std()), cfg.std_floor)
        values = (values - values.mean()) / std

    return LogMelSpectrogram(
        values=np.ascontiguousarray(values, dtype=np.float32),
        n_mels=cfg.n_mels,
        frame_hop=cfg.hop_seconds,
        window=cfg.window_seconds,
    )


def patchify(spec: LogMelSpectrogram, patch_f: int, patch_t: int) -> PatchGrid:
    """Cut the spectrogram into a (F_p, T_p) grid of patch_f x patch_t tiles.

    Trailing frames beyond the last full time-patch are dropped. Token order
    is row-major over (freq-index, time-index).
    """
    n_mels, n_frames = spec.values.shape
    if n_mels % patch_f != 0:
        raise ConfigurationError(f"n_mels={n_mels} not divisible by patch_f={patch_f}")
    if n_frames < patch_t:
        raise InputError(f"need at least {patch_t} frames, got {n_frames}")
    f_p = n_mels // patch_f
    t_p = n_frames // patch_t
    trimmed = spec.values[:, : t_p * patch_t]
    patches = (
        trimmed.reshape(f_p, patch_f, t_p, patch_t)
        .transpose(0, 2, 1, 3)
        .reshape(f_p * t_p, patch_f, patch_t)
    )
    fi, ti = np.divmod(np.arange(f_p * t_p), t_p)
    coords = np.stack([fi, ti], axis=1).astype(np.int64)
    return PatchGrid(patches=np.ascontiguousarray(patches), grid_shape=(f_p, t_p), coords=coords)


def unpatchify(grid: PatchGrid) -> np.ndarray:
    """Reassemble the retained spectrogram region, exact inverse of patchify."""
    f_p, t_p = grid.grid_shape
    k, patch_f, patch_t = grid.patches.shape
    assert k == f_p * t_p
    return (
        grid.patches.reshape(f_p, t_p, patch_f, patch_t)
        .transpose(0, 2, 1, 3)
        .reshape(f_p * patch_f, t_p * patch_t)
    )
