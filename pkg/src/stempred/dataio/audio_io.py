"""WAV reading/writing.

Reads 16/24-bit integer and 32-bit float PCM, mono or multi-channel
(multi-channel is downmixed by averaging). Integer data is scaled to
[-1, 1]. Reads go through scipy's memmap path so cropping an 8 s window
out of a long track only touches the needed pages.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.io import wavfile

from ..errors import DataError

# scipy stores 24-bit PCM in the upper 3 bytes of an int32.
_SCALE = {np.dtype(np.int16): 2.0**15, np.dtype(np.int32): 2.0**31}


def _open(path: str | Path) -> tuple[int, np.ndarray]:
    p = Path(path)
    if not p.exists():
        raise DataError(f"audio file not found: {p}")
    try:
        sr, data = wavfile.read(str(p), mmap=True)
    except ValueError:
        # float64 and some esoteric encodings reject mmap
        try:
            sr, data = wavfile.read(str(p), mmap=False)
        except Exception as exc:
            raise DataError(f"cannot read WAV {p}: {exc}") from exc
    except Exception as exc:
        raise DataError(f"cannot read WAV {p}: {exc}") from exc
    return sr, data


def _to_float_mono(data: np.ndarray) -> np.ndarray:
    if data.dtype in _SCALE:
        out = data.astype(np.float32) / _SCALE[data.dtype]
    elif data.dtype == np.uint8:
        out = (data.astype(np.float32) - 128.0) / 128.0
    elif data.dtype in (np.float32, np.float64):
        out = data.astype(np.float32)
    else:
        raise DataError(f"unsupported WAV sample format: {data.dtype}")
    if out.ndim == 2:
        out = out.mean(axis=1)
    return np.ascontiguousarray(out)


def wav_info(path: str | Path) -> tuple[int, int]:
    """Return (sample_rate, n_frames) without decoding the audio."""
    sr, data = _open(path)
    return sr, data.shape[0]


def read_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a whole file as float32 mono. Returns (samples, sample_rate)."""
    sr, data = _open(path)
    return _to_float_mono(np.asarray(data)), sr


def read_wav_window(path: str | Path, start: int, length: int) -> tuple[np.ndarray, int]:
    """Read ``length`` samples starting at frame ``start`` as float32 mono."""
    sr, data = _open(path)
    if start < 0 or start + length > data.shape[0]:
        raise DataError(
            f"window [{start}, {start + length}) out of range for {path} "
            f"({data.shape[0]} frames)"
        )
    return _to_float_mono(np.asarray(data[start : start + length])), sr


def write_wav(path: str | Path, samples: np.ndarray, sample_rate: int, bits: int = 16) -> None:
    """Write mono float samples as PCM WAV (16-bit default, or 32-bit float)."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    x = np.asarray(samples, dtype=np.float64)
    if bits == 16:
        scaled = np.clip(np.round(x * 2.0**15), -(2.0**15), 2.0**15 - 1)
        wavfile.write(str(p), sample_rate, scaled.astype(np.int16))
    elif bits == 32:
        wavfile.write(str(p), sample_rate, x.astype(np.float32))
    else:
        raise DataError(f"unsupported bit depth {bits}")
