"""Deterministic synthetic multitrack corpus.

Every track gets one key and one tempo shared by four stems:

* bass   - decaying sine pulses on the beat, pitched at the bar's chord root
* drums  - lowpassed noise kicks on beats plus highpassed hat bursts on eighths
* vocals - vibrato melody random-walking over the scale, one note per beat
* other  - sustained triad pad following a per-bar chord progression

Chords are drawn per bar from {I, IV, V, vi}, so every stem carries
time-local harmonic information while the key/tempo identify the track.
Output is 16-bit PCM WAV plus a corpus manifest, bit-reproducible from
(spec, seed).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from ..config import SynthSpec
from ..errors import DataError
from .audio_io import write_wav
from .corpus import write_manifest

MAJOR_SCALE = (0, 2, 4, 5, 7, 9, 11)
CHORD_DEGREES = (0, 3, 4, 5)  # I, IV, V, vi
PITCH_CLASS = {
    "C": 0, "Db": 1, "D": 2, "Eb": 3, "E": 4, "F": 5,
    "Gb": 6, "G": 7, "Ab": 8, "A": 9, "Bb": 10, "B": 11,
}
BEATS_PER_BAR = 4


def midi_to_hz(midi: np.ndarray | float) -> np.ndarray | float:
    return 440.0 * 2.0 ** ((np.asarray(midi, dtype=np.float64) - 69.0) / 12.0)


def chord_semitones(degree: int) -> list[int]:
    """Stacked-thirds triad on the given scale degree, in semitones from the root."""
    return [
        MAJOR_SCALE[(degree + k) % 7] + 12 * ((degree + k) // 7)
        for k in (0, 2, 4)
    ]


def _ramp_envelope(t_in: np.ndarray, seg_len: float, ramp: float) -> np.ndarray:
    """Trapezoid: linear attack/release of ``ramp`` seconds inside each segment."""
    up = np.clip(t_in / ramp, 0.0, 1.0)
    down = np.clip((seg_len - t_in) / ramp, 0.0, 1.0)
    return np.minimum(up, down)


def _piecewise_tone(freqs_per_seg: np.ndarray, seg_idx: np.ndarray, sr: int) -> np.ndarray:
    """Sine with piecewise-constant frequency, phase-continuous across segments."""
    freq = freqs_per_seg[seg_idx]
    phase = 2.0 * np.pi * np.cumsum(freq) / sr
    return np.sin(phase)


def _synth_bass(t: np.ndarray, sr: int, beat_len: float, bar_of: np.ndarray,
                chord_roots_midi: np.ndarray) -> np.ndarray:
    t_in_beat = t % beat_len
    tone = _piecewise_tone(midi_to_hz(chord_roots_midi - 24.0), bar_of, sr)
    env = np.exp(-t_in_beat / 0.15) * _ramp_envelope(t_in_beat, beat_len, 0.005)
    return 0.40 * tone * env


def _synth_drums(t: np.ndarray, sr: int, beat_len: float, rng: np.random.Generator) -> np.ndarray:
    noise = rng.standard_normal(len(t))
    a = 0.05  # one-pole lowpass coefficient
    low = lfilter([a], [1.0, -(1.0 - a)], noise)
    high = noise - low

    t_in_beat = t % beat_len
    kick_env = np.exp(-t_in_beat / 0.02) * (t_in_beat < 0.06)
    eighth = beat_len / 2.0
    t_in_eighth = t % eighth
    hat_env = np.exp(-t_in_eighth / 0.008) * (t_in_eighth < 0.03)
    return 2.2 * low * kick_env + 0.18 * high * hat_env


def _synth_vocals(t: np.ndarray, sr: int, beat_len: float, beat_of: np.ndarray,
                  note_midi_per_beat: np.ndarray) -> np.ndarray:
    freq = midi_to_hz(note_midi_per_beat)[beat_of]
    vibrato = 0.03 * np.sin(2.0 * np.pi * 6.0 * t)  # ~50 cents at 6 Hz
    phase = 2.0 * np.pi * np.cumsum(freq * (1.0 + vibrato)) / sr
    t_in_beat = t % beat_len
    env = _ramp_envelope(t_in_beat, beat_len, 0.010)
    return 0.35 * np.sin(phase) * env


def _synth_pad(t: np.ndarray, sr: int, bar_len: float, bar_of: np.ndarray,
               chord_midi: np.ndarray) -> np.ndarray:
    t_in_bar = t % bar_len
    env = _ramp_envelope(t_in_bar, bar_len, 0.020)
    out = np.zeros(len(t))
    for voice in range(chord_midi.shape[1]):
        out += _piecewise_tone(midi_to_hz(chord_midi[:, voice]), bar_of, sr)
    return 0.13 * out * env


def synth_track(spec: SynthSpec, seed: int, track_index: int) -> tuple[dict[str, np.ndarray], dict]:
    """Render the four stems for one track. Returns (stems, metadata)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, track_index]))
    key = spec.keys[int(rng.integers(0, len(spec.keys)))]
    tempo = float(rng.uniform(spec.tempo_min, spec.tempo_max))
    sr = spec.sample_rate
    n = int(round(spec.duration_seconds * sr))
    t = np.arange(n) / sr

    beat_len = 60.0 / tempo
    bar_len = BEATS_PER_BAR * beat_len
    n_beats = int(np.ceil(spec.duration_seconds / beat_len))
    n_bars = int(np.ceil(spec.duration_seconds / bar_len))
    beat_of = np.minimum((t / beat_len).astype(np.int64), n_beats - 1)
    bar_of = np.minimum((t / bar_len).astype(np.int64), n_bars - 1)

    pc = PITCH_CLASS[key]
    degrees = rng.integers(0, len(CHORD_DEGREES), size=n_bars)
    chords = np.array([chord_semitones(CHORD_DEGREES[d]) for d in degrees])  # [n_bars, 3]
    chord_midi = 60.0 + pc + chords
    chord_roots = 60.0 + pc + chords[:, 0]

    # melody: random walk over two octaves of the scale, one note per beat
    walk_pos = np.empty(n_beats, dtype=np.int64)
    pos = 7
    for b in range(n_beats):
        pos = int(np.clip(pos + rng.integers(-2, 3), 0, 13))
        walk_pos[b] = pos
    note_midi = 72.0 + pc + np.array(
        [MAJOR_SCALE[p % 7] + 12 * (p // 7) for p in walk_pos], dtype=np.float64
    )

    stems = {
        "bass": _synth_bass(t, sr, beat_len, bar_of, chord_roots),
        "drums": _synth_drums(t, sr, beat_len, rng),
        "vocals": _synth_vocals(t, sr, beat_len, beat_of, note_midi),
        "other": _synth_pad(t, sr, bar_len, bar_of, chord_midi),
    }
    stems = {k: np.clip(v, -0.95, 0.95).astype(np.float32) for k, v in stems.items()}
    meta = {"key": key, "tempo": round(tempo, 3)}
    return stems, meta


def generate_synthetic_corpus(
    spec: SynthSpec, seed: int, out_dir: str | Path, force: bool = False
) -> Path:
    """Write the corpus under ``out_dir`` and return the manifest path."""
    spec.validate()
    out = Path(out_dir)
    if out.exists() and any(out.iterdir()) and not force:
        raise DataError(f"output directory {out} is not empty (use force to overwrite)")
    out.mkdir(parents=True, exist_ok=True)

    tracks: dict[str, dict[str, str]] = {}
    track_meta: dict[str, dict] = {}
    for i in range(spec.n_tracks):
        track_id = f"track_{i:04d}"
        stems, meta = synth_track(spec, seed, i)
        rels = {}
        for label, samples in stems.items():
            rel = f"{track_id}/{label}.wav"
            write_wav(out / rel, samples, spec.sample_rate, bits=16)
            rels[label] = rel
        tracks[track_id] = rels
        track_meta[track_id] = meta

    manifest = write_manifest(out / "manifest.json", spec.sample_rate, tracks)
    import json

    (out / "tracks_meta.json").write_text(
        json.dumps(track_meta, indent=2, sort_keys=True) + "\n"
    )
    return manifest
