"""Multitrack corpora: manifest-based layout, MUSDB18-style directories, in-memory.

The manifest is a JSON file::

    {"version": 1, "sample_rate": 16000,
     "tracks": {"track_000": {"bass": "track_000/bass.wav", ...}, ...}}

Stem paths are relative to the manifest's directory. All stems of a track
must share sample rate and length.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError
from .audio_io import read_wav_window, wav_info

MANIFEST_VERSION = 1


@dataclass
class TrackInfo:
    track_id: str
    labels: tuple[str, ...]
    n_samples: int
    sample_rate: int


class Corpus:
    """Read-only random access to aligned stems. Safe to share across threads."""

    sample_rate: int

    @property
    def track_ids(self) -> list[str]:
        raise NotImplementedError

    def track(self, track_id: str) -> TrackInfo:
        raise NotImplementedError

    def read_stem_window(self, track_id: str, label: str, start: int, length: int) -> np.ndarray:
        raise NotImplementedError

    def read_stem(self, track_id: str, label: str) -> np.ndarray:
        info = self.track(track_id)
        return self.read_stem_window(track_id, label, 0, info.n_samples)

    def __len__(self) -> int:
        return len(self.track_ids)


class ManifestCorpus(Corpus):
    def __init__(self, manifest_path: str | Path):
        path = Path(manifest_path)
        if not path.exists():
            raise DataError(f"corpus manifest not found: {path}")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"manifest {path} is not valid JSON: {exc}") from exc
        if raw.get("version") != MANIFEST_VERSION:
            raise DataError(
                f"manifest version {raw.get('version')!r} unsupported (want {MANIFEST_VERSION})"
            )
        self.root = path.parent
        self.manifest_path = path
        self._paths: dict[str, dict[str, Path]] = {}
        self._info: dict[str, TrackInfo] = {}
        tracks = raw.get("tracks")
        if not isinstance(tracks, dict) or not tracks:
            raise DataError(f"manifest {path} lists no tracks")
        self.sample_rate = int(raw["sample_rate"])
        for track_id, stems in sorted(tracks.items()):
            if not isinstance(stems, dict) or not stems:
                raise DataError(f"track {track_id!r} has no stems")
            paths = {label: self.root / rel for label, rel in sorted(stems.items())}
            lengths, rates = set(), set()
            for label, p in paths.items():
                sr, n = wav_info(p)
                lengths.add(n)
                rates.add(sr)
            if len(lengths) != 1 or len(rates) != 1:
                raise DataError(f"track {track_id!r} stems disagree on length or sample rate")
            (n,) = lengths
            (sr,) = rates
            if sr != self.sample_rate:
                raise DataError(
                    f"track {track_id!r} sample rate {sr} != manifest {self.sample_rate}"
                )
            self._paths[track_id] = paths
            self._info[track_id] = TrackInfo(track_id, tuple(paths), n, sr)
        self._track_ids = sorted(self._paths)

    @property
    def track_ids(self) -> list[str]:
        return list(self._track_ids)

    def track(self, track_id: str) -> TrackInfo:
        try:
            return self._info[track_id]
        except KeyError:
            raise DataError(f"unknown track {track_id!r}") from None

    def read_stem_window(self, track_id: str, label: str, start: int, length: int) -> np.ndarray:
        paths = self._paths.get(track_id)
        if paths is None:
            raise DataError(f"unknown track {track_id!r}")
        if label not in paths:
            raise DataError(f"track {track_id!r} has no stem {label!r}")
        samples, _ = read_wav_window(paths[label], start, length)
        return samples


class InMemoryCorpus(Corpus):
    """Corpus backed by arrays, for tests and small experiments."""

    def __init__(self, tracks: dict[str, dict[str, np.ndarray]], sample_rate: int):
        if not tracks:
            raise DataError("empty corpus")
        self.sample_rate = sample_rate
        self._tracks = {}
        self._info = {}
        for track_id, stems in sorted(tracks.items()):
            stems = {label: np.asarray(x, dtype=np.float32) for label, x in sorted(stems.items())}
            lengths = {len(x) for x in stems.values()}
            if len(lengths) != 1:
                raise DataError(f"track {track_id!r} stems disagree on length")
            self._tracks[track_id] = stems
            self._info[track_id] = TrackInfo(track_id, tuple(stems), lengths.pop(), sample_rate)
        self._track_ids = sorted(self._tracks)

    @property
    def track_ids(self) -> list[str]:
        return list(self._track_ids)

    def track(self, track_id: str) -> TrackInfo:
        try:
            return self._info[track_id]
        except KeyError:
            raise DataError(f"unknown track {track_id!r}") from None

    def read_stem_window(self, track_id: str, label: str, start: int, length: int) -> np.ndarray:
        try:
            x = self._tracks[track_id][label]
        except KeyError:
            raise DataError(f"no stem ({track_id!r}, {label!r})") from None
        if start < 0 or start + length > len(x):
            raise DataError(f"window out of range for ({track_id!r}, {label!r})")
        return x[start : start + length]


def write_manifest(
    out_path: str | Path, sample_rate: int, tracks: dict[str, dict[str, str]]
) -> Path:
    """Write a corpus manifest; stem paths must be relative to the manifest dir."""
    path = Path(out_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"version": MANIFEST_VERSION, "sample_rate": sample_rate, "tracks": tracks}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def scan_musdb_layout(root: str | Path, labels: tuple[str, ...]) -> dict[str, dict[str, str]]:
    """Map a MUSDB18-style tree (one directory per track, ``<label>.wav`` stems).

    Returns a manifest-style tracks dict with paths relative to ``root``.
    """
    rootp = Path(root)
    if not rootp.is_dir():
        raise DataError(f"corpus root not found: {rootp}")
    tracks: dict[str, dict[str, str]] = {}
    for track_dir in sorted(p for p in rootp.iterdir() if p.is_dir()):
        stems = {
            label: str(Path(track_dir.name) / f"{label}.wav")
            for label in labels
            if (track_dir / f"{label}.wav").exists()
        }
        if stems:
            tracks[track_dir.name] = stems
    if not tracks:
        raise DataError(f"no tracks with stems {labels} under {rootp}")
    return tracks


def load_corpus(path: str | Path, layout: str = "manifest", labels: tuple[str, ...] = ()) -> Corpus:
    """Open a corpus given either a manifest file or a MUSDB-style directory."""
    p = Path(path)
    if layout == "manifest":
        if p.is_dir():
            p = p / "manifest.json"
        return ManifestCorpus(p)
    if layout == "musdb":
        tracks = scan_musdb_layout(p, labels)
        rates = set()
        for stems in tracks.values():
            for rel in stems.values():
                sr, _ = wav_info(p / rel)
                rates.add(sr)
        if len(rates) != 1:
            raise DataError(f"mixed sample rates in {p}: {sorted(rates)}")
        manifest = p / "manifest.json"
        write_manifest(manifest, rates.pop(), tracks)
        return ManifestCorpus(manifest)
    raise DataError(f"unknown corpus layout {layout!r}")
