"""Chunk cropping, silence detection, and context/target pair sampling.

A training pair is built from one multitrack chunk: one active stem becomes
the target, a uniformly-sized random subset of the other active stems is
summed into the context mix. Chunks with fewer than two active stems signal
``NeedsResample`` and the caller re-crops the same track.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..config import DataConfig
from ..errors import DataError, InputError
from ..frontend import AudioChunk
from .corpus import Corpus

log = logging.getLogger(__name__)


@dataclass
class StemChunk:
    audio: AudioChunk
    label: str


@dataclass
class MultiTrackChunk:
    stems: list[StemChunk]
    track_id: str
    offset: float  # seconds into the source track

    @property
    def sample_rate(self) -> int:
        return self.stems[0].audio.sample_rate


@dataclass
class ActivityMask:
    active: frozenset[int]  # indices into MultiTrackChunk.stems
    rms_db: np.ndarray  # [S, n_windows] windowed RMS in dBFS


@dataclass
class ContextTargetPair:
    context: AudioChunk
    target: AudioChunk
    target_label: str
    context_indices: tuple[int, ...]
    target_index: int


class NeedsResample:
    """Sentinel: fewer than two active stems, re-crop the same track."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NeedsResample"


NEEDS_RESAMPLE = NeedsResample()


def windowed_rms_db(x: np.ndarray, sample_rate: int, window_seconds: float = 0.5) -> np.ndarray:
    """RMS in dBFS over windows with 50% overlap; a tail window is anchored at the end."""
    n = len(x)
    win = max(int(round(window_seconds * sample_rate)), 1)
    if n <= win:
        starts = [0]
        win = n
    else:
        hop = max(win // 2, 1)
        starts = list(range(0, n - win + 1, hop))
        if starts[-1] + win < n:
            starts.append(n - win)
    sq = np.asarray(x, dtype=np.float64) ** 2
    rms = np.sqrt([sq[s : s + win].mean() for s in starts])
    return 20.0 * np.log10(np.maximum(rms, 1e-12))


def detect_active_stems(
    chunk: MultiTrackChunk,
    threshold_db: float = -50.0,
    window_seconds: float = 0.5,
) -> ActivityMask:
    """A stem is active iff its loudest window exceeds the threshold."""
    profiles = [
        windowed_rms_db(s.audio.samples, s.audio.sample_rate, window_seconds)
        for s in chunk.stems
    ]
    width = max(len(p) for p in profiles)
    rms_db = np.full((len(profiles), width), -np.inf)
    for i, p in enumerate(profiles):
        rms_db[i, : len(p)] = p
    active = frozenset(i for i, p in enumerate(profiles) if p.max() > threshold_db)
    return ActivityMask(active=active, rms_db=rms_db)


def mix_stems(stems: list[AudioChunk]) -> AudioChunk:
    """Element-wise sum. No gain normalization, no clipping."""
    if not stems:
        raise InputError("cannot mix zero stems")
    lengths = {len(s.samples) for s in stems}
    rates = {s.sample_rate for s in stems}
    if len(lengths) != 1 or len(rates) != 1:
        raise InputError(f"stems disagree on length ({lengths}) or rate ({rates})")
    total = np.sum([s.samples for s in stems], axis=0)
    return AudioChunk(samples=total.astype(np.float32), sample_rate=rates.pop())


def sample_context_target(
    chunk: MultiTrackChunk,
    mask: ActivityMask,
    rng: np.random.Generator,
) -> ContextTargetPair | NeedsResample:
    """Draw (target, context mix) from the active stems.

    Target uniform over the active set; the context size is uniform over
    {1, ..., |active| - 1} and the context itself a uniform subset of the
    remaining active stems of that size.
    """
    active = sorted(mask.active)
    if len(active) < 2:
        return NEEDS_RESAMPLE
    target_index = int(rng.choice(active))
    others = [i for i in active if i != target_index]
    size = int(rng.integers(1, len(others) + 1))
    context_indices = tuple(sorted(rng.choice(others, size=size, replace=False).tolist()))
    context = mix_stems([chunk.stems[i].audio for i in context_indices])
    return ContextTargetPair(
        context=context,
        target=chunk.stems[target_index].audio,
        target_label=chunk.stems[target_index].label,
        context_indices=context_indices,
        target_index=target_index,
    )


def crop_chunk(
    corpus: Corpus,
    track_id: str,
    duration: float,
    rng: np.random.Generator,
    offset: int | None = None,
) -> MultiTrackChunk:
    """Crop all stems of a track at one uniformly random sample offset."""
    info = corpus.track(track_id)
    n_chunk = int(round(duration * info.sample_rate))
    if info.n_samples < n_chunk:
        raise DataError(
            f"track {track_id!r} shorter ({info.n_samples}) than chunk ({n_chunk})"
        )
    if offset is None:
        offset = int(rng.integers(0, info.n_samples - n_chunk + 1))
    stems = [
        StemChunk(
            audio=AudioChunk(
                samples=corpus.read_stem_window(track_id, label, offset, n_chunk),
                sample_rate=info.sample_rate,
            ),
            label=label,
        )
        for label in info.labels
    ]
    return MultiTrackChunk(stems=stems, track_id=track_id, offset=offset / info.sample_rate)


class PairSampler:
    """Deterministic stream of training pairs.

    All randomness comes from one generator seeded with (seed, worker_id),
    so (corpus, seed, worker_id, step) fully determines the emitted pair.
    Tracks whose chunks keep failing the activity check are skipped for the
    step (logged) and another track is drawn.
    """

    def __init__(self, corpus: Corpus, cfg: DataConfig, seed: int, worker_id: int = 0):
        self.corpus = corpus
        self.cfg = cfg
        self.seed = seed
        self.worker_id = worker_id
        self.rng = np.random.default_rng(np.random.SeedSequence([seed, worker_id]))
        self.skip_events = 0
        self._usable = [
            tid
            for tid in corpus.track_ids
            if corpus.track(tid).n_samples >= int(round(cfg.chunk_seconds * corpus.sample_rate))
        ]
        if not self._usable:
            raise DataError("no track is at least one chunk long")

    def state(self) -> dict:
        return {"bit_generator": self.rng.bit_generator.state, "skip_events": self.skip_events}

    def set_state(self, state: dict) -> None:
        self.rng.bit_generator.state = state["bit_generator"]
        self.skip_events = int(state["skip_events"])

    def sample_pair(self) -> ContextTargetPair:
        attempts = max(len(self._usable), 10)
        for _ in range(attempts):
            track_id = self._usable[int(self.rng.integers(0, len(self._usable)))]
            for _retry in range(self.cfg.resample_retries):
                chunk = crop_chunk(self.corpus, track_id, self.cfg.chunk_seconds, self.rng)
                mask = detect_active_stems(
                    chunk, self.cfg.activity_threshold_db, self.cfg.activity_window_seconds
                )
                pair = sample_context_target(chunk, mask, self.rng)
                if not isinstance(pair, NeedsResample):
                    return pair
            self.skip_events += 1
            log.warning("track %s: no active pair after %d crops, skipping",
                        track_id, self.cfg.resample_retries)
        raise DataError("corpus yielded no usable chunk; is everything silent?")

    def sample_batch(self, size: int) -> list[ContextTargetPair]:
        return [self.sample_pair() for _ in range(size)]
