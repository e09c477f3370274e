"""Corpus loading, context/target sampling, and synthetic corpus generation."""

from .audio_io import read_wav, read_wav_window, wav_info, write_wav
from .corpus import Corpus, InMemoryCorpus, ManifestCorpus, load_corpus, scan_musdb_layout, write_manifest
from .sampling import (
    ActivityMask,
    ContextTargetPair,
    MultiTrackChunk,
    NeedsResample,
    PairSampler,
    StemChunk,
    crop_chunk,
    detect_active_stems,
    mix_stems,
    sample_context_target,
)
from .synth import generate_synthetic_corpus

__all__ = [
    "ActivityMask",
    "ContextTargetPair",
    "Corpus",
    "InMemoryCorpus",
    "ManifestCorpus",
    "MultiTrackChunk",
    "NeedsResample",
    "PairSampler",
    "StemChunk",
    "crop_chunk",
    "detect_active_stems",
    "generate_synthetic_corpus",
    "load_corpus",
    "mix_stems",
    "read_wav",
    "read_wav_window",
    "sample_context_target",
    "scan_musdb_layout",
    "wav_info",
    "write_manifest",
    "write_wav",
]
