"""Dataclass configs for every stage, plus JSON loading with strict key checking.

A run is described by a single JSON file with one section per subsystem
(frontend / data / model / train / eval / analysis). Unknown keys are
rejected so a typo never silently falls back to a default. The resolved
config is snapshotted into the output directory of every command.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigurationError

DEFAULT_LABELS = ("bass", "drums", "vocals", "other")

MAJOR_KEYS = ("C", "Db", "D", "Eb", "E", "F", "Gb", "G", "Ab", "A", "Bb", "B")


@dataclass
class FrontendConfig:
    sample_rate: int = 16000
    n_mels: int = 80
    window_seconds: float = 0.025
    hop_seconds: float = 0.010
    fmin_hz: float = 0.0
    fmax_hz: float | None = None  # None -> Nyquist
    power_floor: float = 1e-10
    standardize: bool = True
    std_floor: float = 1e-5
    patch_f: int = 16
    patch_t: int = 16

    def validate(self) -> None:
        if self.sample_rate <= 0:
            raise ConfigurationError("sample_rate must be positive")
        if self.n_mels % self.patch_f != 0:
            raise ConfigurationError(
                f"n_mels={self.n_mels} not divisible by patch_f={self.patch_f}"
            )
        if self.hop_seconds <= 0 or self.window_seconds <= 0:
            raise ConfigurationError("window/hop must be positive")


@dataclass
class SynthSpec:
    n_tracks: int = 10
    duration_seconds: float = 30.0
    tempo_min: float = 70.0
    tempo_max: float = 140.0
    keys: tuple[str, ...] = MAJOR_KEYS
    sample_rate: int = 16000

    def validate(self) -> None:
        if self.n_tracks <= 0:
            raise ConfigurationError("synth.n_tracks must be >= 1")
        if self.duration_seconds <= 0:
            raise ConfigurationError("synth.duration_seconds must be positive")
        if not self.keys:
            raise ConfigurationError("synth.keys must be non-empty")
        if not (0 < self.tempo_min <= self.tempo_max):
            raise ConfigurationError("invalid tempo range")


@dataclass
class DataConfig:
    manifest: str | None = None
    layout: str = "manifest"  # "manifest" | "musdb"
    chunk_seconds: float = 8.0
    activity_threshold_db: float = -50.0
    activity_window_seconds: float = 0.5
    resample_retries: int = 10
    labels: tuple[str, ...] = DEFAULT_LABELS
    synth: SynthSpec = field(default_factory=SynthSpec)

    def validate(self) -> None:
        if self.layout not in ("manifest", "musdb"):
            raise ConfigurationError(f"unknown corpus layout {self.layout!r}")
        if self.chunk_seconds <= 0:
            raise ConfigurationError("chunk_seconds must be positive")
        if len(set(self.labels)) != len(self.labels) or not self.labels:
            raise ConfigurationError("labels must be non-empty and unique")
        self.synth.validate()


# Desk-scale "tiny" for real CPU training; "base" matches ViT-Base shapes.
PRESETS = {
    "tiny": dict(depth=4, dim=64, heads=4),
    "base": dict(depth=12, dim=768, heads=12),
}


@dataclass
class ModelConfig:
    depth: int = 4
    dim: int = 64
    heads: int = 4
    mlp_ratio: float = 4.0
    pos_encoding: str = "learned_absolute"
    max_time_patches: int = 50
    predictor: str = "mlp_cond"  # mlp_cond | mlp_uncond | transformer
    predictor_hidden: int = 1024
    predictor_layers: int = 6
    predictor_depth: int = 2  # transformer variant only
    predictor_heads: int = 4  # transformer variant only
    instrument_dim: int = 128

    @classmethod
    def from_preset(cls, name: str, **overrides: Any) -> "ModelConfig":
        if name not in PRESETS:
            raise ConfigurationError(f"unknown model preset {name!r}")
        kwargs = dict(PRESETS[name])
        kwargs.update(overrides)
        return cls(**kwargs)

    def validate(self) -> None:
        if self.dim % self.heads != 0:
            raise ConfigurationError(f"dim={self.dim} not divisible by heads={self.heads}")
        if self.predictor not in ("mlp_cond", "mlp_uncond", "transformer"):
            raise ConfigurationError(f"unknown predictor kind {self.predictor!r}")
        if self.pos_encoding != "learned_absolute":
            raise ConfigurationError(f"unknown positional encoding {self.pos_encoding!r}")
        if self.predictor_layers < 2:
            raise ConfigurationError("predictor_layers must be >= 2")


@dataclass
class TrainConfig:
    total_steps: int = 5000
    batch_size: int = 32
    base_lr: float = 3e-4
    warmup_steps: int = 500
    tau0: float = 0.996
    tauT: float = 1.0
    weight_decay: float = 0.05
    betas: tuple[float, float] = (0.9, 0.95)
    clip_norm: float = 3.0
    checkpoint_every: int = 1000
    log_every: int = 1
    collapse_std: float = 1e-3
    abort_on_collapse: bool = True

    def validate(self) -> None:
        if not (0 <= self.tau0 <= self.tauT <= 1):
            raise ConfigurationError("need 0 <= tau0 <= tauT <= 1")
        if not (0 < self.warmup_steps < self.total_steps):
            raise ConfigurationError("need 0 < warmup_steps < total_steps")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")


@dataclass
class EvalConfig:
    pooling: str = "mean"  # "mean" (d-dim) | "freq_concat" (F_p*d-dim)
    metric: str = "cosine"
    recall_ks: tuple[int, ...] = (1, 5, 10)
    batch_windows: int = 64

    def validate(self) -> None:
        if self.pooling not in ("mean", "freq_concat"):
            raise ConfigurationError(f"unknown pooling {self.pooling!r}")
        if self.metric != "cosine":
            raise ConfigurationError(f"unknown metric {self.metric!r}")
        if any(k < 1 for k in self.recall_ks):
            raise ConfigurationError("recall_ks must be >= 1")


@dataclass
class AnalysisConfig:
    kmeans_k: int = 32
    kmeans_restarts: int = 10
    kmeans_max_iter: int = 100
    probe_hidden: int = 512
    probe_batch: int = 256
    probe_lr: float = 1e-3
    probe_max_epochs: int = 200
    probe_patience: int = 10

    def validate(self) -> None:
        if self.kmeans_k < 1:
            raise ConfigurationError("kmeans_k must be >= 1")
        if self.probe_hidden < 1:
            raise ConfigurationError("probe_hidden must be >= 1")


@dataclass
class RunConfig:
    seed: int = 0
    output_dir: str = "runs/default"
    frontend: FrontendConfig = field(default_factory=FrontendConfig)
    data: DataConfig = field(default_factory=DataConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def validate(self) -> "RunConfig":
        self.frontend.validate()
        self.data.validate()
        self.model.validate()
        self.train.validate()
        self.eval.validate()
        self.analysis.validate()
        return self


def _from_dict(cls: type, raw: dict[str, Any], path: str) -> Any:
    """Build a dataclass from a plain dict, rejecting unknown keys."""
    if cls is ModelConfig and "preset" in raw:
        # Preset supplies defaults; explicit keys in the same table win.
        raw = dict(raw)
        name = raw.pop("preset")
        if name not in PRESETS:
            raise ConfigurationError(f"unknown model preset {name!r}")
        raw = {**PRESETS[name], **raw}
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(raw) - set(fields)
    if unknown:
        where = path or cls.__name__
        raise ConfigurationError(f"unknown config key(s) in {where}: {sorted(unknown)}")
    kwargs: dict[str, Any] = {}
    for name, value in raw.items():
        if isinstance(value, dict):
            nested = _NESTED.get((cls, name))
            if nested is None:
                raise ConfigurationError(f"{path}.{name} does not take a table")
            value = _from_dict(nested, value, f"{path}.{name}" if path else name)
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[name] = value
    return cls(**kwargs)


_NESTED = {
    (DataConfig, "synth"): SynthSpec,
    (RunConfig, "frontend"): FrontendConfig,
    (RunConfig, "data"): DataConfig,
    (RunConfig, "model"): ModelConfig,
    (RunConfig, "train"): TrainConfig,
    (RunConfig, "eval"): EvalConfig,
    (RunConfig, "analysis"): AnalysisConfig,
}


def config_from_dict(raw: dict[str, Any]) -> RunConfig:
    cfg = _from_dict(RunConfig, raw, "")
    return cfg.validate()


def load_config(path: str | Path, overrides: list[str] | None = None) -> RunConfig:
    """Load a JSON run config, apply ``section.key=value`` overrides, validate."""
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {p} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError("config root must be a JSON object")
    apply_overrides(raw, overrides or [])
    return config_from_dict(raw)


def apply_overrides(raw: dict[str, Any], overrides: list[str]) -> None:
    """Apply dotted-path overrides in place; values parsed as JSON, else string."""
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} must look like section.key=value")
        dotted, text = item.split("=", 1)
        keys = dotted.split(".")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = raw
        for key in keys[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ConfigurationError(f"override path {dotted!r} crosses a non-table value")
        node[keys[-1]] = value


def config_to_dict(cfg: RunConfig) -> dict[str, Any]:
    return dataclasses.asdict(cfg)


def snapshot_config(cfg: RunConfig, out_dir: str | Path) -> Path:
    """Write the resolved config as sorted JSON; rerunning it reproduces the run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "config.json"
    path.write_text(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n")
    return path
