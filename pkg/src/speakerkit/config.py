"""Whole-pipeline configuration: one object covering every tunable decision.

Configs serialize to canonical JSON; the config hash embedded in feature
files, model files, and reports is the first 16 hex digits of the SHA-256 of
that canonical form.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from .errors import BadParams, MalformedFile
from .features import HybridConfig
from .mfcc import MfccConfig


@dataclass
class HmmTrainConfig:
    n_states: int = 4
    n_mix: int = 8
    max_jump: int = 1
    max_iters: int = 50
    tol: float = 1e-4
    var_floor_scale: float = 1e-3
    var_floor_abs: float = 1e-6
    self_loop_init: float = 0.8
    final_state_only: bool = False  # forward terminates on all states by default

    def __post_init__(self):
        if self.n_states < 1 or self.n_mix < 1:
            raise BadParams("n_states and n_mix must be >= 1")
        if self.max_jump < 1:
            raise BadParams("max_jump must be >= 1")
        if self.max_iters < 1:
            raise BadParams("max_iters must be >= 1")
        if self.tol < 0:
            raise BadParams("tol must be >= 0")
        if not 0.0 < self.self_loop_init <= 1.0:
            raise BadParams("self_loop_init must be in (0, 1]")
        if self.var_floor_scale < 0 or self.var_floor_abs <= 0:
            raise BadParams("variance floor parameters out of range")


@dataclass
class DtwConfig:
    normalize: bool = False  # divide the distance by path length when True


@dataclass
class NoiseConfig:
    snr_db: float = 20.0


@dataclass
class CorpusConfig:
    n_speakers: int = 10
    n_utts: int = 15
    sample_rate_hz: int = 8000


@dataclass
class PipelineConfig:
    """Every design knob in one serializable bundle."""

    sample_rate_hz: int = 8000
    mfcc: MfccConfig = field(default_factory=MfccConfig)
    hybrid: HybridConfig = field(default_factory=HybridConfig)
    hmm: HmmTrainConfig = field(default_factory=HmmTrainConfig)
    dtw: DtwConfig = field(default_factory=DtwConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    corpus: CorpusConfig = field(default_factory=CorpusConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        try:
            kwargs = dict(data)
            for key, sub in (("mfcc", MfccConfig), ("hmm", HmmTrainConfig),
                             ("dtw", DtwConfig), ("noise", NoiseConfig),
                             ("corpus", CorpusConfig)):
                if key in kwargs and isinstance(kwargs[key], dict):
                    kwargs[key] = sub(**kwargs[key])
            if "hybrid" in kwargs and isinstance(kwargs["hybrid"], dict):
                hyb = dict(kwargs["hybrid"])
                if isinstance(hyb.get("mfcc"), dict):
                    hyb["mfcc"] = MfccConfig(**hyb["mfcc"])
                if hyb.get("channels") is not None:
                    hyb["channels"] = tuple(hyb["channels"])
                kwargs["hybrid"] = HybridConfig(**hyb)
            return cls(**kwargs)
        except TypeError as exc:
            raise MalformedFile(f"bad config structure: {exc}") from exc

    def to_file(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise MalformedFile(f"cannot parse config {path}: {exc}") from exc
        return cls.from_dict(data)


def config_hash(config: PipelineConfig) -> str:
    canon = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
