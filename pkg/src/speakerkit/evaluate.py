"""Noise-robustness evaluation: {mfcc, wavelet_mfcc} x {clean, noisy}.

Models (or templates) are trained on clean utterances only; the noisy
condition perturbs test utterances with seeded AWGN at the configured SNR.
The report is canonical JSON (sorted keys, no timestamps), so identical
config + seeds reproduce it byte for byte. Recognition rates from the
original study of this protocol, measured on its private 30-speaker corpus,
are embedded under benchmark_reference for side-by-side reading; they are
labels, not assertions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .audio import AudioClip, inject_noise
from .config import PipelineConfig, config_hash
from .corpus import Corpus
from .dtw import dtw_classify
from .errors import BadParams, MalformedFile, SpeakerKitError
from .features import extract_wavelet_mfcc
from .hmm import identify, train_speaker_model
from .mfcc import FeatureSequence, extract_mfcc

FEATURE_KINDS = ("mfcc", "wavelet_mfcc")
CONDITIONS = ("clean", "noisy")
BACKENDS = ("hmm", "dtw")

# Rates (percent) reported by the original 30-speaker study; None = unreported.
_BENCHMARK = {
    "hmm": {
        "clean": {"mfcc": 98.7, "wavelet_mfcc": 99.3},
        "noisy": {"mfcc": 93.3, "wavelet_mfcc": 97.3},
    },
    "dtw": {
        "clean": {"mfcc": 98.0, "wavelet_mfcc": 98.6},
        "noisy": None,
    },
}


def extract_features(clip: AudioClip, kind: str, config: PipelineConfig) -> FeatureSequence:
    """Dispatch to the configured extractor for one feature kind."""
    if kind == "mfcc":
        return extract_mfcc(clip.samples, clip.sample_rate_hz, config.mfcc)
    if kind == "wavelet_mfcc":
        return extract_wavelet_mfcc(clip.samples, clip.sample_rate_hz, config.hybrid)
    raise BadParams(f"unknown feature kind {kind!r}")


def derive_seed(*key) -> int:
    """Stable sub-seed from a tuple of small integers."""
    return int(np.random.SeedSequence(list(key)).generate_state(1)[0])


@dataclass
class EvalReport:
    """The machine-readable result of one run_experiment call."""

    data: dict

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    def cell(self, feature_kind: str, condition: str) -> dict:
        for c in self.data["conditions"]:
            if c["feature_kind"] == feature_kind and c["condition"] == condition:
                return c
        raise KeyError((feature_kind, condition))

    def validate(self) -> None:
        """Schema check: four cells, sane rates, confusion bookkeeping."""
        d = self.data
        for key in ("format", "schema_version", "backend", "seed", "config",
                    "config_hash", "corpus", "conditions", "benchmark_reference"):
            if key not in d:
                raise MalformedFile(f"report missing key {key!r}")
        if d["format"] != "speakerkit-eval-report" or d["schema_version"] != 1:
            raise MalformedFile("unknown report format or version")
        seen = set()
        for cell in d["conditions"]:
            seen.add((cell["feature_kind"], cell["condition"]))
            if not 0.0 <= cell["recognition_rate"] <= 1.0:
                raise MalformedFile("recognition_rate outside [0, 1]")
            if cell["n_total"] != cell["n_correct"] + cell["n_wrong"]:
                raise MalformedFile("cell counts do not add up")
            if not cell["failures"]:
                for speaker, row in cell["confusion"].items():
                    expect = cell["n_total"] // len(cell["confusion"])
                    if sum(row.values()) != expect:
                        raise MalformedFile(
                            f"confusion row {speaker} sums to {sum(row.values())}, "
                            f"expected {expect}")
        if seen != {(k, c) for k in FEATURE_KINDS for c in CONDITIONS}:
            raise MalformedFile(f"expected exactly 4 kind x condition cells, got {seen}")


def _rank_dtw(scored) -> list:
    best = {}
    for speaker, dist in scored:
        if speaker not in best or dist < best[speaker]:
            best[speaker] = dist
    return sorted(best.items(), key=lambda kv: (kv[1], kv[0]))


def run_experiment(corpus: Corpus, config: PipelineConfig = None, seed: int = 0,
                   backend: str = "hmm") -> EvalReport:
    """Train on the clean split, score all four kind x condition cells.

    Per-utterance classification errors are recorded under the cell's
    "failures" (and count as wrong), never raised.
    """
    cfg = config if config is not None else PipelineConfig()
    if backend not in BACKENDS:
        raise BadParams(f"backend must be one of {BACKENDS}")
    chash = config_hash(cfg)
    cells = []
    for kind_i, kind in enumerate(FEATURE_KINDS):
        train_feats = {
            speaker: [extract_features(corpus.get(speaker, u), kind, cfg)
                      for u in corpus.train_idx[speaker]]
            for speaker in corpus.speakers
        }
        if backend == "hmm":
            models = []
            for spk_i, speaker in enumerate(corpus.speakers):
                model, _ = train_speaker_model(
                    speaker, train_feats[speaker], kind, cfg.hmm,
                    seed=derive_seed(seed, kind_i, spk_i, 1), config_hash=chash)
                models.append(model)
        else:
            templates = [(speaker, feat)
                         for speaker in corpus.speakers
                         for feat in train_feats[speaker]]
        for cond_i, condition in enumerate(CONDITIONS):
            confusion = {s: {} for s in corpus.speakers}
            per_utt = []
            failures = []
            n_correct = 0
            n_total = 0
            clipped = 0
            for spk_i, speaker in enumerate(corpus.speakers):
                for u in corpus.test_idx[speaker]:
                    clip = corpus.get(speaker, u)
                    n_total += 1
                    if condition == "noisy":
                        clip, n_clip = inject_noise(
                            clip, cfg.noise.snr_db,
                            derive_seed(seed, kind_i, spk_i, u, 2))
                        clipped += n_clip
                    try:
                        feats = extract_features(clip, kind, cfg)
                        if backend == "hmm":
                            predicted, ranked = identify(
                                feats, models, cfg.hmm.final_state_only)
                        else:
                            predicted, scored = dtw_classify(
                                feats, templates, cfg.dtw.normalize)
                            ranked = _rank_dtw(scored)
                    except SpeakerKitError as exc:
                        failures.append({"speaker": speaker, "utterance": u,
                                         "error": str(exc)})
                        continue
                    correct = predicted == speaker
                    n_correct += int(correct)
                    confusion[speaker][predicted] = \
                        confusion[speaker].get(predicted, 0) + 1
                    per_utt.append({
                        "speaker": speaker,
                        "utterance": u,
                        "predicted": predicted,
                        "correct": bool(correct),
                        "scores": [[s, float(v)] for s, v in ranked],
                    })
            cells.append({
                "feature_kind": kind,
                "condition": condition,
                "snr_db": float(cfg.noise.snr_db) if condition == "noisy" else None,
                "recognition_rate": n_correct / n_total,
                "n_correct": n_correct,
                "n_wrong": n_total - n_correct,
                "n_total": n_total,
                "clipped_samples": clipped,
                "confusion": confusion,
                "per_utterance": per_utt,
                "failures": failures,
            })
    report = EvalReport({
        "format": "speakerkit-eval-report",
        "schema_version": 1,
        "backend": backend,
        "seed": seed,
        "config": cfg.to_dict(),
        "config_hash": chash,
        "corpus": {
            "n_speakers": len(corpus.speakers),
            "speakers": list(corpus.speakers),
            "train_per_speaker": len(corpus.train_idx[corpus.speakers[0]]),
            "test_per_speaker": len(corpus.test_idx[corpus.speakers[0]]),
            "sample_rate_hz": corpus.sample_rate_hz,
            "seed": corpus.seed,
        },
        "benchmark_reference": {
            "note": ("percent recognition rates reported by the original study "
                     "of this protocol on its private 30-speaker corpus; shown "
                     "for comparison, not reproduced here"),
            "rates": _BENCHMARK[backend],
        },
    })
    report.data["conditions"] = cells
    report.validate()
    return report


def render_table(report: EvalReport) -> str:
    """Human-readable summary of the four cells with the reference rates."""
    ref = report.data["benchmark_reference"]["rates"]
    lines = [
        f"backend: {report.data['backend']}    seed: {report.data['seed']}    "
        f"config: {report.data['config_hash']}",
        f"{'condition':<12} {'features':<14} {'rate':>8} {'reference':>10}",
    ]
    for cell in report.data["conditions"]:
        cond = cell["condition"]
        if cond == "noisy":
            cond = f"noisy {cell['snr_db']:g} dB"
        bench = ref.get(cell["condition"]) if isinstance(ref, dict) else None
        bench_txt = "-"
        if bench:
            value = bench.get(cell["feature_kind"])
            if value is not None:
                bench_txt = f"{value:.1f}%"
        lines.append(f"{cond:<12} {cell['feature_kind']:<14} "
                     f"{100.0 * cell['recognition_rate']:7.1f}% {bench_txt:>10}")
    return "\n".join(lines)
