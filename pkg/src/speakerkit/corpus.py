"""Synthetic speaker corpus and on-disk corpus layout.

Voices are source-filter: an impulse train at a per-speaker fundamental is
shaped by two or three per-speaker resonators. Base fundamentals sit on an
even grid over [90, 280] Hz so any two speakers are more than 5 Hz apart;
each utterance jitters pitch (+/-3%), duration (+/-10%), and amplitude
(+/-20%). Everything derives from numpy's seeded PCG64 generators keyed by
(seed, speaker, utterance), so one seed pins the corpus bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .audio import AudioClip, load_wav, write_wav
from .errors import BadParams, MalformedFile, UnsupportedFormat

_F0_LO, _F0_HI = 90.0, 280.0
_MIN_F0_GAP = 5.0
_BASE_DURATION_S = 1.6
_BASE_AMPLITUDE = 0.25
_FADE_S = 0.05


@dataclass
class Corpus:
    """Per-speaker utterances plus a train/test split."""

    sample_rate_hz: int
    speakers: list
    clips: dict  # (speaker_id, utt_index) -> AudioClip
    train_idx: dict  # speaker_id -> list of utterance indices
    test_idx: dict
    seed: int | None = None

    def get(self, speaker: str, utt: int) -> AudioClip:
        return self.clips[(speaker, utt)]

    @property
    def n_utts(self) -> int:
        return len(self.train_idx[self.speakers[0]]) + len(self.test_idx[self.speakers[0]])


def default_split(n_utts: int) -> tuple:
    """(train, test) index lists; 15 utterances split 10/5."""
    if n_utts < 2:
        raise BadParams("need at least 2 utterances per speaker to split")
    n_test = max(1, n_utts // 3)
    return list(range(n_utts - n_test)), list(range(n_utts - n_test, n_utts))


def _speaker_voice(idx: int, n_speakers: int, rng: np.random.Generator):
    f0 = _F0_LO + idx * (_F0_HI - _F0_LO) / (n_speakers - 1)
    n_formants = int(rng.integers(2, 4))
    bands = [(300.0, 900.0, 60.0, 120.0),
             (1000.0, 2200.0, 80.0, 160.0),
             (2400.0, 3400.0, 100.0, 200.0)]
    formants = []
    for lo, hi, bw_lo, bw_hi in bands[:n_formants]:
        formants.append((float(rng.uniform(lo, hi)), float(rng.uniform(bw_lo, bw_hi))))
    return f0, formants


def _render_utterance(rate: int, f0: float, formants, rng: np.random.Generator) -> np.ndarray:
    f0_u = f0 * (1.0 + rng.uniform(-0.03, 0.03))
    duration = _BASE_DURATION_S * (1.0 + rng.uniform(-0.1, 0.1))
    amplitude = _BASE_AMPLITUDE * (1.0 + rng.uniform(-0.2, 0.2))
    n = int(round(duration * rate))
    x = np.zeros(n)
    period = rate / f0_u
    positions = np.round(np.arange(0.0, n, period)).astype(int)
    x[positions[positions < n]] = 1.0
    for freq, bw in formants:
        r = np.exp(-np.pi * bw / rate)
        a = np.array([1.0, -2.0 * r * np.cos(2.0 * np.pi * freq / rate), r * r])
        x = lfilter([1.0], a, x)
    fade = min(int(_FADE_S * rate), n // 2)
    envelope = np.ones(n)
    ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(fade) / fade)
    envelope[:fade] = ramp
    envelope[-fade:] = ramp[::-1]
    x *= envelope
    peak = np.abs(x).max()
    if peak > 0:
        x *= amplitude / peak
    return x


def synth_corpus(n_speakers: int = 10, n_utts: int = 15,
                 sample_rate_hz: int = 8000, seed: int = 0) -> Corpus:
    """Deterministic synthetic corpus of n_speakers x n_utts utterances."""
    if n_speakers < 2:
        raise BadParams("need at least 2 speakers")
    if sample_rate_hz < 1000:
        raise BadParams("sample rate below 1 kHz leaves no room for formants")
    grid_gap = (_F0_HI - _F0_LO) / (n_speakers - 1)
    if grid_gap <= _MIN_F0_GAP:
        raise BadParams(
            f"{n_speakers} speakers pack the [{_F0_LO:.0f}, {_F0_HI:.0f}] Hz "
            f"grid tighter than {_MIN_F0_GAP} Hz")
    train, test = default_split(n_utts)
    speakers = [f"spk{i:02d}" for i in range(n_speakers)]
    clips = {}
    for i, speaker in enumerate(speakers):
        voice_rng = np.random.default_rng([seed, i, 0, 1])
        f0, formants = _speaker_voice(i, n_speakers, voice_rng)
        for u in range(n_utts):
            utt_rng = np.random.default_rng([seed, i, u, 0])
            clips[(speaker, u)] = AudioClip(
                _render_utterance(sample_rate_hz, f0, formants, utt_rng),
                sample_rate_hz)
    return Corpus(sample_rate_hz, speakers,
                  clips,
                  {s: list(train) for s in speakers},
                  {s: list(test) for s in speakers},
                  seed)


def base_fundamentals(n_speakers: int) -> np.ndarray:
    """The speaker grid fundamentals, exposed for the spacing check."""
    return _F0_LO + np.arange(n_speakers) * (_F0_HI - _F0_LO) / (n_speakers - 1)


def save_corpus(corpus: Corpus, out_dir) -> Path:
    """Write WAVs plus a corpus.json manifest; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format": "speakerkit-corpus",
        "version": 1,
        "sample_rate_hz": corpus.sample_rate_hz,
        "seed": corpus.seed,
        "speakers": {},
    }
    for speaker in corpus.speakers:
        (out / speaker).mkdir(exist_ok=True)
        indices = sorted(corpus.train_idx[speaker] + corpus.test_idx[speaker])
        files = []
        for u in indices:
            rel = f"{speaker}/utt{u:02d}.wav"
            write_wav(out / rel, corpus.get(speaker, u))
            files.append(rel)
        manifest["speakers"][speaker] = {
            "files": files,
            "train": list(corpus.train_idx[speaker]),
            "test": list(corpus.test_idx[speaker]),
        }
    path = out / "corpus.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_corpus(corpus_dir) -> Corpus:
    """Read a directory written by save_corpus."""
    root = Path(corpus_dir)
    manifest_path = root / "corpus.json"
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise MalformedFile(f"missing corpus manifest {manifest_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"unparseable corpus manifest: {exc}") from exc
    if manifest.get("format") != "speakerkit-corpus":
        raise MalformedFile(f"{manifest_path}: not a corpus manifest")
    if manifest.get("version") != 1:
        raise UnsupportedFormat(f"{manifest_path}: unknown corpus version")
    try:
        rate = int(manifest["sample_rate_hz"])
        speakers = sorted(manifest["speakers"])
        clips = {}
        train_idx = {}
        test_idx = {}
        for speaker in speakers:
            entry = manifest["speakers"][speaker]
            indices = sorted(entry["train"]) + sorted(entry["test"])
            for u, rel in zip(sorted(indices), entry["files"]):
                clip = load_wav(root / rel)
                if clip.sample_rate_hz != rate:
                    raise MalformedFile(
                        f"{rel}: rate {clip.sample_rate_hz} != corpus rate {rate}")
                clips[(speaker, u)] = clip
            train_idx[speaker] = sorted(entry["train"])
            test_idx[speaker] = sorted(entry["test"])
    except (KeyError, TypeError) as exc:
        raise MalformedFile(f"{manifest_path}: incomplete manifest: {exc}") from exc
    return Corpus(rate, speakers, clips, train_idx, test_idx, manifest.get("seed"))
