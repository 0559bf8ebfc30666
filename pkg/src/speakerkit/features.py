"""Hybrid wavelet-MFCC features.

The signal is decomposed with the db8 filter bank at level 3, the cepstral
pipeline runs over each retained channel's coefficient sequence (treated as a
time series at its decimated rate, so a shared MfccConfig's fmax_hz=None
resolves against each channel's own Nyquist), the per-channel frame sequences
are truncated to the shortest channel's frame count, and the frames are
concatenated [CA3, CD3, CD2, CD1] into one vector per frame.

A reconstruction-based alternative (use_reconstruction=True) instead rebuilds
each channel alone at the full rate and runs the pipeline there; kept for
comparison, off by default.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dwt import (
    WaveletDecomposition,
    _parse_channel_name,
    make_db8_filters,
    wavedec,
    waverec,
)
from .errors import BadParams, SignalTooShort
from .mfcc import FeatureSequence, MfccConfig, extract_mfcc

_FILTERS = make_db8_filters()


def default_channels(level: int) -> tuple:
    return (f"CA{level}",) + tuple(f"CD{d}" for d in range(level, 0, -1))


@dataclass
class HybridConfig:
    """Wavelet front-end knobs; the cepstral knobs ride along in ``mfcc``."""

    dwt_level: int = 3
    channels: tuple = None
    use_reconstruction: bool = False
    mfcc: MfccConfig = field(default_factory=MfccConfig)

    def __post_init__(self):
        if self.channels is None:
            self.channels = default_channels(self.dwt_level)
        self.channels = tuple(self.channels)
        self.validate()

    def validate(self) -> None:
        if self.dwt_level < 1:
            raise BadParams("dwt_level must be >= 1")
        if not self.channels:
            raise BadParams("need at least one channel")
        if len(set(self.channels)) != len(self.channels):
            raise BadParams("duplicate channel names")
        for name in self.channels:
            kind, depth = _parse_channel_name(name)
            if kind == "CA" and depth != self.dwt_level:
                raise BadParams(f"{name} inconsistent with level {self.dwt_level}")
            if kind == "CD" and not 1 <= depth <= self.dwt_level:
                raise BadParams(f"{name} outside levels 1..{self.dwt_level}")
        self.mfcc.validate()


def _isolated_channel(decomp: WaveletDecomposition, name: str) -> np.ndarray:
    """Reconstruct the full-rate signal carried by one channel alone."""
    lone = WaveletDecomposition(
        level=decomp.level,
        approx=np.zeros_like(decomp.approx),
        details=[np.zeros_like(d) for d in decomp.details],
        source_lengths=list(decomp.source_lengths),
        mode=decomp.mode,
    )
    kind, depth = _parse_channel_name(name)
    if kind == "CA":
        lone.approx = decomp.approx.copy()
    else:
        lone.details[decomp.level - depth] = decomp.channel(name).copy()
    return waverec(lone, _FILTERS)


def extract_wavelet_mfcc(samples, sample_rate_hz: float,
                         config: HybridConfig = None) -> FeatureSequence:
    """Hybrid features for one signal.

    Returns:
        FeatureSequence of kind "wavelet_mfcc" with dim =
        len(channels) * per-channel dim, truncated to the shortest channel.
    """
    cfg = config if config is not None else HybridConfig()
    cfg.validate()
    decomp = wavedec(np.asarray(samples, dtype=np.float64), _FILTERS, cfg.dwt_level)
    blocks = []
    for name in cfg.channels:
        _, depth = _parse_channel_name(name)
        if cfg.use_reconstruction:
            series = _isolated_channel(decomp, name)
            rate = float(sample_rate_hz)
        else:
            series = decomp.channel(name)
            rate = sample_rate_hz / 2.0 ** depth
        try:
            blocks.append(extract_mfcc(series, rate, cfg.mfcc).vectors)
        except SignalTooShort as exc:
            raise SignalTooShort(f"channel {name}: {exc}") from exc
    n_frames = min(len(b) for b in blocks)
    vectors = np.hstack([b[:n_frames] for b in blocks])
    meta = {
        "frame_len": cfg.mfcc.frame_len,
        "hop": cfg.mfcc.hop,
        "sample_rate_hz": float(sample_rate_hz),
        "channels": list(cfg.channels),
    }
    return FeatureSequence(vectors, "wavelet_mfcc", meta)
