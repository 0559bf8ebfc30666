"""WAV loading, framing, and additive white Gaussian noise.

Samples live in [-1, 1] as float64; the integer sample v of a 16-bit PCM file
maps to v / 32768. Noise draws come from numpy's PCG64 generator
(``standard_normal``, ziggurat method), so a seed pins the exact byte stream.
"""

from __future__ import annotations

import logging
import struct
import wave
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadParams,
    EmptySignal,
    MalformedFile,
    SignalTooShort,
    UnsupportedFormat,
    ZeroSignalPower,
)

log = logging.getLogger(__name__)

_PCM_SCALE = 32768.0


@dataclass
class AudioClip:
    """A mono audio signal.

    Attributes:
        samples: 1-D float64 array, values in [-1, 1].
        sample_rate_hz: sampling rate, > 0.
    """

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise EmptySignal("AudioClip needs a nonempty 1-D sample array")
        if self.sample_rate_hz <= 0:
            raise BadParams(f"sample rate must be positive, got {self.sample_rate_hz}")
        peak = np.abs(self.samples).max()
        if not peak <= 1.0:  # inverted so NaN peaks fail too
            raise BadParams(f"samples exceed [-1, 1] (peak {peak:.6g})")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


@dataclass
class FrameSequence:
    """Fixed-length overlapping frames cut from one signal."""

    frames: np.ndarray  # (n_frames, frame_len)
    frame_len: int
    hop: int

    def __post_init__(self):
        if self.frames.ndim != 2 or self.frames.shape[1] != self.frame_len:
            raise BadParams("frames must be (n_frames, frame_len)")

    def __len__(self) -> int:
        return self.frames.shape[0]


def load_wav(path) -> AudioClip:
    """Read a RIFF/WAVE file. PCM (format tag 1), 16-bit, mono only.

    Raises:
        MalformedFile: header or chunk structure does not parse.
        UnsupportedFormat: parses but is not 16-bit mono PCM.
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise MalformedFile(f"cannot read {path}: {exc}") from exc

    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedFile(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if cid == b"fmt ":
            if size < 16 or len(body) < 16:
                raise MalformedFile(f"{path}: truncated fmt chunk")
            fmt = struct.unpack("<HHIIHH", body[:16])
        elif cid == b"data":
            if len(body) < size:
                raise MalformedFile(f"{path}: data chunk shorter than declared")
            payload = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None or payload is None:
        raise MalformedFile(f"{path}: missing fmt or data chunk")

    tag, channels, rate, _byte_rate, _block_align, bits = fmt
    if tag != 1:
        raise UnsupportedFormat(f"{path}: format tag {tag}, only PCM (1) supported")
    if bits != 16:
        raise UnsupportedFormat(f"{path}: {bits}-bit samples, only 16-bit supported")
    if channels != 1:
        raise UnsupportedFormat(f"{path}: {channels} channels, only mono supported")
    if rate <= 0:
        raise MalformedFile(f"{path}: nonpositive sample rate {rate}")
    if len(payload) % 2:
        raise MalformedFile(f"{path}: odd data chunk size for 16-bit samples")
    if not payload:
        raise MalformedFile(f"{path}: empty data chunk")

    ints = np.frombuffer(payload, dtype="<i2")
    return AudioClip(ints.astype(np.float64) / _PCM_SCALE, rate)


def write_wav(path, clip: AudioClip) -> None:
    """Write a clip as 16-bit mono PCM. round(v * 32768) clipped to int16."""
    ints = np.clip(np.rint(clip.samples * _PCM_SCALE), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(clip.sample_rate_hz)
        fh.writeframes(ints.tobytes())


def inject_noise(clip: AudioClip, snr_db: float, seed: int) -> tuple[AudioClip, int]:
    """Add white Gaussian noise at a target SNR; also return the clip count.

    Noise variance is P_s / 10^(snr_db / 10) with P_s the mean-square power of
    the signal. Samples are clipped back to [-1, 1]; the number of clipped
    samples is returned rather than silently discarded.
    """
    power = float(np.mean(clip.samples ** 2))
    if power == 0.0:
        raise ZeroSignalPower("cannot set an SNR against a zero-power signal")
    variance = power / (10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    noisy = clip.samples + np.sqrt(variance) * rng.standard_normal(len(clip.samples))
    n_clipped = int(np.count_nonzero((noisy < -1.0) | (noisy > 1.0)))
    return AudioClip(np.clip(noisy, -1.0, 1.0), clip.sample_rate_hz), n_clipped


def add_awgn(clip: AudioClip, snr_db: float, seed: int) -> AudioClip:
    """Additive white Gaussian noise at ``snr_db`` relative to signal power."""
    noisy, n_clipped = inject_noise(clip, snr_db, seed)
    if n_clipped:
        log.info("add_awgn clipped %d samples at %.1f dB SNR", n_clipped, snr_db)
    return noisy


def frame_signal(samples, frame_len: int, overlap: int) -> FrameSequence:
    """Cut a signal into overlapping frames; trailing partial frames are dropped.

    The frame count is floor((len - frame_len) / (frame_len - overlap)) + 1.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise BadParams("frame_signal expects a 1-D sequence")
    if frame_len <= 0 or overlap < 0 or overlap >= frame_len:
        raise BadParams(f"need 0 <= overlap < frame_len, got {overlap}/{frame_len}")
    if len(x) < frame_len:
        raise SignalTooShort(f"{len(x)} samples < one {frame_len}-sample frame")
    hop = frame_len - overlap
    count = (len(x) - frame_len) // hop + 1
    idx = np.arange(frame_len)[None, :] + hop * np.arange(count)[:, None]
    return FrameSequence(x[idx], frame_len, hop)
