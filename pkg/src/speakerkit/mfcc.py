"""Mel-frequency cepstral coefficients.

The pipeline per frame: window, magnitude-squared spectrum, triangular mel
filterbank energies, log with an absolute floor, orthonormal DCT-II keeping
the first ``n_ceps`` coefficients (c0 included).

Filter centers are equally spaced on the mel scale mel(f) = 2595 log10(1 + f/700)
between fmin and fmax; triangles are built on FFT-bin indices with each center
snapped to floor((n_fft + 1) * f / rate), so every filter peaks at exactly 1 on
its center bin. Windows are numpy's symmetric variants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio import frame_signal
from .errors import (
    BadLength,
    BadParams,
    DegenerateBand,
    EmptySequence,
    MalformedFile,
    NegativeFrequency,
    UnsupportedFormat,
)

_WINDOWS = {
    "hamming": np.hamming,
    "hanning": np.hanning,
    "rectangular": np.ones,
}

FEATURE_KINDS = ("mfcc", "wavelet_mfcc")


def mel_scale(freq_hz):
    """Hz -> mel, 2595 * log10(1 + f / 700)."""
    f = np.asarray(freq_hz, dtype=np.float64)
    if np.any(f < 0):
        raise NegativeFrequency("mel_scale is defined for f >= 0")
    return 2595.0 * np.log10(1.0 + f / 700.0)


def mel_inverse(mels):
    """Mel -> Hz, inverse of mel_scale."""
    m = np.asarray(mels, dtype=np.float64)
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


@dataclass
class MfccConfig:
    """Knobs of the cepstral pipeline; defaults follow the 8 kHz setup."""

    frame_len: int = 256
    overlap: int = 100
    n_fft: int = 256
    n_filters: int = 20
    n_ceps: int = 13
    fmin_hz: float = 0.0
    fmax_hz: float | None = None  # None resolves to rate / 2 at build time
    window: str = "hamming"
    log_floor: float = 1e-10
    pre_emphasis: float = 0.0  # off by default; 0.95..0.97 typical when on
    deltas: int = 0  # 0 none, 1 append delta, 2 append delta + delta-delta

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.frame_len <= 0:
            raise BadParams("frame_len must be positive")
        if not 0 <= self.overlap < self.frame_len:
            raise BadParams("need 0 <= overlap < frame_len")
        if self.n_fft < self.frame_len:
            raise BadParams("n_fft must be >= frame_len")
        if self.n_filters < 1:
            raise BadParams("need at least one mel filter")
        if not 1 <= self.n_ceps <= self.n_filters:
            raise BadParams("need 1 <= n_ceps <= n_filters")
        if self.fmin_hz < 0:
            raise NegativeFrequency("fmin_hz must be >= 0")
        if self.fmax_hz is not None and self.fmax_hz <= self.fmin_hz:
            raise BadParams("fmax_hz must exceed fmin_hz")
        if self.window not in _WINDOWS:
            raise BadParams(f"window must be one of {sorted(_WINDOWS)}")
        if self.log_floor <= 0:
            raise BadParams("log_floor must be positive")
        if not 0.0 <= self.pre_emphasis < 1.0:
            raise BadParams("pre_emphasis must be in [0, 1)")
        if self.deltas not in (0, 1, 2):
            raise BadParams("deltas must be 0, 1 or 2")

    @property
    def hop(self) -> int:
        return self.frame_len - self.overlap


@dataclass
class MelFilterbank:
    """Triangular filters as a dense (n_filters, n_fft // 2 + 1) weight matrix.

    center_freqs_hz holds the exact mel-uniform centers (before bin snapping).
    """

    weights: np.ndarray
    center_freqs_hz: np.ndarray
    sample_rate_hz: float
    n_fft: int


def build_mel_filterbank(sample_rate_hz: float, config: MfccConfig) -> MelFilterbank:
    """Lay out ``config.n_filters`` triangles between fmin and fmax."""
    if sample_rate_hz <= 0:
        raise BadParams("sample rate must be positive")
    fmax = config.fmax_hz if config.fmax_hz is not None else sample_rate_hz / 2.0
    if fmax > sample_rate_hz / 2.0 + 1e-9:
        raise BadParams(f"fmax {fmax} Hz exceeds Nyquist {sample_rate_hz / 2.0} Hz")
    if config.fmin_hz >= fmax:
        raise BadParams("fmin_hz must lie below fmax")

    n_bins = config.n_fft // 2 + 1
    mel_points = np.linspace(mel_scale(config.fmin_hz), mel_scale(fmax),
                             config.n_filters + 2)
    hz_points = mel_inverse(mel_points)
    bins = np.floor((config.n_fft + 1) * hz_points / sample_rate_hz).astype(int)
    bins = np.minimum(bins, n_bins - 1)
    if np.any(np.diff(bins) < 1):
        raise DegenerateBand(
            f"adjacent mel points collapse onto one FFT bin "
            f"(n_fft {config.n_fft} too small for {config.n_filters} filters)")

    weights = np.zeros((config.n_filters, n_bins))
    for m in range(1, config.n_filters + 1):
        lo, center, hi = bins[m - 1], bins[m], bins[m + 1]
        for k in range(lo + 1, center + 1):
            weights[m - 1, k] = (k - lo) / (center - lo)
        for k in range(center + 1, hi):
            weights[m - 1, k] = (hi - k) / (hi - center)
    return MelFilterbank(weights, hz_points[1:-1], float(sample_rate_hz), config.n_fft)


def _dct_matrix(n_out: int, n_in: int) -> np.ndarray:
    j = np.arange(n_in)
    mat = np.cos(np.pi * np.arange(n_out)[:, None] * (2 * j + 1) / (2 * n_in))
    mat *= np.sqrt(2.0 / n_in)
    mat[0] *= np.sqrt(0.5)
    return mat


def dct_ii(vector, n_out: int) -> np.ndarray:
    """Orthonormal DCT-II of a vector, truncated to its first n_out terms."""
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise BadLength("dct_ii expects a nonempty 1-D vector")
    if not 1 <= n_out <= len(v):
        raise BadLength(f"need 1 <= n_out <= {len(v)}, got {n_out}")
    return _dct_matrix(n_out, len(v)) @ v


@dataclass
class FeatureSequence:
    """T frame vectors of one utterance plus provenance."""

    vectors: np.ndarray  # (T, D)
    kind: str
    frame_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or self.vectors.shape[0] == 0:
            raise EmptySequence("FeatureSequence needs a (T, D) array with T >= 1")
        if self.kind not in FEATURE_KINDS:
            raise BadParams(f"kind must be one of {FEATURE_KINDS}, got {self.kind!r}")
        if not np.isfinite(self.vectors).all():
            raise BadParams("feature vectors must be finite")

    def __len__(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def _append_deltas(ceps: np.ndarray, order: int) -> np.ndarray:
    # two-frame regression window with edge replication
    t = np.arange(len(ceps))
    blocks = [ceps]
    base = ceps
    for _ in range(order):
        num = np.zeros_like(base)
        for n in (1, 2):
            num += n * (base[np.minimum(t + n, len(base) - 1)]
                        - base[np.maximum(t - n, 0)])
        base = num / (2.0 * (1 + 4))
        blocks.append(base)
    return np.hstack(blocks)


def extract_mfcc(samples, sample_rate_hz: float, config: MfccConfig = None) -> FeatureSequence:
    """Run the cepstral pipeline over one signal.

    Args:
        samples: 1-D real signal.
        sample_rate_hz: rate of ``samples``; also fixes the default fmax.
        config: pipeline knobs, defaults to MfccConfig().

    Returns:
        FeatureSequence of kind "mfcc", one row per frame.
    """
    cfg = config if config is not None else MfccConfig()
    cfg.validate()
    x = np.asarray(samples, dtype=np.float64)
    if cfg.pre_emphasis > 0.0:
        x = np.concatenate([x[:1], x[1:] - cfg.pre_emphasis * x[:-1]])
    framed = frame_signal(x, cfg.frame_len, cfg.overlap)
    window = _WINDOWS[cfg.window](cfg.frame_len)
    spectra = np.fft.rfft(framed.frames * window, n=cfg.n_fft, axis=1)
    power = spectra.real ** 2 + spectra.imag ** 2
    bank = build_mel_filterbank(sample_rate_hz, cfg)
    energies = power @ bank.weights.T
    log_e = np.log(np.maximum(energies, cfg.log_floor))
    ceps = log_e @ _dct_matrix(cfg.n_ceps, cfg.n_filters).T
    if cfg.deltas:
        ceps = _append_deltas(ceps, cfg.deltas)
    meta = {
        "frame_len": cfg.frame_len,
        "hop": cfg.hop,
        "sample_rate_hz": float(sample_rate_hz),
    }
    return FeatureSequence(ceps, "mfcc", meta)


def save_features(path, seq: FeatureSequence, config_hash: str = "-") -> None:
    """Write a feature file: self-describing header, one %.17g row per frame."""
    channels = seq.frame_meta.get("channels")
    with open(path, "w") as fh:
        fh.write("speakerkit-features 1\n")
        fh.write(f"kind {seq.kind}\n")
        fh.write(f"dim {seq.dim}\n")
        fh.write(f"frames {len(seq)}\n")
        fh.write("frame_len %d\n" % seq.frame_meta.get("frame_len", 0))
        fh.write("hop %d\n" % seq.frame_meta.get("hop", 0))
        fh.write("sample_rate_hz %.17g\n" % seq.frame_meta.get("sample_rate_hz", 0.0))
        fh.write("channels %s\n" % (",".join(channels) if channels else "-"))
        fh.write(f"config_hash {config_hash}\n")
        fh.write("end-header\n")
        for row in seq.vectors:
            fh.write(" ".join("%.17g" % v for v in row) + "\n")


def load_features(path) -> FeatureSequence:
    """Read a feature file written by save_features."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise MalformedFile(f"cannot read {path}: {exc}") from exc
    if not lines or not lines[0].startswith("speakerkit-features"):
        raise MalformedFile(f"{path}: not a feature file")
    if lines[0].split()[-1] != "1":
        raise UnsupportedFormat(f"{path}: unknown feature file version")
    header = {}
    body_at = None
    for i, line in enumerate(lines[1:], start=1):
        if line == "end-header":
            body_at = i + 1
            break
        key, _, value = line.partition(" ")
        header[key] = value
    if body_at is None:
        raise MalformedFile(f"{path}: missing end-header")
    try:
        dim = int(header["dim"])
        frames = int(header["frames"])
        kind = header["kind"]
    except (KeyError, ValueError) as exc:
        raise MalformedFile(f"{path}: bad header: {exc}") from exc
    rows = [line.split() for line in lines[body_at:] if line.strip()]
    if len(rows) != frames or any(len(r) != dim for r in rows):
        raise MalformedFile(f"{path}: body does not match declared {frames}x{dim}")
    vectors = np.array(rows, dtype=np.float64)
    meta = {
        "frame_len": int(header.get("frame_len", 0)),
        "hop": int(header.get("hop", 0)),
        "sample_rate_hz": float(header.get("sample_rate_hz", 0.0)),
        "config_hash": header.get("config_hash", "-"),
    }
    if header.get("channels", "-") != "-":
        meta["channels"] = header["channels"].split(",")
    return FeatureSequence(vectors, kind, meta)
