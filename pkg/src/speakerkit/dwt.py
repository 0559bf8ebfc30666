"""Orthonormal discrete wavelet transform via the two-channel filter bank.

Analysis convolves the signal with the lowpass filter for approximations and
with the quadrature highpass for details, then decimates by two; the transform
iterates on the approximations. Boundary handling is half-point symmetric
extension by ``len(filter) - 1`` samples per side, keeping the odd-indexed
outputs of the full convolution, so one step maps n samples to
floor((n + 15) / 2) coefficients for the 16-tap db8 pair.

A "periodization" mode (circular convolution, n/2 coefficients per channel,
even n only) makes the transform exactly orthogonal; it exists for energy
checks rather than for feature extraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, EmptySignal, LengthMismatch, LevelTooDeep

MODES = ("symmetric", "periodization")

# Orthonormal Daubechies 8-vanishing-moment scaling filter, 16 taps.
# Embedded rather than imported; validate() checks it to 1e-10 at construction.
_DB8_LOWPASS = (
    0.05441584224308161,
    0.3128715909144659,
    0.6756307362980128,
    0.5853546836548691,
    -0.015829105256023893,
    -0.2840155429624281,
    0.00047248457399797254,
    0.128747426620186,
    -0.01736930100202211,
    -0.04408825393106472,
    0.013981027917015516,
    0.008746094047015655,
    -0.00487035299301066,
    -0.0003917403729959771,
    0.0006754494059985568,
    -0.00011747678400228192,
)


@dataclass
class WaveletFilterPair:
    """Analysis lowpass/highpass pair of an orthonormal wavelet."""

    name: str
    lowpass: np.ndarray
    highpass: np.ndarray

    def __post_init__(self):
        self.lowpass = np.asarray(self.lowpass, dtype=np.float64)
        self.highpass = np.asarray(self.highpass, dtype=np.float64)
        self.validate()

    def __len__(self) -> int:
        return len(self.lowpass)

    def validate(self, tol: float = 1e-10) -> None:
        """Check orthonormality of the pair; raises BadParams on failure."""
        lo, hi = self.lowpass, self.highpass
        n = len(lo)
        if n < 2 or n % 2 or len(hi) != n:
            raise BadParams("filters must share one even length >= 2")
        if abs(lo.sum() - np.sqrt(2.0)) > tol:
            raise BadParams(f"lowpass sum {lo.sum()!r} != sqrt(2)")
        if abs((lo ** 2).sum() - 1.0) > tol:
            raise BadParams("lowpass energy != 1")
        if abs(hi.sum()) > tol:
            raise BadParams("highpass sum != 0")
        for k in range(1, n // 2):
            if abs(np.dot(lo[2 * k:], lo[:-2 * k])) > tol:
                raise BadParams(f"lowpass autocorrelation at shift {2 * k} != 0")
        qmf = (-1.0) ** np.arange(n) * lo[::-1]
        if np.abs(hi - qmf).max() > tol:
            raise BadParams("highpass is not the quadrature mirror of lowpass")


def make_db8_filters() -> WaveletFilterPair:
    """The db8 analysis pair, highpass[n] = (-1)^n * lowpass[15 - n]."""
    lo = np.array(_DB8_LOWPASS)
    hi = (-1.0) ** np.arange(len(lo)) * lo[::-1]
    return WaveletFilterPair("db8", lo, hi)


@dataclass
class WaveletDecomposition:
    """Coefficients of a level-L decomposition.

    ``details`` is ordered deepest first, [CD_L, ..., CD_1];
    ``source_lengths[i]`` records the input length of decomposition step i so
    reconstruction can trim each inverse step back to size.
    """

    level: int
    approx: np.ndarray
    details: list = field(default_factory=list)
    source_lengths: list = field(default_factory=list)
    mode: str = "symmetric"

    def channel(self, name: str) -> np.ndarray:
        """Fetch a channel by conventional name (CA3, CD2, ...)."""
        kind, depth = _parse_channel_name(name)
        if depth > self.level or depth < 1:
            raise BadParams(f"channel {name} absent from a level-{self.level} decomposition")
        if kind == "CA":
            if depth != self.level:
                raise BadParams(f"only CA{self.level} is kept at level {self.level}")
            return self.approx
        return self.details[self.level - depth]

    def channel_names(self) -> list:
        names = [f"CA{self.level}"]
        names += [f"CD{d}" for d in range(self.level, 0, -1)]
        return names


def _parse_channel_name(name: str) -> tuple[str, int]:
    if len(name) < 3 or name[:2] not in ("CA", "CD") or not name[2:].isdigit():
        raise BadParams(f"bad channel name {name!r}, want CA<k> or CD<k>")
    return name[:2], int(name[2:])


def _coeff_len(n: int, flen: int) -> int:
    return (n + flen - 1) // 2


def _step_symmetric(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    padded = np.pad(x, len(f) - 1, mode="symmetric")
    return np.convolve(padded, f, mode="valid")[1::2]


def _step_periodized(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    n = len(x)
    out = np.zeros(n // 2)
    phases = 2 * np.arange(n // 2) + 1
    for tap in range(len(f)):
        out += f[tap] * x[(phases - tap) % n]
    return out


def dwt_step(signal, filters: WaveletFilterPair, mode: str = "symmetric"):
    """One analysis step: returns (approx, detail)."""
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise EmptySignal("dwt_step needs a nonempty 1-D signal")
    if mode not in MODES:
        raise BadParams(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "periodization":
        if len(x) % 2:
            raise BadParams("periodization mode requires an even signal length")
        return (_step_periodized(x, filters.lowpass),
                _step_periodized(x, filters.highpass))
    return (_step_symmetric(x, filters.lowpass),
            _step_symmetric(x, filters.highpass))


def idwt_step(approx, detail, filters: WaveletFilterPair, target_len: int,
              mode: str = "symmetric") -> np.ndarray:
    """Invert one step back to ``target_len`` samples."""
    ca = np.asarray(approx, dtype=np.float64)
    cd = np.asarray(detail, dtype=np.float64)
    if len(ca) != len(cd):
        raise LengthMismatch(f"approx/detail lengths differ: {len(ca)} vs {len(cd)}")
    flen = len(filters)
    if mode == "periodization":
        if len(ca) * 2 != target_len:
            raise LengthMismatch(
                f"periodized channels of {len(ca)} cannot rebuild {target_len} samples")
        out = np.zeros(target_len)
        phases = 2 * np.arange(len(ca)) + 1
        for tap in range(flen):
            pos = (phases - tap) % target_len
            out[pos] += filters.lowpass[tap] * ca
            out[pos] += filters.highpass[tap] * cd
        return out
    if mode != "symmetric":
        raise BadParams(f"mode must be one of {MODES}, got {mode!r}")
    if _coeff_len(target_len, flen) != len(ca):
        raise LengthMismatch(
            f"{len(ca)} coefficients cannot come from a {target_len}-sample signal")
    up_a = np.zeros(2 * len(ca) - 1)
    up_a[::2] = ca
    up_d = np.zeros(2 * len(cd) - 1)
    up_d[::2] = cd
    rec = np.convolve(up_a, filters.lowpass[::-1]) + np.convolve(up_d, filters.highpass[::-1])
    return rec[flen - 2: flen - 2 + target_len]


def max_level(n_samples: int, flen: int = 16) -> int:
    """Deepest level before boundary extension dominates the coefficients."""
    if n_samples < flen:
        return 1
    return max(1, int(np.floor(np.log2(n_samples / (flen - 1)))))


def wavedec(signal, filters: WaveletFilterPair, level: int,
            mode: str = "symmetric") -> WaveletDecomposition:
    """Iterated analysis on the approximation channel."""
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise EmptySignal("wavedec needs a nonempty 1-D signal")
    if level < 1:
        raise BadParams(f"level must be >= 1, got {level}")
    if level > max_level(len(x), len(filters)):
        raise LevelTooDeep(
            f"level {level} too deep for {len(x)} samples with a "
            f"{len(filters)}-tap filter (max {max_level(len(x), len(filters))})")
    details = []
    lengths = []
    approx = x
    for _ in range(level):
        lengths.append(len(approx))
        approx, det = dwt_step(approx, filters, mode)
        details.append(det)
    details.reverse()
    return WaveletDecomposition(level, approx, details, lengths, mode)


def waverec(decomp: WaveletDecomposition, filters: WaveletFilterPair) -> np.ndarray:
    """Invert a decomposition back to its original length."""
    if len(decomp.details) != decomp.level or len(decomp.source_lengths) != decomp.level:
        raise LengthMismatch("decomposition bookkeeping does not match its level")
    flen = len(filters)
    approx = np.asarray(decomp.approx, dtype=np.float64)
    for i, det in enumerate(decomp.details):
        target = decomp.source_lengths[decomp.level - 1 - i]
        if decomp.mode == "symmetric" and _coeff_len(target, flen) != len(det):
            raise LengthMismatch(
                f"detail {i} has {len(det)} coefficients, expected "
                f"{_coeff_len(target, flen)} for {target} source samples")
        approx = idwt_step(approx, det, filters, target, decomp.mode)
    return approx


def dump_coefficients(decomp: WaveletDecomposition, out_dir) -> list:
    """Write one text file per channel, one coefficient per line, %.17g."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in decomp.channel_names():
        path = out / f"{name}.txt"
        with open(path, "w") as fh:
            for v in decomp.channel(name):
                fh.write("%.17g\n" % v)
        written.append(path)
    return written
