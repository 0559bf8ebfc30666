"""Input validation helpers shared by the estimator facade."""

from __future__ import annotations

import numpy as np

from .audio import AudioClip
from .errors import DimensionMismatch, EmptySequence
from .mfcc import FeatureSequence


def as_feature_matrix(x) -> np.ndarray:
    """Coerce a FeatureSequence or array-like to a (T, D) float64 matrix."""
    if isinstance(x, FeatureSequence):
        return x.vectors
    mat = np.asarray(x, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] == 0 or mat.shape[1] == 0:
        raise EmptySequence(f"expected a nonempty (T, D) matrix, got shape {mat.shape}")
    if not np.isfinite(mat).all():
        raise EmptySequence("feature matrix contains non-finite values")
    return mat


def check_consistent_dims(mats) -> int:
    """All matrices share one vector dimension; returns it."""
    dims = {m.shape[1] for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed feature dimensions {sorted(dims)}")
    return dims.pop()


def as_audio_clip(x, sample_rate_hz: int) -> AudioClip:
    """Pass AudioClips through; wrap raw sample arrays at the given rate."""
    if isinstance(x, AudioClip):
        return x
    return AudioClip(np.asarray(x, dtype=np.float64), sample_rate_hz)
