"""Dynamic time warping over feature sequences.

Euclidean local cost, steps restricted to (i-1,j), (i,j-1), (i-1,j-1), no
slope weighting, distance unnormalized by default (DtwConfig.normalize divides
by path length). Backtracking breaks ties diagonal > vertical > horizontal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.spatial.distance import cdist

from .errors import (
    DimensionMismatch,
    EmptySequence,
    EmptyTemplateSet,
    FeatureKindMismatch,
)
from .mfcc import FeatureSequence


@dataclass
class WarpPath:
    """Aligned index pairs, (0,0) first, (|X|-1, |Y|-1) last."""

    pairs: np.ndarray  # (K, 2) int

    def __len__(self) -> int:
        return self.pairs.shape[0]


@dataclass
class DtwResult:
    distance: float
    path: WarpPath
    local_cost: np.ndarray
    accumulated_cost: np.ndarray


def _as_matrix(seq) -> np.ndarray:
    if isinstance(seq, FeatureSequence):
        return seq.vectors
    x = np.asarray(seq, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptySequence("DTW needs nonempty (T, D) sequences")
    return x


@njit(cache=True)
def _fill(local):
    m, n = local.shape
    acc = np.empty((m, n))
    acc[0, 0] = local[0, 0]
    for j in range(1, n):
        acc[0, j] = acc[0, j - 1] + local[0, j]
    for i in range(1, m):
        acc[i, 0] = acc[i - 1, 0] + local[i, 0]
        for j in range(1, n):
            best = acc[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = local[i, j] + best
    return acc


def _backtrack(acc: np.ndarray) -> np.ndarray:
    i, j = acc.shape[0] - 1, acc.shape[1] - 1
    rev = [(i, j)]
    inf = np.inf
    while i or j:
        diag = acc[i - 1, j - 1] if i and j else inf
        vert = acc[i - 1, j] if i else inf
        horz = acc[i, j - 1] if j else inf
        best = min(diag, vert, horz)
        if diag == best:
            i, j = i - 1, j - 1
        elif vert == best:
            i -= 1
        else:
            j -= 1
        rev.append((i, j))
    return np.array(rev[::-1], dtype=np.int64)


def validate_path(pairs: np.ndarray, m: int, n: int) -> None:
    """Boundary, monotonicity, step legality, and length bounds; raises on breach."""
    k = len(pairs)
    if tuple(pairs[0]) != (0, 0) or tuple(pairs[-1]) != (m - 1, n - 1):
        raise RuntimeError("warp path endpoints off the corners")
    steps = np.diff(pairs, axis=0)
    if k > 1:
        legal = ((steps >= 0).all() and (steps <= 1).all()
                 and (steps.sum(axis=1) >= 1).all())
        if not legal:
            raise RuntimeError("warp path takes an illegal step")
    if not max(m, n) <= k <= m + n:
        raise RuntimeError(f"warp path length {k} outside [{max(m, n)}, {m + n}]")


def dtw_distance(seq_x, seq_y, normalize: bool = False) -> DtwResult:
    """Align two sequences; returns distance, path, and both cost matrices."""
    x, y = _as_matrix(seq_x), _as_matrix(seq_y)
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(f"dims differ: {x.shape[1]} vs {y.shape[1]}")
    local = cdist(x, y, "euclidean")
    acc = _fill(local)
    pairs = _backtrack(acc)
    validate_path(pairs, len(x), len(y))
    distance = float(acc[-1, -1])
    if normalize:
        distance /= len(pairs)
    return DtwResult(distance, WarpPath(pairs), local, acc)


def dtw_classify(seq, templates, normalize: bool = False):
    """Label a sequence by its nearest template.

    Args:
        templates: iterable of (speaker_id, sequence) pairs; a speaker may
            contribute several, and their score is the minimum distance.

    Returns:
        (speaker_id, scored) where scored is a list of (speaker_id, distance)
        in template order. Ties go to the lowest speaker id, then to the
        earlier template.
    """
    templates = list(templates)
    if not templates:
        raise EmptyTemplateSet("no templates to classify against")
    if isinstance(seq, FeatureSequence):
        for speaker, tpl in templates:
            if isinstance(tpl, FeatureSequence) and tpl.kind != seq.kind:
                raise FeatureKindMismatch(
                    f"template of {speaker} is {tpl.kind}, query is {seq.kind}")
    scored = [(speaker, dtw_distance(seq, tpl, normalize).distance)
              for speaker, tpl in templates]
    by_speaker = {}
    for speaker, dist in scored:
        if speaker not in by_speaker or dist < by_speaker[speaker]:
            by_speaker[speaker] = dist
    best = min(by_speaker.items(), key=lambda kv: (kv[1], kv[0]))
    return best[0], scored
