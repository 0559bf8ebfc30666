"""Left-to-right hidden Markov models with diagonal-covariance Gaussian
mixture emissions.

Everything runs in the natural-log domain via log-sum-exp; there is no
alpha/beta scaling. The forward score sums over all states at the final frame
(final-state-only termination is a config switch). Baum-Welch re-estimates
within the left-to-right band only, keeps pi fixed at [1, 0, ..., 0], floors
every variance at var_floor_scale times the global per-dimension variance of
the training pool (minimum var_floor_abs), and on a zero-occupancy state keeps
the previous parameters and records the event instead of raising.
"""

from __future__ import annotations

import copy
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .config import HmmTrainConfig
from .errors import (
    BadParams,
    DimensionMismatch,
    EmptyModelSet,
    EmptyTrainingSet,
    FeatureKindMismatch,
    MalformedFile,
    SequenceTooShort,
    UnsupportedFormat,
)
from .mfcc import FeatureSequence

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class GaussianMixture:
    """One state's emission density, Eq-style sum of diagonal Gaussians."""

    weights: np.ndarray  # (M,), nonnegative, sums to 1
    means: np.ndarray  # (M, D)
    variances: np.ndarray  # (M, D), strictly positive

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.means = np.asarray(self.means, dtype=np.float64)
        self.variances = np.asarray(self.variances, dtype=np.float64)

    @property
    def n_mix(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.means.shape[1]


@dataclass
class Hmm:
    """Topology plus per-state mixtures."""

    pi: np.ndarray  # (N,)
    trans: np.ndarray  # (N, N), rows sum to 1, upper band only
    states: list  # N GaussianMixture
    max_jump: int = 1

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def validate(self, tol: float = 1e-9) -> None:
        n = self.n_states
        if self.pi.shape != (n,) or self.trans.shape != (n, n):
            raise BadParams("pi/trans shapes inconsistent with state count")
        if abs(self.pi.sum() - 1.0) > tol or np.any(self.pi < 0):
            raise BadParams("pi is not a distribution")
        if np.abs(self.trans.sum(axis=1) - 1.0).max() > tol or np.any(self.trans < 0):
            raise BadParams("transition rows must each sum to 1")
        for i in range(n):
            for j in range(n):
                if (j < i or j > i + self.max_jump) and self.trans[i, j] != 0.0:
                    raise BadParams(f"transition {i}->{j} breaks the left-to-right band")
        for gmm in self.states:
            if abs(gmm.weights.sum() - 1.0) > tol or np.any(gmm.weights < 0):
                raise BadParams("mixture weights must form a distribution")
            if np.any(gmm.variances <= 0):
                raise BadParams("variances must be strictly positive")
            if gmm.dim != self.dim or gmm.n_mix != self.states[0].n_mix:
                raise BadParams("states disagree on dim or mixture count")


@dataclass
class SpeakerModel:
    speaker_id: str
    hmm: Hmm
    feature_kind: str
    config_hash: str = "-"


@dataclass
class TrainTrace:
    """Per-iteration log-likelihoods plus collapse bookkeeping."""

    log_likelihoods: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    collapses: list = field(default_factory=list)  # (iteration, state)


def _log_weights(weights: np.ndarray) -> np.ndarray:
    out = np.full(len(weights), -np.inf)
    pos = weights > 0
    out[pos] = np.log(weights[pos])
    return out


def _stacked_params(hmm: Hmm):
    means = np.stack([g.means for g in hmm.states])  # (N, M, D)
    variances = np.stack([g.variances for g in hmm.states])
    log_w = np.stack([_log_weights(g.weights) for g in hmm.states])  # (N, M)
    return log_w, means, variances


def _log_component_matrix(hmm: Hmm, x: np.ndarray) -> np.ndarray:
    """log(c_jm N(o_t; mu_jm, U_jm)) for every (t, j, m)."""
    log_w, means, variances = _stacked_params(hmm)
    diff = x[:, None, None, :] - means[None]  # (T, N, M, D)
    quad = (diff * diff / variances[None]).sum(axis=3)
    log_det = (np.log(variances).sum(axis=2) + hmm.dim * _LOG_2PI)  # (N, M)
    return log_w[None] - 0.5 * (log_det[None] + quad)


def _log_emissions(hmm: Hmm, x: np.ndarray) -> np.ndarray:
    """log b_j(o_t) as a (T, N) matrix."""
    return logsumexp(_log_component_matrix(hmm, x), axis=2)


def log_gmm_pdf(gmm: GaussianMixture, x) -> float:
    """Log density of one observation under one state's mixture."""
    single = Hmm(np.array([1.0]), np.array([[1.0]]), [gmm])
    vec = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if vec.shape[1] != gmm.dim:
        raise DimensionMismatch(f"observation dim {vec.shape[1]} != {gmm.dim}")
    return float(_log_emissions(single, vec)[0, 0])


def _log_trans(hmm: Hmm) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(hmm.trans > 0, np.log(np.maximum(hmm.trans, 1e-300)), -np.inf)


def _forward_from_log(emissions: np.ndarray, log_pi: np.ndarray,
                      log_a: np.ndarray, final_state_only: bool = False):
    t_len, n = emissions.shape
    alpha = np.empty((t_len, n))
    alpha[0] = log_pi + emissions[0]
    for t in range(1, t_len):
        alpha[t] = emissions[t] + logsumexp(alpha[t - 1][:, None] + log_a, axis=0)
    ll = alpha[-1, -1] if final_state_only else logsumexp(alpha[-1])
    return alpha, float(ll)


def _backward_from_log(emissions: np.ndarray, log_a: np.ndarray) -> np.ndarray:
    t_len, n = emissions.shape
    beta = np.zeros((t_len, n))
    for t in range(t_len - 2, -1, -1):
        beta[t] = logsumexp(log_a + (emissions[t + 1] + beta[t + 1])[None, :], axis=1)
    return beta


def _seq_matrix(seq) -> np.ndarray:
    if isinstance(seq, FeatureSequence):
        return seq.vectors
    x = np.asarray(seq, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyTrainingSet("need a nonempty (T, D) sequence")
    return x


def forward_log_likelihood(hmm: Hmm, seq, final_state_only: bool = False) -> float:
    """Total log-likelihood of a sequence under the model."""
    x = _seq_matrix(seq)
    if x.shape[1] != hmm.dim:
        raise DimensionMismatch(f"sequence dim {x.shape[1]} != model dim {hmm.dim}")
    with np.errstate(divide="ignore"):
        log_pi = np.where(hmm.pi > 0, np.log(np.maximum(hmm.pi, 1e-300)), -np.inf)
    _, ll = _forward_from_log(_log_emissions(hmm, x), log_pi, _log_trans(hmm),
                              final_state_only)
    return ll


def viterbi(hmm: Hmm, seq):
    """Most likely state path; ties resolve toward the lower state index.

    Returns:
        (states, log_prob) with states a length-T int array.
    """
    x = _seq_matrix(seq)
    if x.shape[1] != hmm.dim:
        raise DimensionMismatch(f"sequence dim {x.shape[1]} != model dim {hmm.dim}")
    emissions = _log_emissions(hmm, x)
    log_a = _log_trans(hmm)
    with np.errstate(divide="ignore"):
        log_pi = np.where(hmm.pi > 0, np.log(np.maximum(hmm.pi, 1e-300)), -np.inf)
    t_len, n = emissions.shape
    delta = np.empty((t_len, n))
    back = np.zeros((t_len, n), dtype=np.int64)
    delta[0] = log_pi + emissions[0]
    for t in range(1, t_len):
        cand = delta[t - 1][:, None] + log_a  # (from, to)
        back[t] = np.argmax(cand, axis=0)  # argmax takes the first max: low index
        delta[t] = emissions[t] + cand[back[t], np.arange(n)]
    states = np.empty(t_len, dtype=np.int64)
    states[-1] = int(np.argmax(delta[-1]))
    for t in range(t_len - 2, -1, -1):
        states[t] = back[t + 1, states[t + 1]]
    return states, float(delta[-1, states[-1]])


def _variance_floor(pool: np.ndarray, config: HmmTrainConfig) -> np.ndarray:
    return np.maximum(config.var_floor_scale * pool.var(axis=0), config.var_floor_abs)


def _kmeans(x: np.ndarray, k: int, rng: np.random.Generator, iters: int = 25):
    """Seeded restart-free Lloyd iterations; empty clusters grab the farthest point."""
    n = len(x)
    centroids = x[rng.choice(n, size=k, replace=n < k)].copy()
    labels = np.zeros(n, dtype=np.int64)
    for it in range(iters):
        dist = ((x[:, None, :] - centroids[None]) ** 2).sum(axis=2)
        new_labels = np.argmin(dist, axis=1)
        for c in range(k):
            if not np.any(new_labels == c):
                worst = int(np.argmax(dist[np.arange(n), new_labels]))
                centroids[c] = x[worst]
                new_labels[worst] = c
        if it > 0 and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            member = x[labels == c]
            if len(member):
                centroids[c] = member.mean(axis=0)
    return labels, centroids


def _band_transitions(n_states: int, max_jump: int, self_loop: float) -> np.ndarray:
    trans = np.zeros((n_states, n_states))
    for i in range(n_states):
        ahead = min(max_jump, n_states - 1 - i)
        if ahead == 0:
            trans[i, i] = 1.0
        else:
            trans[i, i] = self_loop
            trans[i, i + 1:i + 1 + ahead] = (1.0 - self_loop) / ahead
    return trans


def _check_training_set(sequences, n_states: int):
    mats = [_seq_matrix(s) for s in sequences]
    if not mats:
        raise EmptyTrainingSet("no training sequences")
    dim = mats[0].shape[1]
    for m in mats:
        if m.shape[1] != dim:
            raise DimensionMismatch("training sequences disagree on dim")
        if m.shape[0] < n_states:
            raise SequenceTooShort(
                f"{m.shape[0]} frames cannot cover {n_states} states")
    return mats


def init_hmm(sequences, config: HmmTrainConfig = None, seed: int = 0) -> Hmm:
    """Uniform-segmentation k-means initialization.

    Each sequence is split into n_states contiguous near-equal blocks, block k
    of every sequence pools into state k, and a seeded k-means fits the n_mix
    centroids per state. Weights follow cluster sizes; empty clusters keep the
    pooled mean with weight 0; variances are floored cluster variances.
    """
    cfg = config if config is not None else HmmTrainConfig()
    mats = _check_training_set(sequences, cfg.n_states)
    pool = np.vstack(mats)
    floor = _variance_floor(pool, cfg)
    states = []
    for state in range(cfg.n_states):
        chunks = [np.array_split(m, cfg.n_states)[state] for m in mats]
        frames = np.vstack(chunks)
        rng = np.random.default_rng([seed, state])
        if cfg.n_mix == 1:
            weights = np.array([1.0])
            means = frames.mean(axis=0)[None, :]
            variances = np.maximum(frames.var(axis=0), floor)[None, :]
        else:
            labels, centroids = _kmeans(frames, cfg.n_mix, rng)
            weights = np.bincount(labels, minlength=cfg.n_mix).astype(np.float64)
            weights /= weights.sum()
            means = np.empty((cfg.n_mix, frames.shape[1]))
            variances = np.empty_like(means)
            for c in range(cfg.n_mix):
                member = frames[labels == c]
                if len(member) == 0:
                    means[c] = frames.mean(axis=0)
                    variances[c] = np.maximum(frames.var(axis=0), floor)
                else:
                    means[c] = member.mean(axis=0)
                    variances[c] = np.maximum(member.var(axis=0), floor)
        states.append(GaussianMixture(weights, means, variances))
    pi = np.zeros(cfg.n_states)
    pi[0] = 1.0
    return Hmm(pi, _band_transitions(cfg.n_states, cfg.max_jump, cfg.self_loop_init),
               states, cfg.max_jump)


def _e_step(hmm: Hmm, mats, final_state_only: bool):
    """Forward-backward over every sequence; returns stats and the total LL."""
    log_a = _log_trans(hmm)
    with np.errstate(divide="ignore"):
        log_pi = np.where(hmm.pi > 0, np.log(np.maximum(hmm.pi, 1e-300)), -np.inf)
    total_ll = 0.0
    per_seq = []
    xi_sum = np.zeros_like(hmm.trans)
    for x in mats:
        comp = _log_component_matrix(hmm, x)  # (T, N, M)
        emissions = logsumexp(comp, axis=2)
        alpha, ll = _forward_from_log(emissions, log_pi, log_a, final_state_only)
        beta = _backward_from_log(emissions, log_a)
        total_ll += ll
        lg = alpha + beta
        gamma = np.exp(lg - logsumexp(lg, axis=1, keepdims=True))  # (T, N)
        resp = gamma[:, :, None] * np.exp(comp - emissions[:, :, None])  # (T, N, M)
        for t in range(len(x) - 1):
            m = alpha[t][:, None] + log_a + (emissions[t + 1] + beta[t + 1])[None, :]
            xi_sum += np.exp(m - logsumexp(m))
        per_seq.append((x, resp))
    return per_seq, xi_sum, total_ll


def _m_step(hmm: Hmm, per_seq, xi_sum, floor, iteration: int, collapses: list):
    n, mix = hmm.n_states, hmm.states[0].n_mix
    occ = np.zeros((n, mix))
    wsum = np.zeros((n, mix, hmm.dim))
    for x, resp in per_seq:
        occ += resp.sum(axis=0)
        wsum += np.einsum("tnm,td->nmd", resp, x)
    state_occ = occ.sum(axis=1)
    for j in range(n):
        if state_occ[j] == 0.0:
            collapses.append((iteration, j))
            warnings.warn(f"state {j} received zero occupancy at iteration "
                          f"{iteration}; keeping its previous parameters")
            continue
        gmm = hmm.states[j]
        new_w = occ[j] / state_occ[j]
        new_means = gmm.means.copy()
        live = occ[j] > 0
        new_means[live] = wsum[j][live] / occ[j][live, None]
        sq = np.zeros((mix, hmm.dim))
        for x, resp in per_seq:
            diff = x[:, None, :] - new_means[None]  # (T, M, D)
            sq += np.einsum("tm,tmd->md", resp[:, j, :], diff * diff)
        new_vars = gmm.variances.copy()
        new_vars[live] = np.maximum(sq[live] / occ[j][live, None], floor)
        hmm.states[j] = GaussianMixture(new_w, new_means, new_vars)
        row_mass = xi_sum[j].sum()
        if row_mass > 0:
            # band zeros survive: xi is exp(-inf) = 0 outside the legal band
            hmm.trans[j] = xi_sum[j] / row_mass


def baum_welch(hmm: Hmm, sequences, config: HmmTrainConfig = None,
               final_state_only: bool = None):
    """EM re-estimation over several sequences.

    Returns:
        (trained Hmm, TrainTrace). trace.log_likelihoods[i] is the total
        log-likelihood under the parameters entering iteration i, so the
        list is non-decreasing up to numerical slack.
    """
    cfg = config if config is not None else HmmTrainConfig()
    if final_state_only is None:
        final_state_only = cfg.final_state_only
    mats = _check_training_set(sequences, hmm.n_states)
    for m in mats:
        if m.shape[1] != hmm.dim:
            raise DimensionMismatch("sequence dim differs from model dim")
    floor = _variance_floor(np.vstack(mats), cfg)
    work = copy.deepcopy(hmm)
    trace = TrainTrace()
    for it in range(cfg.max_iters):
        per_seq, xi_sum, ll = _e_step(work, mats, final_state_only)
        trace.log_likelihoods.append(ll)
        if it > 0 and ll - trace.log_likelihoods[-2] < cfg.tol:
            trace.converged = True
            break
        _m_step(work, per_seq, xi_sum, floor, it, trace.collapses)
        trace.iterations += 1
    return work, trace


def train_speaker_model(speaker_id: str, sequences, feature_kind: str,
                        config: HmmTrainConfig = None, seed: int = 0,
                        config_hash: str = "-"):
    """init_hmm + baum_welch, wrapped as a SpeakerModel."""
    cfg = config if config is not None else HmmTrainConfig()
    hmm = init_hmm(sequences, cfg, seed)
    trained, trace = baum_welch(hmm, sequences, cfg)
    return SpeakerModel(speaker_id, trained, feature_kind, config_hash), trace


def identify(seq, models, final_state_only: bool = False):
    """Score a sequence against every model.

    Returns:
        (best_speaker_id, ranked) with ranked a list of (speaker_id,
        log_likelihood) sorted best first; log-likelihood ties rank the lower
        speaker id first.
    """
    models = list(models)
    if not models:
        raise EmptyModelSet("no models to identify against")
    kind = seq.kind if isinstance(seq, FeatureSequence) else None
    scored = []
    for model in models:
        if kind is not None and model.feature_kind != kind:
            raise FeatureKindMismatch(
                f"model {model.speaker_id} expects {model.feature_kind}, got {kind}")
        scored.append((model.speaker_id,
                       forward_log_likelihood(model.hmm, seq, final_state_only)))
    ranked = sorted(scored, key=lambda kv: (-kv[1], kv[0]))
    return ranked[0][0], ranked


def save_model(path, model: SpeakerModel) -> None:
    """Line-oriented text format, floats at 17 significant digits."""
    hmm = model.hmm
    fmt = lambda row: " ".join("%.17g" % v for v in np.atleast_1d(row))
    with open(path, "w") as fh:
        fh.write("speakerkit-hmm-model 1\n")
        fh.write(f"speaker_id {model.speaker_id}\n")
        fh.write(f"feature_kind {model.feature_kind}\n")
        fh.write(f"config_hash {model.config_hash}\n")
        fh.write(f"n_states {hmm.n_states}\n")
        fh.write(f"n_mix {hmm.states[0].n_mix}\n")
        fh.write(f"dim {hmm.dim}\n")
        fh.write(f"max_jump {hmm.max_jump}\n")
        fh.write(f"pi {fmt(hmm.pi)}\n")
        for i in range(hmm.n_states):
            fh.write(f"A{i} {fmt(hmm.trans[i])}\n")
        for j, gmm in enumerate(hmm.states):
            fh.write(f"S{j} weights {fmt(gmm.weights)}\n")
            for m in range(gmm.n_mix):
                fh.write(f"S{j} mean{m} {fmt(gmm.means[m])}\n")
                fh.write(f"S{j} var{m} {fmt(gmm.variances[m])}\n")


def load_model(path) -> SpeakerModel:
    """Inverse of save_model; validates the loaded structure."""
    try:
        with open(path) as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    except OSError as exc:
        raise MalformedFile(f"cannot read {path}: {exc}") from exc
    if not lines or not lines[0].startswith("speakerkit-hmm-model"):
        raise MalformedFile(f"{path}: not a model file")
    if lines[0].split()[-1] != "1":
        raise UnsupportedFormat(f"{path}: unknown model version")
    fields = {}
    rows = {}
    for line in lines[1:]:
        parts = line.split()
        if parts[0] in ("speaker_id", "feature_kind", "config_hash",
                        "n_states", "n_mix", "dim", "max_jump"):
            fields[parts[0]] = parts[1]
        elif parts[0] == "pi" or parts[0].startswith("A"):
            rows[parts[0]] = np.array(parts[1:], dtype=np.float64)
        elif parts[0].startswith("S"):
            rows[(parts[0], parts[1])] = np.array(parts[2:], dtype=np.float64)
        else:
            raise MalformedFile(f"{path}: unrecognized line {line[:40]!r}")
    try:
        n = int(fields["n_states"])
        mix = int(fields["n_mix"])
        dim = int(fields["dim"])
        trans = np.vstack([rows[f"A{i}"] for i in range(n)])
        states = []
        for j in range(n):
            weights = rows[(f"S{j}", "weights")]
            means = np.vstack([rows[(f"S{j}", f"mean{m}")] for m in range(mix)])
            variances = np.vstack([rows[(f"S{j}", f"var{m}")] for m in range(mix)])
            if means.shape != (mix, dim):
                raise MalformedFile(f"{path}: state {j} shape mismatch")
            states.append(GaussianMixture(weights, means, variances))
        hmm = Hmm(rows["pi"], trans, states, int(fields["max_jump"]))
        hmm.validate()
        return SpeakerModel(fields["speaker_id"], hmm, fields["feature_kind"],
                            fields["config_hash"])
    except (KeyError, ValueError) as exc:
        raise MalformedFile(f"{path}: incomplete model: {exc}") from exc
