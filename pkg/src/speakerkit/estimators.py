"""scikit-learn flavored wrappers around the functional layer.

The transformers turn audio into lists of (T, D) frame matrices; the
classifiers fit one template set or one model per label and predict labels.
All follow the usual contract: __init__ stores parameters verbatim,
validation happens in fit, fitted state lives in trailing-underscore
attributes, and get_params/set_params/clone work out of the box.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .config import HmmTrainConfig
from .dtw import dtw_classify, dtw_distance
from .errors import EmptyTrainingSet
from .features import HybridConfig, extract_wavelet_mfcc
from .hmm import forward_log_likelihood, identify, train_speaker_model
from .mfcc import MfccConfig, extract_mfcc
from .validation import as_audio_clip, as_feature_matrix, check_consistent_dims


def _check_fitted(estimator, attr: str):
    if not hasattr(estimator, attr):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet. "
            "Call 'fit' before using this estimator.")


class MfccTransformer(BaseEstimator, TransformerMixin):
    """Cepstral features for a list of clips or raw sample arrays."""

    def __init__(self, sample_rate_hz=8000, frame_len=256, overlap=100,
                 n_fft=256, n_filters=20, n_ceps=13, fmin_hz=0.0, fmax_hz=None,
                 window="hamming", log_floor=1e-10, pre_emphasis=0.0, deltas=0):
        self.sample_rate_hz = sample_rate_hz
        self.frame_len = frame_len
        self.overlap = overlap
        self.n_fft = n_fft
        self.n_filters = n_filters
        self.n_ceps = n_ceps
        self.fmin_hz = fmin_hz
        self.fmax_hz = fmax_hz
        self.window = window
        self.log_floor = log_floor
        self.pre_emphasis = pre_emphasis
        self.deltas = deltas

    def _config(self) -> MfccConfig:
        return MfccConfig(
            frame_len=self.frame_len, overlap=self.overlap, n_fft=self.n_fft,
            n_filters=self.n_filters, n_ceps=self.n_ceps, fmin_hz=self.fmin_hz,
            fmax_hz=self.fmax_hz, window=self.window, log_floor=self.log_floor,
            pre_emphasis=self.pre_emphasis, deltas=self.deltas)

    def fit(self, X, y=None):
        config = self._config()
        self.n_features_out_ = config.n_ceps * (1 + config.deltas)
        return self

    def transform(self, X):
        _check_fitted(self, "n_features_out_")
        config = self._config()
        out = []
        for item in X:
            clip = as_audio_clip(item, self.sample_rate_hz)
            out.append(extract_mfcc(clip.samples, clip.sample_rate_hz, config).vectors)
        return out


class WaveletMfccTransformer(BaseEstimator, TransformerMixin):
    """Hybrid wavelet-subband cepstral features."""

    def __init__(self, sample_rate_hz=8000, dwt_level=3, channels=None,
                 use_reconstruction=False, frame_len=256, overlap=100,
                 n_fft=256, n_filters=20, n_ceps=13, fmin_hz=0.0, fmax_hz=None,
                 window="hamming", log_floor=1e-10, pre_emphasis=0.0, deltas=0):
        self.sample_rate_hz = sample_rate_hz
        self.dwt_level = dwt_level
        self.channels = channels
        self.use_reconstruction = use_reconstruction
        self.frame_len = frame_len
        self.overlap = overlap
        self.n_fft = n_fft
        self.n_filters = n_filters
        self.n_ceps = n_ceps
        self.fmin_hz = fmin_hz
        self.fmax_hz = fmax_hz
        self.window = window
        self.log_floor = log_floor
        self.pre_emphasis = pre_emphasis
        self.deltas = deltas

    def _config(self) -> HybridConfig:
        mfcc = MfccConfig(
            frame_len=self.frame_len, overlap=self.overlap, n_fft=self.n_fft,
            n_filters=self.n_filters, n_ceps=self.n_ceps, fmin_hz=self.fmin_hz,
            fmax_hz=self.fmax_hz, window=self.window, log_floor=self.log_floor,
            pre_emphasis=self.pre_emphasis, deltas=self.deltas)
        return HybridConfig(dwt_level=self.dwt_level, channels=self.channels,
                            use_reconstruction=self.use_reconstruction, mfcc=mfcc)

    def fit(self, X, y=None):
        config = self._config()
        self.n_features_out_ = (len(config.channels)
                                * config.mfcc.n_ceps * (1 + config.mfcc.deltas))
        return self

    def transform(self, X):
        _check_fitted(self, "n_features_out_")
        config = self._config()
        out = []
        for item in X:
            clip = as_audio_clip(item, self.sample_rate_hz)
            out.append(extract_wavelet_mfcc(clip.samples, clip.sample_rate_hz,
                                            config).vectors)
        return out


class DtwSpeakerClassifier(BaseEstimator, ClassifierMixin):
    """Nearest-template classification under dynamic time warping."""

    def __init__(self, normalize=False):
        self.normalize = normalize

    def fit(self, X, y):
        mats = [as_feature_matrix(x) for x in X]
        if not mats:
            raise EmptyTrainingSet("no template sequences")
        if len(mats) != len(y):
            raise EmptyTrainingSet("X and y lengths differ")
        check_consistent_dims(mats)
        self.templates_ = list(zip(y, mats))
        self.classes_ = np.unique(np.asarray(y))
        return self

    def predict(self, X):
        _check_fitted(self, "templates_")
        return np.array([dtw_classify(as_feature_matrix(x), self.templates_,
                                      self.normalize)[0] for x in X])

    def transform_distances(self, X):
        """(n_samples, n_templates) distance matrix, template order as fitted."""
        _check_fitted(self, "templates_")
        return np.array([
            [dtw_distance(as_feature_matrix(x), tpl, self.normalize).distance
             for _, tpl in self.templates_]
            for x in X])


class HmmSpeakerClassifier(BaseEstimator, ClassifierMixin):
    """One left-to-right GMM-HMM per label, maximum-likelihood decision."""

    def __init__(self, n_states=4, n_mix=8, max_jump=1, max_iters=50, tol=1e-4,
                 self_loop_init=0.8, var_floor_scale=1e-3, var_floor_abs=1e-6,
                 final_state_only=False, seed=0):
        self.n_states = n_states
        self.n_mix = n_mix
        self.max_jump = max_jump
        self.max_iters = max_iters
        self.tol = tol
        self.self_loop_init = self_loop_init
        self.var_floor_scale = var_floor_scale
        self.var_floor_abs = var_floor_abs
        self.final_state_only = final_state_only
        self.seed = seed

    def _config(self) -> HmmTrainConfig:
        return HmmTrainConfig(
            n_states=self.n_states, n_mix=self.n_mix, max_jump=self.max_jump,
            max_iters=self.max_iters, tol=self.tol,
            var_floor_scale=self.var_floor_scale,
            var_floor_abs=self.var_floor_abs,
            self_loop_init=self.self_loop_init,
            final_state_only=self.final_state_only)

    def fit(self, X, y):
        mats = [as_feature_matrix(x) for x in X]
        if not mats:
            raise EmptyTrainingSet("no training sequences")
        if len(mats) != len(y):
            raise EmptyTrainingSet("X and y lengths differ")
        check_consistent_dims(mats)
        config = self._config()
        labels = np.asarray(y)
        self.classes_ = np.unique(labels)
        self.models_ = []
        self.traces_ = {}
        for i, label in enumerate(self.classes_):
            group = [m for m, lab in zip(mats, labels) if lab == label]
            model, trace = train_speaker_model(
                str(label), group, "mfcc", config,
                seed=int(np.random.SeedSequence([self.seed, i]).generate_state(1)[0]))
            self.models_.append(model)
            self.traces_[str(label)] = trace
        return self

    def predict(self, X):
        _check_fitted(self, "models_")
        lookup = {str(c): c for c in self.classes_}
        labels = []
        for x in X:
            best, _ = identify(as_feature_matrix(x), self.models_,
                               self.final_state_only)
            labels.append(lookup[best])
        return np.array(labels)

    def decision_function(self, X):
        """(n_samples, n_classes) log-likelihood matrix, classes_ order."""
        _check_fitted(self, "models_")
        return np.array([
            [forward_log_likelihood(m.hmm, as_feature_matrix(x),
                                    self.final_state_only)
             for m in self.models_]
            for x in X])
