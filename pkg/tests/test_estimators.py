"""Estimator wrappers: sklearn conventions over the functional core."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from speakerkit import (
    DtwSpeakerClassifier,
    HmmSpeakerClassifier,
    HybridConfig,
    MfccConfig,
    MfccTransformer,
    WaveletMfccTransformer,
    extract_mfcc,
    extract_wavelet_mfcc,
)


@pytest.fixture(scope="module")
def clip_list(small_corpus):
    return [small_corpus.get(s, 0) for s in small_corpus.speakers]


def _blob_sequences(rng, center, n_seqs, t_len=25, dim=3):
    return [center + 0.3 * rng.standard_normal((t_len, dim)) for _ in range(n_seqs)]


# --- transformers ---


def test_mfcc_transformer_matches_functional_path(clip_list):
    tf = MfccTransformer().fit(clip_list)
    out = tf.transform(clip_list)
    assert tf.n_features_out_ == 13
    for clip, mat in zip(clip_list, out):
        want = extract_mfcc(clip.samples, clip.sample_rate_hz, MfccConfig())
        assert np.array_equal(mat, want.vectors)


def test_wavelet_transformer_matches_functional_path(clip_list):
    tf = WaveletMfccTransformer().fit(clip_list)
    out = tf.transform(clip_list)
    assert tf.n_features_out_ == 52
    for clip, mat in zip(clip_list, out):
        want = extract_wavelet_mfcc(clip.samples, clip.sample_rate_hz,
                                    HybridConfig())
        assert np.array_equal(mat, want.vectors)


def test_transformers_accept_raw_arrays(clip_list):
    tf = MfccTransformer(sample_rate_hz=8000).fit([])
    out = tf.transform([c.samples for c in clip_list])
    assert len(out) == len(clip_list)
    assert all(mat.shape[1] == 13 for mat in out)


def test_transformer_requires_fit(clip_list):
    with pytest.raises(NotFittedError):
        MfccTransformer().transform(clip_list)
    with pytest.raises(NotFittedError):
        WaveletMfccTransformer().transform(clip_list)


def test_transformer_param_round_trip():
    tf = MfccTransformer(n_ceps=10, deltas=1)
    params = tf.get_params()
    assert params["n_ceps"] == 10
    twin = MfccTransformer().set_params(**params)
    assert twin.get_params() == params
    cloned = clone(tf)
    assert cloned.get_params() == params
    assert cloned.fit([]).n_features_out_ == 20


def test_wavelet_transformer_channel_param(clip_list):
    tf = WaveletMfccTransformer(channels=("CA3", "CD3")).fit([])
    assert tf.n_features_out_ == 26
    out = tf.transform(clip_list[:1])
    assert out[0].shape[1] == 26


# --- DTW classifier ---


def test_dtw_classifier_happy_path(rng):
    x_a = _blob_sequences(rng, -2.0, 3)
    x_b = _blob_sequences(rng, 2.0, 3)
    clf = DtwSpeakerClassifier().fit(x_a + x_b, ["a"] * 3 + ["b"] * 3)
    assert list(clf.classes_) == ["a", "b"]
    probes = [x_a[0] + 0.01, x_b[0] + 0.01]
    assert list(clf.predict(probes)) == ["a", "b"]


def test_dtw_classifier_distance_matrix(rng):
    x_a = _blob_sequences(rng, -2.0, 2)
    x_b = _blob_sequences(rng, 2.0, 2)
    clf = DtwSpeakerClassifier().fit(x_a + x_b, [0, 0, 1, 1])
    dist = clf.transform_distances([x_a[0]])
    assert dist.shape == (1, 4)
    assert dist[0, 0] == 0.0  # itself is among the templates
    assert dist[0, :2].min() < dist[0, 2:].min()


def test_dtw_classifier_keeps_label_dtype(rng):
    seqs = _blob_sequences(rng, -1.0, 2) + _blob_sequences(rng, 1.0, 2)
    clf = DtwSpeakerClassifier().fit(seqs, [10, 10, 20, 20])
    pred = clf.predict([seqs[3]])
    assert pred[0] == 20 and pred.dtype.kind == "i"


def test_dtw_classifier_requires_fit(rng):
    with pytest.raises(NotFittedError):
        DtwSpeakerClassifier().predict(_blob_sequences(rng, 0.0, 1))


# --- HMM classifier ---


def test_hmm_classifier_happy_path(rng):
    x_a = _blob_sequences(rng, -2.0, 4)
    x_b = _blob_sequences(rng, 2.0, 4)
    clf = HmmSpeakerClassifier(n_states=2, n_mix=1, max_iters=8, seed=0)
    clf.fit(x_a + x_b, ["a"] * 4 + ["b"] * 4)
    probes = [rng.normal(-2.0, 0.3, (25, 3)), rng.normal(2.0, 0.3, (25, 3))]
    assert list(clf.predict(probes)) == ["a", "b"]
    assert clf.score(probes, ["a", "b"]) == 1.0


def test_hmm_classifier_decision_function(rng):
    x_a = _blob_sequences(rng, -2.0, 4)
    x_b = _blob_sequences(rng, 2.0, 4)
    clf = HmmSpeakerClassifier(n_states=2, n_mix=1, max_iters=8, seed=0)
    clf.fit(x_a + x_b, ["a"] * 4 + ["b"] * 4)
    scores = clf.decision_function([x_a[0], x_b[0]])
    assert scores.shape == (2, 2)
    assert scores[0, 0] > scores[0, 1]
    assert scores[1, 1] > scores[1, 0]


def test_hmm_classifier_fit_is_seeded(rng):
    seqs = _blob_sequences(rng, -1.0, 4) + _blob_sequences(rng, 1.0, 4)
    labels = [0] * 4 + [1] * 4
    a = HmmSpeakerClassifier(n_states=2, n_mix=2, max_iters=4, seed=7).fit(seqs, labels)
    b = HmmSpeakerClassifier(n_states=2, n_mix=2, max_iters=4, seed=7).fit(seqs, labels)
    for ma, mb in zip(a.models_, b.models_):
        for ga, gb in zip(ma.hmm.states, mb.hmm.states):
            assert np.array_equal(ga.means, gb.means)


def test_hmm_classifier_exposes_traces(rng):
    seqs = _blob_sequences(rng, 0.0, 4)
    clf = HmmSpeakerClassifier(n_states=2, n_mix=1, max_iters=5, seed=0)
    clf.fit(seqs, ["only"] * 4)
    assert set(clf.traces_) == {"only"}
    assert clf.traces_["only"].log_likelihoods


def test_hmm_classifier_requires_fit(rng):
    with pytest.raises(NotFittedError):
        HmmSpeakerClassifier().predict(_blob_sequences(rng, 0.0, 1))


def test_hmm_classifier_param_round_trip():
    clf = HmmSpeakerClassifier(n_states=3, n_mix=2, seed=5)
    params = clf.get_params()
    twin = clone(clf)
    assert twin.get_params() == params
    assert params["n_states"] == 3 and params["seed"] == 5
