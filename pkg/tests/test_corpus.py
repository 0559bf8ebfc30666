"""Synthetic corpus generation and the on-disk corpus layout."""

import json

import numpy as np
import pytest

from speakerkit import (
    BadParams,
    MalformedFile,
    UnsupportedFormat,
    base_fundamentals,
    default_split,
    load_corpus,
    save_corpus,
    synth_corpus,
)


def test_same_seed_is_bit_identical():
    a = synth_corpus(3, 3, 8000, seed=11)
    b = synth_corpus(3, 3, 8000, seed=11)
    assert a.speakers == b.speakers
    for key, clip in a.clips.items():
        assert np.array_equal(clip.samples, b.clips[key].samples)


def test_different_seeds_differ():
    a = synth_corpus(2, 2, 8000, seed=1)
    b = synth_corpus(2, 2, 8000, seed=2)
    key = ("spk00", 0)
    assert not np.array_equal(a.clips[key].samples, b.clips[key].samples)


def test_speakers_do_not_share_a_generator():
    corpus = synth_corpus(3, 2, 8000, seed=0)
    x = corpus.get("spk00", 0).samples
    y = corpus.get("spk01", 0).samples
    n = min(len(x), len(y))
    assert not np.array_equal(x[:n], y[:n])


def test_fundamental_grid_spacing():
    # 38 speakers is the densest grid that keeps gaps above 5 Hz
    for n in (2, 5, 10, 30, 38):
        f0 = base_fundamentals(n)
        assert f0[0] == 90.0
        assert f0[-1] == 280.0
        assert np.all(np.diff(f0) > 5.0)


def test_too_many_speakers_rejected():
    # 39 speakers lands the grid gap exactly on the 5 Hz limit
    with pytest.raises(BadParams):
        synth_corpus(39, 2, 8000, seed=0)


def test_too_few_speakers_rejected():
    with pytest.raises(BadParams):
        synth_corpus(1, 2, 8000, seed=0)


def test_low_sample_rate_rejected():
    with pytest.raises(BadParams):
        synth_corpus(3, 2, 800, seed=0)


def test_single_utterance_rejected():
    with pytest.raises(BadParams):
        synth_corpus(3, 1, 8000, seed=0)


def test_split_rule():
    assert default_split(15) == (list(range(10)), [10, 11, 12, 13, 14])
    assert default_split(5) == ([0, 1, 2, 3], [4])
    assert default_split(2) == ([0], [1])


def test_clip_properties(small_corpus):
    assert small_corpus.n_utts == 5
    for key, clip in small_corpus.clips.items():
        assert clip.sample_rate_hz == 8000
        assert np.abs(clip.samples).max() <= 1.0
        # duration jitter stays within +/-10% of the 1.6 s base
        assert 1.4 <= clip.duration_s <= 1.8


def test_utterances_of_one_speaker_vary(small_corpus):
    a = small_corpus.get("spk00", 0).samples
    b = small_corpus.get("spk00", 1).samples
    n = min(len(a), len(b))
    assert not np.array_equal(a[:n], b[:n])


def test_save_load_round_trip(tmp_path, small_corpus):
    manifest = save_corpus(small_corpus, tmp_path / "corp")
    assert manifest.name == "corpus.json"
    back = load_corpus(tmp_path / "corp")
    assert back.speakers == small_corpus.speakers
    assert back.sample_rate_hz == 8000
    assert back.train_idx == small_corpus.train_idx
    assert back.test_idx == small_corpus.test_idx
    for key, clip in small_corpus.clips.items():
        # disk round trip quantizes to the int16 grid
        want = np.rint(clip.samples * 32768.0).clip(-32768, 32767) / 32768.0
        assert np.array_equal(back.clips[key].samples, want)


def test_load_missing_manifest(tmp_path):
    with pytest.raises(MalformedFile):
        load_corpus(tmp_path)


def test_load_wrong_format_marker(tmp_path):
    (tmp_path / "corpus.json").write_text(json.dumps({"format": "other"}))
    with pytest.raises(MalformedFile):
        load_corpus(tmp_path)


def test_load_unknown_version(tmp_path):
    blob = {"format": "speakerkit-corpus", "version": 2}
    (tmp_path / "corpus.json").write_text(json.dumps(blob))
    with pytest.raises(UnsupportedFormat):
        load_corpus(tmp_path)


def test_load_incomplete_manifest(tmp_path):
    blob = {"format": "speakerkit-corpus", "version": 1}
    (tmp_path / "corpus.json").write_text(json.dumps(blob))
    with pytest.raises(MalformedFile):
        load_corpus(tmp_path)
