import numpy as np
import pytest

from speakerkit import (
    AudioClip,
    CorpusConfig,
    HmmTrainConfig,
    MfccConfig,
    PipelineConfig,
    synth_corpus,
)


@pytest.fixture(scope="session")
def small_corpus():
    """Three speakers, five utterances each. Shared by the slower tests."""
    return synth_corpus(n_speakers=3, n_utts=5, sample_rate_hz=8000, seed=7)


@pytest.fixture(scope="session")
def fast_pipeline_config():
    """Config sized for test speed, not accuracy."""
    return PipelineConfig(
        hmm=HmmTrainConfig(n_states=3, n_mix=2, max_iters=8, tol=1e-3),
        corpus=CorpusConfig(n_speakers=3, n_utts=5, sample_rate_hz=8000),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tone_clip():
    """One second of a 1 kHz sine at 8 kHz, amplitude 0.5."""
    rate = 8000
    t = np.arange(rate) / rate
    return AudioClip(0.5 * np.sin(2.0 * np.pi * 1000.0 * t), rate)


@pytest.fixture
def speech_like_clip(rng):
    """Filtered pulse train, long enough for every feature pipeline."""
    rate = 8000
    n = 12800
    x = np.zeros(n)
    x[::64] = 1.0
    x += 0.01 * rng.standard_normal(n)
    kernel = np.exp(-np.arange(40) / 8.0)
    x = np.convolve(x, kernel, mode="same")
    x /= np.abs(x).max() * 1.25
    return AudioClip(x, rate)


@pytest.fixture
def default_mfcc_config():
    return MfccConfig()
