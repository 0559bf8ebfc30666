"""Speaker identification with wavelet-subband MFCC features.

Functional layer: audio, dwt, mfcc, features, dtw, hmm, corpus, evaluate.
Estimator facade: speakerkit.estimators (scikit-learn style).
"""

__version__ = "0.1.0"

from .audio import (
    AudioClip,
    FrameSequence,
    add_awgn,
    frame_signal,
    inject_noise,
    load_wav,
    write_wav,
)
from .config import (
    CorpusConfig,
    DtwConfig,
    HmmTrainConfig,
    NoiseConfig,
    PipelineConfig,
    config_hash,
)
from .corpus import (
    Corpus,
    base_fundamentals,
    default_split,
    load_corpus,
    save_corpus,
    synth_corpus,
)
from .dtw import DtwResult, WarpPath, dtw_classify, dtw_distance, validate_path
from .dwt import (
    WaveletDecomposition,
    WaveletFilterPair,
    dump_coefficients,
    dwt_step,
    idwt_step,
    make_db8_filters,
    max_level,
    wavedec,
    waverec,
)
from .errors import (
    BadLength,
    BadParams,
    DegenerateBand,
    DimensionMismatch,
    EmptyModelSet,
    EmptySequence,
    EmptySignal,
    EmptyTemplateSet,
    EmptyTrainingSet,
    FeatureKindMismatch,
    LengthMismatch,
    LevelTooDeep,
    MalformedFile,
    NegativeFrequency,
    SequenceTooShort,
    SignalTooShort,
    SpeakerKitError,
    UnsupportedFormat,
    ZeroSignalPower,
)
from .estimators import (
    DtwSpeakerClassifier,
    HmmSpeakerClassifier,
    MfccTransformer,
    WaveletMfccTransformer,
)
from .evaluate import (
    EvalReport,
    derive_seed,
    extract_features,
    render_table,
    run_experiment,
)
from .features import HybridConfig, default_channels, extract_wavelet_mfcc
from .hmm import (
    GaussianMixture,
    Hmm,
    SpeakerModel,
    TrainTrace,
    baum_welch,
    forward_log_likelihood,
    identify,
    init_hmm,
    load_model,
    log_gmm_pdf,
    save_model,
    train_speaker_model,
    viterbi,
)
from .mfcc import (
    FeatureSequence,
    MelFilterbank,
    MfccConfig,
    build_mel_filterbank,
    dct_ii,
    extract_mfcc,
    load_features,
    mel_inverse,
    mel_scale,
    save_features,
)

__all__ = [name for name in dir() if not name.startswith("_")]
