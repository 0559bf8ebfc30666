"""Command line interface.

Subcommands: extract, train, identify, dtw, add-noise, evaluate, synth-corpus.
Every command takes --config to override the default pipeline configuration
with a JSON file; seeds make every run reproducible.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .audio import add_awgn, load_wav, write_wav
from .config import PipelineConfig, config_hash
from .corpus import load_corpus, save_corpus, synth_corpus
from .dtw import dtw_distance
from .errors import BadParams, FeatureKindMismatch, MalformedFile, SpeakerKitError
from .evaluate import extract_features, render_table, run_experiment
from .hmm import identify, load_model, save_model, train_speaker_model
from .mfcc import load_features, save_features


def _load_config(path) -> PipelineConfig:
    return PipelineConfig.from_file(path) if path else PipelineConfig()


def _is_wav(path) -> bool:
    try:
        with open(path, "rb") as fh:
            return fh.read(4) == b"RIFF"
    except OSError as exc:
        raise MalformedFile(f"cannot read {path}: {exc}") from exc


def _features_from(path, kind: str, config: PipelineConfig):
    """WAV input is extracted with the configured pipeline, .feat is loaded."""
    if _is_wav(path):
        return extract_features(load_wav(path), kind, config)
    seq = load_features(path)
    if seq.kind != kind:
        raise FeatureKindMismatch(f"{path} holds {seq.kind}, expected {kind}")
    return seq


def _cmd_extract(args) -> int:
    config = _load_config(args.config)
    seq = extract_features(load_wav(args.infile), args.kind, config)
    save_features(args.out, seq, config_hash(config))
    print(f"wrote {args.out}: {len(seq)} frames x {seq.dim} dims ({seq.kind})")
    return 0


def _cmd_synth_corpus(args) -> int:
    config = _load_config(args.config)
    corpus = synth_corpus(args.speakers or config.corpus.n_speakers,
                          args.utts or config.corpus.n_utts,
                          args.rate or config.corpus.sample_rate_hz,
                          args.seed)
    manifest = save_corpus(corpus, args.out)
    print(f"wrote {len(corpus.speakers)} speakers x {corpus.n_utts} utterances "
          f"under {manifest.parent}")
    return 0


def _cmd_add_noise(args) -> int:
    clip = load_wav(args.infile)
    write_wav(args.out, add_awgn(clip, args.snr_db, args.seed))
    print(f"wrote {args.out} at {args.snr_db:g} dB SNR (seed {args.seed})")
    return 0


def _cmd_dtw(args) -> int:
    config = _load_config(args.config)
    seq_a = _features_from(args.a, args.kind, config)
    seq_b = _features_from(args.b, args.kind, config)
    result = dtw_distance(seq_a, seq_b, config.dtw.normalize)
    print(f"distance {result.distance:.6f}  path length {len(result.path)}")
    if args.dump_matrices:
        out = Path(args.dump_matrices)
        out.mkdir(parents=True, exist_ok=True)
        np.savetxt(out / "local_cost.txt", result.local_cost, fmt="%.17g")
        np.savetxt(out / "accumulated_cost.txt", result.accumulated_cost,
                   fmt="%.17g")
        np.savetxt(out / "path.txt", result.path.pairs, fmt="%d")
        print(f"wrote matrices under {out}")
    return 0


def _cmd_train(args) -> int:
    config = _load_config(args.config)
    corpus = load_corpus(args.corpus)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    chash = config_hash(config)
    for i, speaker in enumerate(corpus.speakers):
        feats = [extract_features(corpus.get(speaker, u), args.kind, config)
                 for u in corpus.train_idx[speaker]]
        seed = int(np.random.SeedSequence([args.seed, i]).generate_state(1)[0])
        model, trace = train_speaker_model(speaker, feats, args.kind,
                                           config.hmm, seed, chash)
        save_model(out / f"{speaker}.model", model)
        print(f"{speaker}: {trace.iterations} iterations, "
              f"final log-likelihood {trace.log_likelihoods[-1]:.3f}"
              + (" (converged)" if trace.converged else ""))
    config.to_file(out / "config.json")
    print(f"wrote {len(corpus.speakers)} models under {out}")
    return 0


def _cmd_identify(args) -> int:
    model_dir = Path(args.models)
    paths = sorted(model_dir.glob("*.model"))
    if not paths:
        raise BadParams(f"no .model files under {model_dir}")
    models = [load_model(p) for p in paths]
    config_file = model_dir / "config.json"
    config = PipelineConfig.from_file(config_file) if config_file.exists() \
        else _load_config(args.config)
    kind = models[0].feature_kind
    seq = _features_from(args.infile, kind, config)
    best, ranked = identify(seq, models, config.hmm.final_state_only)
    print(f"identified: {best}")
    for speaker, ll in ranked:
        print(f"  {speaker}  {ll:.6f}")
    return 0


def _cmd_evaluate(args) -> int:
    config = _load_config(args.config)
    if args.corpus.startswith("synth:"):
        corpus_seed = int(args.corpus.split(":", 1)[1])
        corpus = synth_corpus(config.corpus.n_speakers, config.corpus.n_utts,
                              config.corpus.sample_rate_hz, corpus_seed)
    else:
        corpus = load_corpus(args.corpus)
    report = run_experiment(corpus, config, args.seed, args.backend)
    if args.out:
        report.save(args.out)
    print(render_table(report))
    if args.out:
        print(f"report written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speakerkit",
        description="speaker identification with wavelet-subband MFCC features")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="feature-extract one WAV file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=("mfcc", "wavelet_mfcc"), default="mfcc")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("synth-corpus", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--speakers", type=int)
    p.add_argument("--utts", type=int)
    p.add_argument("--rate", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_synth_corpus)

    p = sub.add_parser("add-noise", help="add white Gaussian noise to a WAV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--snr-db", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_add_noise)

    p = sub.add_parser("dtw", help="align two utterances or feature files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--kind", choices=("mfcc", "wavelet_mfcc"), default="mfcc")
    p.add_argument("--dump-matrices", metavar="DIR")
    p.add_argument("--config")
    p.set_defaults(func=_cmd_dtw)

    p = sub.add_parser("train", help="train one model per corpus speaker")
    p.add_argument("--corpus", required=True)
    p.add_argument("--kind", choices=("mfcc", "wavelet_mfcc"), default="wavelet_mfcc")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("identify", help="score one utterance against models")
    p.add_argument("--models", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_identify)

    p = sub.add_parser("evaluate", help="run the four-cell noise experiment")
    p.add_argument("--corpus", required=True,
                   help="corpus directory, or synth:SEED for an in-memory corpus")
    p.add_argument("--backend", choices=("hmm", "dtw"), default="hmm")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpeakerKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
