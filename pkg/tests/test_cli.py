"""End-to-end runs of every CLI subcommand via main(argv)."""

import json

import numpy as np
import pytest

from speakerkit import (
    CorpusConfig,
    HmmTrainConfig,
    PipelineConfig,
    load_corpus,
    load_features,
    load_wav,
    save_corpus,
    write_wav,
)
from speakerkit.cli import main


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory, small_corpus):
    root = tmp_path_factory.mktemp("corpus")
    save_corpus(small_corpus, root)
    return root


@pytest.fixture(scope="module")
def fast_config_file(tmp_path_factory, fast_pipeline_config):
    path = tmp_path_factory.mktemp("cfg") / "config.json"
    fast_pipeline_config.to_file(path)
    return path


@pytest.fixture(scope="module")
def wav_file(tmp_path_factory, small_corpus):
    path = tmp_path_factory.mktemp("wavs") / "probe.wav"
    write_wav(path, small_corpus.get("spk00", 4))
    return path


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip()


def test_synth_corpus_command(tmp_path, capsys):
    out = tmp_path / "corp"
    rc = main(["synth-corpus", "--out", str(out), "--speakers", "2",
               "--utts", "2", "--seed", "3"])
    assert rc == 0
    assert (out / "corpus.json").exists()
    back = load_corpus(out)
    assert back.speakers == ["spk00", "spk01"]
    assert "2 speakers x 2 utterances" in capsys.readouterr().out


def test_extract_command(tmp_path, wav_file, capsys):
    out = tmp_path / "probe.feat"
    rc = main(["extract", "--in", str(wav_file), "--out", str(out),
               "--kind", "wavelet_mfcc"])
    assert rc == 0
    seq = load_features(out)
    assert seq.kind == "wavelet_mfcc"
    assert seq.dim == 52
    assert "52 dims" in capsys.readouterr().out


def test_add_noise_command(tmp_path, wav_file, capsys):
    out = tmp_path / "noisy.wav"
    rc = main(["add-noise", "--in", str(wav_file), "--out", str(out),
               "--snr-db", "10", "--seed", "5"])
    assert rc == 0
    clean = load_wav(wav_file)
    noisy = load_wav(out)
    assert len(noisy.samples) == len(clean.samples)
    assert not np.array_equal(noisy.samples, clean.samples)
    assert "10 dB" in capsys.readouterr().out


def test_dtw_command_self_distance(tmp_path, wav_file, capsys):
    rc = main(["dtw", "--a", str(wav_file), "--b", str(wav_file)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "distance 0.000000" in out


def test_dtw_command_dump_matrices(tmp_path, wav_file, capsys):
    dump = tmp_path / "mats"
    rc = main(["dtw", "--a", str(wav_file), "--b", str(wav_file),
               "--kind", "mfcc", "--dump-matrices", str(dump)])
    assert rc == 0
    local = np.loadtxt(dump / "local_cost.txt")
    acc = np.loadtxt(dump / "accumulated_cost.txt")
    path = np.loadtxt(dump / "path.txt", dtype=int)
    assert local.shape == acc.shape
    assert path[0].tolist() == [0, 0]
    assert path[-1].tolist() == [local.shape[0] - 1, local.shape[1] - 1]


def test_dtw_command_accepts_feature_files(tmp_path, wav_file, capsys):
    feat = tmp_path / "x.feat"
    assert main(["extract", "--in", str(wav_file), "--out", str(feat)]) == 0
    rc = main(["dtw", "--a", str(feat), "--b", str(feat)])
    assert rc == 0
    assert "distance 0.000000" in capsys.readouterr().out


def test_dtw_command_rejects_kind_mismatch(tmp_path, wav_file, capsys):
    feat = tmp_path / "x.feat"
    assert main(["extract", "--in", str(wav_file), "--out", str(feat),
                 "--kind", "wavelet_mfcc"]) == 0
    rc = main(["dtw", "--a", str(feat), "--b", str(feat), "--kind", "mfcc"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_train_and_identify_commands(tmp_path, corpus_dir, fast_config_file,
                                     wav_file, capsys):
    models = tmp_path / "models"
    rc = main(["train", "--corpus", str(corpus_dir), "--kind", "wavelet_mfcc",
               "--out", str(models), "--seed", "0",
               "--config", str(fast_config_file)])
    assert rc == 0
    assert sorted(p.name for p in models.glob("*.model")) == \
        ["spk00.model", "spk01.model", "spk02.model"]
    assert (models / "config.json").exists()
    train_out = capsys.readouterr().out
    assert "3 models" in train_out

    # the probe WAV is spk00's held-out utterance
    rc = main(["identify", "--models", str(models), "--in", str(wav_file)])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("identified: spk00")
    assert out.count("spk") >= 4  # best line plus one ranked line per model


def test_evaluate_command_with_synth_corpus(tmp_path, fast_pipeline_config,
                                            capsys):
    cfg_path = tmp_path / "cfg.json"
    fast_pipeline_config.to_file(cfg_path)
    report_path = tmp_path / "report.json"
    rc = main(["evaluate", "--corpus", "synth:7", "--backend", "dtw",
               "--out", str(report_path), "--seed", "0",
               "--config", str(cfg_path)])
    assert rc == 0
    data = json.loads(report_path.read_text())
    assert data["backend"] == "dtw"
    assert len(data["conditions"]) == 4
    out = capsys.readouterr().out
    assert "backend: dtw" in out
    assert "report written" in out


def test_evaluate_command_on_disk_corpus(tmp_path, corpus_dir,
                                         fast_config_file, capsys):
    rc = main(["evaluate", "--corpus", str(corpus_dir), "--backend", "dtw",
               "--config", str(fast_config_file)])
    assert rc == 0
    assert "clean" in capsys.readouterr().out


def test_missing_input_is_a_clean_error(tmp_path, capsys):
    rc = main(["extract", "--in", str(tmp_path / "nope.wav"),
               "--out", str(tmp_path / "x.feat")])
    assert rc == 2
    err = capsys.readouterr().err
    assert err.startswith("error:")


def test_missing_dtw_input_is_a_clean_error(tmp_path, capsys):
    # the WAV-or-feat sniffing path must not leak a raw OSError
    rc = main(["dtw", "--a", str(tmp_path / "gone.feat"),
               "--b", str(tmp_path / "gone.wav")])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")


def test_config_file_round_trip(tmp_path):
    cfg = PipelineConfig(
        hmm=HmmTrainConfig(n_states=3, n_mix=2),
        corpus=CorpusConfig(n_speakers=4, n_utts=6, sample_rate_hz=8000),
    )
    path = tmp_path / "cfg.json"
    cfg.to_file(path)
    back = PipelineConfig.from_file(path)
    assert back == cfg
