import json
import subprocess
import sys

import numpy as np
import pytest

from prosovc.cli import main
from prosovc.formats import FTB_PROSODY, read_ftb
from prosovc.signal_core import load_wav, save_wav
from prosovc.synth import sawtooth_wave, silence, toy_utterance, write_alignment

CLI = [sys.executable, "-m", "prosovc"]


@pytest.fixture(scope="module")
def ckpt(demo_corpus, tmp_path_factory):
    root, _ = demo_corpus
    path = tmp_path_factory.mktemp("ckpt") / "toy.pfck"
    rc = main(["train-toy", "--corpus", str(root), "--epochs", "2", "--seed", "5",
               "--ckpt", str(path)])
    assert rc == 0
    return path


@pytest.fixture(scope="module")
def pair_files(conversion_pair, tmp_path_factory):
    src, src_align, trg = conversion_pair
    root = tmp_path_factory.mktemp("pair")
    save_wav(src, root / "src.wav")
    write_alignment(src_align, root / "src.tsv")
    save_wav(trg, root / "trg.wav")
    return root


# -- extract -----------------------------------------------------------------

def test_extract_tone(tmp_path):
    save_wav(sawtooth_wave(220.0, 1.0), tmp_path / "tone.wav")
    rc = main(["extract", "--in", str(tmp_path / "tone.wav"), "--out", str(tmp_path / "tone")])
    assert rc == 0
    kind, track = read_ftb(tmp_path / "tone.prosody.ftb")
    assert kind == FTB_PROSODY
    median = np.median(track.log_f0[track.voiced])
    assert abs(median - 5.394) <= 0.03
    _, mel = read_ftb(tmp_path / "tone.mel.ftb")
    assert mel.shape[0] == track.n_frames
    _, spk = read_ftb(tmp_path / "tone.spk.ftb")
    assert np.linalg.norm(spk) == pytest.approx(1.0, abs=1e-5)
    _, units = read_ftb(tmp_path / "tone.units.ftb")
    assert units[:, 1].sum() == track.n_frames


def test_extract_silence(tmp_path):
    save_wav(silence(1.0), tmp_path / "sil.wav")
    rc = main(["extract", "--in", str(tmp_path / "sil.wav"), "--out", str(tmp_path / "sil")])
    assert rc == 0
    _, track = read_ftb(tmp_path / "sil.prosody.ftb")
    assert not track.voiced.any()
    assert not track.log_f0.any()


def test_extract_with_alignment(tmp_path):
    wave, align = toy_utterance(seed=0, duration=1.0)
    save_wav(wave, tmp_path / "u.wav")
    write_alignment(align, tmp_path / "u.tsv")
    rc = main(["extract", "--in", str(tmp_path / "u.wav"), "--out", str(tmp_path / "u"),
               "--alignment", str(tmp_path / "u.tsv")])
    assert rc == 0
    _, prior = read_ftb(tmp_path / "u.prior.ftb")
    _, mel = read_ftb(tmp_path / "u.mel.ftb")
    assert prior.shape == mel.shape


def test_extract_missing_file_exit_2(tmp_path):
    proc = subprocess.run(CLI + ["extract", "--in", str(tmp_path / "nope.wav"),
                                 "--out", str(tmp_path / "x")],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "UnreadableFile" in proc.stderr


# -- convert ------------------------------------------------------------------

def test_convert_end_to_end(ckpt, pair_files, tmp_path):
    out_wav = tmp_path / "out.wav"
    report_path = tmp_path / "report.json"
    rc = main(["convert", "--src", str(pair_files / "src.wav"), "--trg", str(pair_files / "trg.wav"),
               "--src-align", str(pair_files / "src.tsv"), "--ckpt", str(ckpt),
               "--octave", "0.5", "--gl-iters", "4",
               "--out", str(out_wav), "--report", str(report_path)])
    assert rc == 0
    report = json.loads(report_path.read_text())
    assert report["requested_mean_hz"] == pytest.approx(report["mu_trg_hz"] * 2 ** 0.5, rel=1e-9)
    wave = load_wav(out_wav)
    assert len(wave) == (report["out_frames"] - 1) * 256
    assert 0.66 <= report["rc_clamped"] <= 1.33


def test_convert_rate_override_clamped(ckpt, pair_files, tmp_path):
    out_wav = tmp_path / "out.wav"
    report_path = tmp_path / "report.json"
    rc = main(["convert", "--src", str(pair_files / "src.wav"), "--trg", str(pair_files / "trg.wav"),
               "--src-align", str(pair_files / "src.tsv"), "--ckpt", str(ckpt),
               "--rate", "2.0", "--rate-control", "--gl-iters", "2",
               "--out", str(out_wav), "--report", str(report_path)])
    assert rc == 0
    report = json.loads(report_path.read_text())
    assert report["applied_rate"] == pytest.approx(1.33)
    expected = int(np.floor(report["source_frames"] / 1.33 + 0.5))
    assert report["out_frames"] == expected


def test_convert_identity_pair_fixed_point(ckpt, pair_files):
    # same utterance as source and target: Eq.-style transfer is the identity,
    # so the conditioning track equals the source prosody bit for bit
    from prosovc.encoders import load_alignment
    from prosovc.pipeline import convert, extract_features, load_bundle

    bundle = load_bundle(ckpt)
    src = load_wav(pair_files / "src.wav")
    align = load_alignment(pair_files / "src.tsv")
    _, track_src = extract_features(src, bundle)
    result = convert(src, src, align, bundle, gl_iters=2)
    assert np.array_equal(result.conditioning_track.log_f0, track_src.log_f0)
    assert np.array_equal(result.conditioning_track.voiced, track_src.voiced)


def test_convert_mod_file(ckpt, pair_files, tmp_path):
    mod_file = tmp_path / "mod.txt"
    mod_file.write_text("octave_shift = 0.25\nenergy_gain = 0.5\n")
    report_path = tmp_path / "report.json"
    rc = main(["convert", "--src", str(pair_files / "src.wav"), "--trg", str(pair_files / "trg.wav"),
               "--src-align", str(pair_files / "src.tsv"), "--ckpt", str(ckpt),
               "--mod-file", str(mod_file), "--gl-iters", "2",
               "--out", str(tmp_path / "o.wav"), "--report", str(report_path)])
    assert rc == 0
    report = json.loads(report_path.read_text())
    assert report["octave_shift"] == 0.25
    assert report["energy_gain"] == 0.5
    assert report["requested_mean_hz"] == pytest.approx(report["mu_trg_hz"] * 2 ** 0.25, rel=1e-9)


def test_convert_missing_checkpoint(pair_files, tmp_path):
    rc = main(["convert", "--src", str(pair_files / "src.wav"), "--trg", str(pair_files / "trg.wav"),
               "--src-align", str(pair_files / "src.tsv"), "--ckpt", str(tmp_path / "no.pfck"),
               "--out", str(tmp_path / "o.wav")])
    assert rc == 2


def test_convert_frame_curve(ckpt, pair_files, tmp_path):
    from prosovc.formats import write_ftb_vector
    from prosovc.pipeline import extract_features, load_bundle

    bundle = load_bundle(ckpt)
    src = load_wav(pair_files / "src.wav")
    _, track = extract_features(src, bundle)
    curve = np.full(track.n_frames, 0.1)
    write_ftb_vector(tmp_path / "curve.ftb", curve)
    report_path = tmp_path / "report.json"
    rc = main(["convert", "--src", str(pair_files / "src.wav"), "--trg", str(pair_files / "trg.wav"),
               "--src-align", str(pair_files / "src.tsv"), "--ckpt", str(ckpt),
               "--f0-curve", str(tmp_path / "curve.ftb"), "--gl-iters", "2",
               "--out", str(tmp_path / "o.wav"), "--report", str(report_path)])
    assert rc == 0
    report = json.loads(report_path.read_text())
    assert report["frame_curve"] is True
    # constant +0.1 log-Hz curve multiplies the voiced mean by e^0.1
    assert report["requested_mean_hz"] == pytest.approx(report["mu_trg_hz"] * np.exp(0.1), rel=1e-6)


def test_convert_curve_length_mismatch_exit_5(ckpt, pair_files, tmp_path):
    from prosovc.formats import write_ftb_vector

    write_ftb_vector(tmp_path / "short.ftb", np.zeros(3))
    rc = main(["convert", "--src", str(pair_files / "src.wav"), "--trg", str(pair_files / "trg.wav"),
               "--src-align", str(pair_files / "src.tsv"), "--ckpt", str(ckpt),
               "--f0-curve", str(tmp_path / "short.ftb"), "--gl-iters", "2",
               "--out", str(tmp_path / "o.wav")])
    assert rc == 5


def test_convert_report_reproducible(ckpt, pair_files, tmp_path):
    reports = []
    for name in ("r1.json", "r2.json"):
        rc = main(["convert", "--src", str(pair_files / "src.wav"),
                   "--trg", str(pair_files / "trg.wav"),
                   "--src-align", str(pair_files / "src.tsv"), "--ckpt", str(ckpt),
                   "--octave", "0.25", "--gl-iters", "2", "--seed", "7",
                   "--out", str(tmp_path / "o.wav"), "--report", str(tmp_path / name)])
        assert rc == 0
        report = json.loads((tmp_path / name).read_text())
        report.pop("elapsed_ms")
        reports.append(report)
    assert reports[0] == reports[1]


# -- train-toy ------------------------------------------------------------------

def test_train_toy_deterministic_checkpoints(demo_corpus, tmp_path):
    root, _ = demo_corpus
    p1, p2 = tmp_path / "a.pfck", tmp_path / "b.pfck"
    assert main(["train-toy", "--corpus", str(root), "--epochs", "1", "--seed", "9",
                 "--ckpt", str(p1)]) == 0
    assert main(["train-toy", "--corpus", str(root), "--epochs", "1", "--seed", "9",
                 "--ckpt", str(p2)]) == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_train_toy_empty_corpus(tmp_path):
    corpus = tmp_path / "empty"
    corpus.mkdir()
    proc = subprocess.run(CLI + ["train-toy", "--corpus", str(corpus), "--epochs", "1",
                                 "--seed", "0", "--ckpt", str(tmp_path / "c.pfck")],
                          capture_output=True, text=True)
    assert proc.returncode == 4
    assert "InsufficientData" in proc.stderr


def test_train_toy_missing_alignment(demo_corpus, tmp_path):
    root, _ = demo_corpus
    broken = tmp_path / "broken"
    broken.mkdir()
    (broken / "spk0_utt0.wav").write_bytes((root / "spk0_utt0.wav").read_bytes())
    rc = main(["train-toy", "--corpus", str(broken), "--epochs", "1", "--seed", "0",
               "--ckpt", str(tmp_path / "c.pfck")])
    assert rc == 2


# -- sweep ------------------------------------------------------------------------

def write_pairs_file(path, pair_root):
    path.write_text(f"{pair_root / 'src.wav'}\t{pair_root / 'src.tsv'}\t{pair_root / 'trg.wav'}\n")


def test_sweep_f0_csv(ckpt, pair_files, tmp_path):
    pairs = tmp_path / "pairs.tsv"
    write_pairs_file(pairs, pair_files)
    out = tmp_path / "f0.csv"
    rc = main(["sweep", "--pairs", str(pairs), "--ckpt", str(ckpt), "--out", str(out),
               "--gl-iters", "2"])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "level,requested_mean_hz,achieved_mean_hz,f0_rmse_hz,out_frames"
    assert len(lines) == 6
    assert [line.split(",")[0] for line in lines[1:]] == ["-0.5", "-0.25", "0", "0.25", "0.5"]


def test_sweep_rate_csv(ckpt, pair_files, tmp_path):
    pairs = tmp_path / "pairs.tsv"
    write_pairs_file(pairs, pair_files)
    out = tmp_path / "rate.csv"
    rc = main(["eval", "--pairs", str(pairs), "--ckpt", str(ckpt), "--out", str(out),
               "--mode", "rate", "--gl-iters", "2"])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 6
    assert [line.split(",")[0] for line in lines[1:]] == ["0.66", "0.75", "1", "1.2", "1.33"]


def test_sweep_empty_pairs_exit_2(ckpt, tmp_path):
    pairs = tmp_path / "pairs.tsv"
    pairs.write_text("")
    rc = main(["sweep", "--pairs", str(pairs), "--ckpt", str(ckpt),
               "--out", str(tmp_path / "x.csv")])
    assert rc == 2
