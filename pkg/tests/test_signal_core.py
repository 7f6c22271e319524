import math
import struct
import wave as wavemod

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prosovc.errors import ConfigMismatch, InvalidCutoff, TooShort, UnreadableFile, UnsupportedFormat
from prosovc.signal_core import (
    MelConfig,
    MelSpectrogram,
    Waveform,
    butterworth_hp_gain,
    highpass_filter,
    load_wav,
    mel_band_centers,
    mel_spectrogram,
    save_wav,
)

SR = 22050


def sine(freq, dur=1.0, amp=0.5, sr=SR):
    t = np.arange(int(dur * sr)) / sr
    return Waveform(amp * np.sin(2 * np.pi * freq * t), sr)


# -- WAV I/O -------------------------------------------------------------------

def test_load_silence(tmp_path):
    path = tmp_path / "sil.wav"
    save_wav(Waveform(np.zeros(SR), SR), path)
    wave = load_wav(path)
    assert wave.sample_rate == SR
    assert len(wave) == SR
    assert not wave.samples.any()
    with wavemod.open(str(path), "rb") as fh:  # data chunk is all-zero PCM
        assert fh.readframes(fh.getnframes()) == b"\x00" * (2 * SR)


def test_load_full_scale_square_wave(tmp_path):
    path = tmp_path / "sq.wav"
    data = np.tile([32767, -32768], 100).astype("<i2")
    with wavemod.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(SR)
        fh.writeframes(data.tobytes())
    wave = load_wav(path)
    assert wave.samples.max() == pytest.approx(32767 / 32768)
    assert wave.samples.min() == -1.0


def test_load_stereo_rejected(tmp_path):
    path = tmp_path / "st.wav"
    with wavemod.open(str(path), "wb") as fh:
        fh.setnchannels(2)
        fh.setsampwidth(2)
        fh.setframerate(SR)
        fh.writeframes(b"\x00\x00" * 200)
    with pytest.raises(UnsupportedFormat):
        load_wav(path)


def test_load_8bit_rejected(tmp_path):
    path = tmp_path / "w8.wav"
    with wavemod.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(1)
        fh.setframerate(SR)
        fh.writeframes(b"\x00" * 100)
    with pytest.raises(UnsupportedFormat):
        load_wav(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(UnreadableFile):
        load_wav(tmp_path / "nope.wav")


def test_load_garbage_file(tmp_path):
    path = tmp_path / "junk.wav"
    path.write_bytes(b"not a riff file at all")
    with pytest.raises(UnreadableFile):
        load_wav(path)


def test_save_clips_out_of_range(tmp_path):
    path = tmp_path / "clip.wav"
    save_wav(Waveform(np.array([2.0, -2.0, 0.0]), SR), path)
    with wavemod.open(str(path), "rb") as fh:
        raw = fh.readframes(3)
    assert struct.unpack("<3h", raw) == (32767, -32768, 0)


def test_roundtrip_quantization_bound(tmp_path):
    path = tmp_path / "rt.wav"
    wave = sine(440, dur=0.25, amp=1.0)
    save_wav(wave, path)
    back = load_wav(path)
    assert np.max(np.abs(back.samples - wave.samples)) <= 1 / 32768


# -- high-pass filter -------------------------------------------------------------

def test_hpf_at_cutoff_is_3db():
    wave = sine(50)
    out = highpass_filter(wave, 50.0, order=2)
    n0 = SR // 2  # skip transient
    gain_db = 20 * np.log10(np.sqrt(np.mean(out.samples[n0:] ** 2))
                            / np.sqrt(np.mean(wave.samples[n0:] ** 2)))
    assert gain_db == pytest.approx(-3.0, abs=0.5)


def test_hpf_passband_matches_analytic_gain():
    wave = sine(440)
    out = highpass_filter(wave, 50.0, order=2)
    n0 = SR // 2
    measured = np.sqrt(np.mean(out.samples[n0:] ** 2)) / np.sqrt(np.mean(wave.samples[n0:] ** 2))
    analytic = butterworth_hp_gain(50.0, SR, 2, 440.0)
    assert 20 * abs(math.log10(measured / analytic)) < 0.1
    assert 20 * abs(math.log10(analytic)) < 0.5  # passband within 0.5 dB of unity


def test_hpf_removes_dc():
    wave = Waveform(np.ones(SR), SR)
    out = highpass_filter(wave, 50.0, order=2)
    assert abs(np.mean(out.samples[SR // 2:])) < 1e-3


def test_hpf_order4_supported():
    out = highpass_filter(sine(25), 50.0, order=4)
    n0 = SR // 2
    measured = np.sqrt(np.mean(out.samples[n0:] ** 2)) / (0.5 / np.sqrt(2))
    analytic = butterworth_hp_gain(50.0, SR, 4, 25.0)
    assert measured == pytest.approx(analytic, rel=0.1)


def test_hpf_invalid_cutoff():
    with pytest.raises(InvalidCutoff):
        highpass_filter(sine(100), 0.0)
    with pytest.raises(InvalidCutoff):
        highpass_filter(sine(100), SR / 2)
    with pytest.raises(InvalidCutoff):
        highpass_filter(sine(100), 50.0, order=3)


def test_hpf_preserves_length_and_is_deterministic():
    wave = sine(123, dur=0.1)
    a = highpass_filter(wave, 50.0)
    b = highpass_filter(wave, 50.0)
    assert len(a) == len(wave)
    assert np.array_equal(a.samples, b.samples)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=-8.0, max_value=8.0).filter(lambda a: abs(a) > 1e-3))
def test_hpf_linearity(a):
    rng = np.random.default_rng(0)
    x = 0.1 * rng.standard_normal(2000)
    scaled = highpass_filter(Waveform(a * x, SR), 50.0).samples
    reference = a * highpass_filter(Waveform(x, SR), 50.0).samples
    assert np.max(np.abs(scaled - reference)) <= 1e-9 * max(1.0, np.max(np.abs(reference)))


# -- mel spectrogram ----------------------------------------------------------------

def test_mel_silence_hits_floor(mel_cfg):
    mel = mel_spectrogram(Waveform(np.zeros(SR), SR), mel_cfg)
    assert np.all(mel.values == np.log(mel_cfg.log_floor))


def test_mel_frame_count(mel_cfg):
    mel = mel_spectrogram(Waveform(np.zeros(4 * mel_cfg.hop), SR), mel_cfg)
    assert mel.n_frames == 5


def test_mel_1khz_argmax_band(mel_cfg):
    mel = mel_spectrogram(sine(1000), mel_cfg)
    centers = mel_band_centers(mel_cfg)
    expected = int(np.argmin(np.abs(centers - 1000.0)))
    # frames whose window is fully inside the signal (reflection-free)
    interior = mel.values[2:-2]
    assert np.all(np.argmax(interior, axis=1) == expected)


def test_mel_doubling_raises_by_log4(mel_cfg):
    quiet = mel_spectrogram(sine(440, amp=0.25), mel_cfg)
    loud = mel_spectrogram(sine(440, amp=0.5), mel_cfg)
    mask = quiet.values > np.log(mel_cfg.log_floor) + 1e-9
    assert np.allclose(loud.values[mask] - quiet.values[mask], np.log(4.0), atol=1e-6)


def test_mel_rate_mismatch(mel_cfg):
    with pytest.raises(ConfigMismatch):
        mel_spectrogram(Waveform(np.zeros(1000), 16000), mel_cfg)


def test_mel_too_short(mel_cfg):
    with pytest.raises(TooShort):
        mel_spectrogram(Waveform(np.zeros(10), SR), mel_cfg)


def test_mel_determinism(mel_cfg):
    wave = sine(333, dur=0.3)
    a = mel_spectrogram(wave, mel_cfg)
    b = mel_spectrogram(wave, mel_cfg)
    assert np.array_equal(a.values, b.values)


def test_mel_config_validation():
    with pytest.raises(ValueError):
        MelConfig(hop=2048)
    with pytest.raises(ValueError):
        MelConfig(fmin=9000.0)
    with pytest.raises(ValueError):
        MelConfig(log_floor=0.0)


def test_mel_values_validated(mel_cfg):
    with pytest.raises(ValueError):
        MelSpectrogram(np.full((3, 4), 1.0), mel_cfg)  # band mismatch
    with pytest.raises(ValueError):
        MelSpectrogram(np.full((3, mel_cfg.n_mels), np.nan), mel_cfg)
