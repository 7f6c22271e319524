"""End-to-end orchestration: feature extraction, conversion, and toy training.

The inference path mirrors the intended flow: extract prosody from source
and target, transfer the source F0 mean onto the target's, compute the
unit-duration conversion rate, apply user modulation, condition the
diffusion decoder, sample 30 steps from the average-mel prior, optionally
re-sample in time, and vocode.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .conditioning import ModelDims, build_condition, build_style
from .diffusion import (
    DecoderParams,
    NoiseSchedule,
    TrainBatch,
    init_decoder_params,
    make_schedule,
    named_parameters,
    predict_noise,
    reverse_sample,
    train_step,
)
from .encoders import Alignment, average_mel_target, speaker_embedding
from .errors import InsufficientData, UnreadableFile
from .formats import read_pfck, write_pfck
from .prosody import (
    Codebook,
    F0Config,
    ProsodyTrack,
    extract_prosody,
    train_unit_codebook,
    unitize,
)
from .rate_control import resample_mel
from .signal_core import (
    MelConfig,
    MelSpectrogram,
    Waveform,
    highpass_filter,
    mel_spectrogram,
)
from .transform import (
    ConversionRate,
    ModulationSpec,
    clamp_rate,
    conversion_rate,
    f0_mean_transfer,
    modulate,
    voiced_mean,
)
from .vocoder import griffin_lim, mel_to_linear

HPF_CUTOFF_HZ = 50.0
DEFAULT_KMEANS_K = 100

# Decoded log-mels are projected onto the range representable by PCM16
# analysis before vocoding (a full-scale frame tops out near log 8e6 ~ 16).
MEL_LOG_CEIL = 20.0


@dataclass
class ModelBundle:
    """Everything a conversion run needs: weights, codebook, and configs."""

    params: DecoderParams
    sched: NoiseSchedule
    mel_cfg: MelConfig
    f0_cfg: F0Config = field(default_factory=F0Config)
    codebook: Codebook | None = None

    @property
    def dims(self) -> ModelDims:
        return self.params.dims


def save_bundle(path, bundle: ModelBundle) -> None:
    blocks = {f"param.{k}": v for k, v in named_parameters(bundle.params).items()}
    d = bundle.dims
    blocks["meta.dims"] = np.array([d.n_mels, d.speaker_dim, d.t_embed_dim,
                                    d.style_dim, d.cond_hidden, d.dec_hidden], dtype=np.float64)
    blocks["meta.schedule"] = np.array([bundle.sched.n_steps, bundle.sched.beta_min,
                                        bundle.sched.beta_max])
    m = bundle.mel_cfg
    blocks["meta.melcfg"] = np.array([m.sample_rate, m.fft_size, m.hop, m.window,
                                      m.n_mels, m.fmin, m.fmax, m.log_floor])
    f = bundle.f0_cfg
    blocks["meta.f0cfg"] = np.array([f.f0_min, f.f0_max, f.yin_threshold, f.rms_floor])
    blocks["meta.input_norm"] = np.array([bundle.params.input_shift, bundle.params.input_scale])
    if bundle.codebook is not None:
        blocks["codebook.centroids"] = bundle.codebook.centroids
    write_pfck(path, blocks)


def load_bundle(path) -> ModelBundle:
    blocks = read_pfck(path)
    dv = blocks["meta.dims"].astype(int)
    dims = ModelDims(*dv)
    sv = blocks["meta.schedule"]
    sched = make_schedule(int(sv[0]), float(sv[1]), float(sv[2]))
    mv = blocks["meta.melcfg"]
    mel_cfg = MelConfig(int(mv[0]), int(mv[1]), int(mv[2]), int(mv[3]), int(mv[4]),
                        float(mv[5]), float(mv[6]), float(mv[7]))
    fv = blocks["meta.f0cfg"]
    f0_cfg = F0Config(float(fv[0]), float(fv[1]), float(fv[2]), float(fv[3]))
    shift, scale = blocks["meta.input_norm"]
    params = init_decoder_params(dims, np.random.default_rng(0), float(shift), float(scale))
    for name, arr in named_parameters(params).items():
        stored = blocks.get(f"param.{name}")
        if stored is None or stored.shape != arr.shape:
            raise UnreadableFile(f"checkpoint block {name} is missing or shape-incompatible")
        arr[...] = stored
    codebook = None
    if "codebook.centroids" in blocks:
        codebook = Codebook(blocks["codebook.centroids"])
    return ModelBundle(params, sched, mel_cfg, f0_cfg, codebook)


@dataclass
class ConvertResult:
    wave: Waveform
    mel: MelSpectrogram
    conditioning_track: ProsodyTrack
    report: dict


def extract_features(wave: Waveform, bundle: ModelBundle):
    """(mel, prosody track) with the prosody taken from the high-passed signal."""
    mel = mel_spectrogram(wave, bundle.mel_cfg)
    filtered = highpass_filter(wave, HPF_CUTOFF_HZ)
    track = extract_prosody(filtered, bundle.mel_cfg, bundle.f0_cfg)
    return mel, track


def convert(src: Waveform, trg: Waveform, src_align: Alignment, bundle: ModelBundle,
            mod: ModulationSpec = ModulationSpec(), *, rate_control: bool = False,
            seed: int = 0, gl_iters: int = 60) -> ConvertResult:
    """Full inference path; prosody conversion then decoding then vocoding."""
    started = time.perf_counter()
    mel_src, track_src = extract_features(src, bundle)
    mel_trg, track_trg = extract_features(trg, bundle)

    mu_src = voiced_mean(track_src)
    mu_trg = voiced_mean(track_trg)
    transferred = f0_mean_transfer(track_src, mu_trg)

    rc = ConversionRate(1.0)
    if bundle.codebook is not None:
        units_src = unitize(mel_src, bundle.codebook)
        units_trg = unitize(mel_trg, bundle.codebook)
        rc = conversion_rate(units_src, units_trg)

    requested = modulate(transferred, mod)
    spk = speaker_embedding(mel_trg, bundle.dims.speaker_dim)
    prior = average_mel_target(mel_src, src_align)

    params = bundle.params

    def denoise(x_t, t):
        style = build_style(spk, t, params.cond)
        cond = build_condition(requested, style, params.cond)
        return predict_noise(x_t, cond, params)

    rng = np.random.default_rng(seed)
    sampled = reverse_sample(prior.values, denoise, bundle.sched, rng)
    mel_out = MelSpectrogram(np.clip(sampled, np.log(bundle.mel_cfg.log_floor), MEL_LOG_CEIL),
                             bundle.mel_cfg)

    applied_rate = None
    if mod.rate_multiplier is not None:
        applied_rate = clamp_rate(mod.rate_multiplier)
    elif rate_control:
        applied_rate = clamp_rate(rc.raw)
    if applied_rate is not None:
        mel_out = resample_mel(mel_out, applied_rate)

    wave_out = griffin_lim(mel_to_linear(mel_out), bundle.mel_cfg, gl_iters, seed)

    report = {
        "source_frames": mel_src.n_frames,
        "mu_src_hz": mu_src,
        "mu_trg_hz": mu_trg,
        "rc_raw": rc.raw,
        "rc_clamped": rc.clamped,
        "octave_shift": mod.octave_shift,
        "semitone_shift": mod.semitone_shift,
        "energy_gain": mod.energy_gain,
        "frame_curve": mod.frame_f0_delta is not None,
        "rate_control": applied_rate is not None,
        "applied_rate": applied_rate.clamped if applied_rate is not None else 1.0,
        "requested_mean_hz": voiced_mean(requested),
        "out_frames": mel_out.n_frames,
        "out_samples": len(wave_out),
        "elapsed_ms": (time.perf_counter() - started) * 1e3,
    }
    return ConvertResult(wave_out, mel_out, requested, report)


# -- toy training ---------------------------------------------------------------------

@dataclass
class CorpusItem:
    name: str
    speaker: str
    wave: Waveform
    align: Alignment


def train_toy(items: list[CorpusItem], *, epochs: int, seed: int, lr: float = 1e-3,
              dims: ModelDims = ModelDims(), mel_cfg: MelConfig = MelConfig(),
              f0_cfg: F0Config = F0Config(), sched: NoiseSchedule | None = None,
              kmeans_k: int = DEFAULT_KMEANS_K, log=None):
    """Deterministic toy training over a small same-speaker-paired corpus.

    Returns (bundle, per-epoch mean losses).  The speaker embedding for
    each step comes from a randomly chosen utterance of the same speaker,
    the decoder input normalization from corpus mel statistics.
    """
    if not items:
        raise InsufficientData("corpus is empty")
    if epochs < 1:
        raise InsufficientData("need at least one epoch")
    sched = sched or make_schedule()

    mels, tracks, priors = [], [], []
    for item in items:
        mel = mel_spectrogram(item.wave, mel_cfg)
        filtered = highpass_filter(item.wave, HPF_CUTOFF_HZ)
        mels.append(mel)
        tracks.append(extract_prosody(filtered, mel_cfg, f0_cfg))
        priors.append(average_mel_target(mel, item.align))

    codebook = train_unit_codebook(mels, kmeans_k, seed)

    by_speaker: dict[str, list[int]] = {}
    for idx, item in enumerate(items):
        by_speaker.setdefault(item.speaker, []).append(idx)

    all_values = np.concatenate([m.values.ravel() for m in mels])
    shift = float(all_values.mean())
    scale = float(max(all_values.std(), 1e-3))

    rng = np.random.default_rng(seed)
    params = init_decoder_params(dims, rng, input_shift=shift, input_scale=scale)
    spk_embeddings = [speaker_embedding(m, dims.speaker_dim) for m in mels]

    epoch_losses = []
    for epoch in range(epochs):
        order = rng.permutation(len(items))
        losses = []
        for idx in order:
            mates = by_speaker[items[idx].speaker]
            spk_idx = mates[int(rng.integers(len(mates)))]
            batch = TrainBatch(
                x0=mels[idx].values,
                prior=priors[idx].values,
                prosody=tracks[idx],
                speaker=spk_embeddings[spk_idx],
            )
            params, loss = train_step(batch, params, lr, rng, sched)
            losses.append(loss)
        epoch_losses.append(float(np.mean(losses)))
        if log is not None:
            log(f"epoch {epoch + 1}/{epochs} loss {epoch_losses[-1]:.6f}")

    bundle = ModelBundle(params, sched, mel_cfg, f0_cfg, codebook)
    return bundle, epoch_losses
