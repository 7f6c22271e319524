"""Time-varying decoder conditioning from prosody, speaker, and diffusion step.

The speaker embedding and sinusoidal step embedding fuse into a style
vector; the merge network is a two-layer time convolution over
[logF0, log energy, broadcast style] emitting one condition channel per
mel band.  Log energy is rescaled by fixed constants so its numeric range
matches the other inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadDim, DimMismatch
from .nn import affine, affine_backward, conv1d, conv1d_backward, relu, relu_backward, tanh_backward
from .prosody import ProsodyTrack

STEP_FREQ_MAX = 1e4

# Fixed input scaling for log energy (range roughly [-23, 3] for PCM audio).
ENERGY_SHIFT = 10.0
ENERGY_SCALE = 10.0


@dataclass(frozen=True)
class ModelDims:
    """Channel sizes of the conditioning and decoder stacks."""

    n_mels: int = 80
    speaker_dim: int = 64
    t_embed_dim: int = 64
    style_dim: int = 64
    cond_hidden: int = 64
    dec_hidden: int = 64

    def __post_init__(self):
        for name in ("n_mels", "speaker_dim", "t_embed_dim", "style_dim", "cond_hidden", "dec_hidden"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.t_embed_dim % 2:
            raise ValueError("t_embed_dim must be even")


@dataclass
class CondParams:
    """Weights of the style projection and the two merge convolutions."""

    style_w: np.ndarray   # (style_dim, speaker_dim + t_embed_dim)
    style_b: np.ndarray   # (style_dim,)
    merge1_w: np.ndarray  # (cond_hidden, 2 + style_dim, 3)
    merge1_b: np.ndarray  # (cond_hidden,)
    merge2_w: np.ndarray  # (n_mels, cond_hidden, 3)
    merge2_b: np.ndarray  # (n_mels,)


def init_cond_params(dims: ModelDims, rng: np.random.Generator) -> CondParams:
    def he(shape):
        fan_in = int(np.prod(shape[1:]))
        return rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)

    return CondParams(
        style_w=he((dims.style_dim, dims.speaker_dim + dims.t_embed_dim)),
        style_b=np.zeros(dims.style_dim),
        merge1_w=he((dims.cond_hidden, 2 + dims.style_dim, 3)),
        merge1_b=np.zeros(dims.cond_hidden),
        merge2_w=he((dims.n_mels, dims.cond_hidden, 3)),
        merge2_b=np.zeros(dims.n_mels),
    )


def step_embedding(t: float, dim: int) -> np.ndarray:
    """Sinusoidal embedding of a diffusion step t in [0, 1]."""
    if dim < 2 or dim % 2:
        raise BadDim(f"embedding dim must be even and >= 2, got {dim}")
    half = dim // 2
    omega = np.geomspace(1.0, STEP_FREQ_MAX, half) if half > 1 else np.ones(1)
    return np.concatenate([np.sin(t * omega), np.cos(t * omega)])


def build_style(speaker: np.ndarray, t: float, params: CondParams) -> np.ndarray:
    """tanh(affine(concat(speaker, step_embedding(t))))."""
    speaker = np.asarray(speaker, dtype=np.float64)
    t_dim = params.style_w.shape[1] - len(speaker)
    if t_dim < 2:
        raise DimMismatch(f"speaker dim {len(speaker)} incompatible with style projection")
    return np.tanh(affine(params.style_w, params.style_b, np.concatenate([speaker, step_embedding(t, t_dim)])))


def _cond_input(track: ProsodyTrack, style: np.ndarray) -> np.ndarray:
    x = np.empty((2 + len(style), track.n_frames))
    x[0] = track.log_f0
    x[1] = (track.log_energy + ENERGY_SHIFT) / ENERGY_SCALE
    x[2:] = style[:, None]
    return x


def build_condition(track: ProsodyTrack, style: np.ndarray, params: CondParams) -> np.ndarray:
    """Condition tensor (T, n_mels) from prosody and a style vector."""
    if len(style) != params.merge1_w.shape[1] - 2:
        raise DimMismatch(f"style dim {len(style)} does not match the merge network")
    x = _cond_input(track, style)
    h = relu(conv1d(params.merge1_w, params.merge1_b, x))
    return conv1d(params.merge2_w, params.merge2_b, h).T


def cond_forward_cache(track: ProsodyTrack, speaker: np.ndarray, t: float, params: CondParams):
    """Forward pass retaining intermediates for backprop; returns (cond, cache)."""
    speaker = np.asarray(speaker, dtype=np.float64)
    t_dim = params.style_w.shape[1] - len(speaker)
    s_in = np.concatenate([speaker, step_embedding(t, t_dim)])
    style = np.tanh(affine(params.style_w, params.style_b, s_in))
    x = _cond_input(track, style)
    pre1 = conv1d(params.merge1_w, params.merge1_b, x)
    h = relu(pre1)
    cond = conv1d(params.merge2_w, params.merge2_b, h)
    return cond.T, {"s_in": s_in, "style": style, "x": x, "pre1": pre1, "h": h}


def cond_backward(d_cond: np.ndarray, cache, params: CondParams):
    """Gradients of all CondParams given d(condition) of shape (T, n_mels)."""
    dy = d_cond.T
    dm2w, dm2b, dh = conv1d_backward(params.merge2_w, cache["h"], dy)
    dpre1 = relu_backward(cache["pre1"], dh)
    dm1w, dm1b, dx = conv1d_backward(params.merge1_w, cache["x"], dpre1)
    dstyle = dx[2:].sum(axis=1)
    ds_lin = tanh_backward(cache["style"], dstyle)
    dsw, dsb, _ = affine_backward(params.style_w, cache["s_in"], ds_lin)
    return {
        "style_w": dsw,
        "style_b": dsb,
        "merge1_w": dm1w,
        "merge1_b": dm1b,
        "merge2_w": dm2w,
        "merge2_b": dm2b,
    }
