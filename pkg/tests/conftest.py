import numpy as np
import pytest

from prosovc.conditioning import ModelDims
from prosovc.pipeline import CorpusItem, train_toy
from prosovc.prosody import ProsodyTrack
from prosovc.signal_core import MelConfig
from prosovc.synth import toy_utterance, write_alignment

SR = 22050


@pytest.fixture(scope="session")
def mel_cfg():
    return MelConfig()


@pytest.fixture(scope="session")
def tiny_dims():
    # small enough for exhaustive gradient checking (<2k parameters)
    return ModelDims(n_mels=4, speaker_dim=6, t_embed_dim=6, style_dim=6,
                     cond_hidden=6, dec_hidden=6)


def make_track(rng, n_frames=32, base_log_f0=5.3, voiced_prob=0.7):
    voiced = rng.random(n_frames) < voiced_prob
    if not voiced.any():
        voiced[0] = True
    log_f0 = np.where(voiced, base_log_f0 + 0.2 * rng.standard_normal(n_frames), 0.0)
    log_energy = -4.0 + rng.standard_normal(n_frames)
    return ProsodyTrack(log_f0, voiced, log_energy)


@pytest.fixture(scope="session")
def demo_corpus(tmp_path_factory):
    """Four synthetic utterances (2 speakers) written as wav + alignment files."""
    root = tmp_path_factory.mktemp("corpus")
    from prosovc.signal_core import save_wav

    items = []
    for spk, (f0, tilt) in enumerate([(140.0, 0.0), (210.0, 0.5)]):
        for utt in range(2):
            wave, align = toy_utterance(seed=10 * spk + utt, base_f0=f0, duration=2.0, tilt=tilt)
            name = f"spk{spk}_utt{utt}"
            save_wav(wave, root / f"{name}.wav")
            write_alignment(align, root / f"{name}.tsv")
            items.append(CorpusItem(name, f"spk{spk}", wave, align))
    return root, items


@pytest.fixture(scope="session")
def trained_bundle(demo_corpus):
    _, items = demo_corpus
    bundle, losses = train_toy(items, epochs=3, seed=1)
    return bundle


@pytest.fixture(scope="session")
def conversion_pair():
    src, src_align = toy_utterance(seed=100, base_f0=150.0, duration=2.0)
    trg, _ = toy_utterance(seed=200, base_f0=220.0, duration=2.0, tilt=0.4)
    return src, src_align, trg
