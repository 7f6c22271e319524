#!/usr/bin/env python3
"""Generate a synthetic demo corpus: speakerID_uttID.wav + alignment TSVs.

Each "speaker" has a base pitch and spectral tilt; utterances are sawtooth
phone sequences with silences, enough to train the toy decoder and run
conversions end to end.
"""

import argparse
from pathlib import Path

from prosovc.signal_core import save_wav
from prosovc.synth import toy_utterance, write_alignment

SPEAKERS = [
    ("spk0", 140.0, 0.0),
    ("spk1", 210.0, 0.5),
    ("spk2", 175.0, 0.3),
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--speakers", type=int, default=2, choices=(1, 2, 3))
    parser.add_argument("--utterances", type=int, default=2)
    parser.add_argument("--duration", type=float, default=2.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for spk_idx in range(args.speakers):
        name, base_f0, tilt = SPEAKERS[spk_idx]
        for utt in range(args.utterances):
            seed = args.seed + 100 * spk_idx + utt
            wave, align = toy_utterance(seed=seed, base_f0=base_f0,
                                        duration=args.duration, tilt=tilt)
            save_wav(wave, out / f"{name}_utt{utt}.wav")
            write_alignment(align, out / f"{name}_utt{utt}.tsv")
            print(f"wrote {name}_utt{utt}.wav ({args.duration:.1f}s at {base_f0:.0f} Hz)")


if __name__ == "__main__":
    main()
