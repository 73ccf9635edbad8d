#!/usr/bin/env python3
"""Watermarked generation and detection, end to end.

Each step pseudorandomly marks 2 of the 8 regions valid (seeded by the
previous sentence's region), and rejection sampling draws candidates until
one lands in a valid region with margin to spare.  The detector recomputes
the same chain and runs a one-proportion z-test.
"""

import numpy as np

from sentmark import WatermarkConfig, detect, fit_kmeans, generate_watermarked
from sentmark.embedding import EmbedderHandle, toy_embed
from sentmark.sentences import split_sentences
from sentmark.toylm import GeneratorHandle, make_corpus, make_prompt

DIM, SEED = 64, 901

embedder = EmbedderHandle("toy", DIM, SEED)
sentences = [s for p in make_corpus(400, seed=31) for s in split_sentences(p)]
part = fit_kmeans(np.stack([toy_embed(s, DIM, SEED) for s in sentences]), 8, seed=77)
config = WatermarkConfig(gamma=0.25, margin=0.035)

prompt = make_prompt(3, 0)
trace = generate_watermarked(GeneratorHandle("toy", seed=5), embedder, part, config, prompt, 8)

print(f"prompt: {prompt}")
print(f"\ngenerated {len(trace.sentences)} sentences "
      f"({trace.candidates_drawn()} candidates drawn):")
for i, s in enumerate(trace.sentences, 1):
    print(f"  {i}. [region {s.region}, try {s.accepted_on_try}] {s.text}")

doc = trace.document_text()
result = detect(doc, part, config, embedder)
print(f"\nwatermarked doc:   S_V={result.valid_count}/{result.sentence_count}, "
      f"z = {result.z:.3f}")

human = " ".join(sentences[100:109])
h = detect(human, part, config, embedder)
print(f"unwatermarked doc: S_V={h.valid_count}/{h.sentence_count}, z = {h.z:.3f}")
print("\nat the 1% threshold (z > 2.33) the watermark is unmistakable;")
print("human text sits at the null.")
