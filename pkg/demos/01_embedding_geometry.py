#!/usr/bin/env python3
"""Geometry of the built-in hashing embedder.

Every sentence maps to a unit vector; word order never matters, and swapping
a single word moves the vector only slightly, while a sentence about a
different topic lands nearly orthogonal.
"""

import numpy as np

from sentmark import cosine_distance, toy_embed

DIM, SEED = 64, 901

astronomy = "The comet crossed the nebula near a quasar."
astronomy_shuffled = "Near a quasar the nebula crossed the comet."
astronomy_one_swap = "The comet crossed the galaxy near a quasar."
cooking = "Simmer the onion with butter and saffron broth."

v = {name: toy_embed(text, DIM, SEED) for name, text in [
    ("astronomy", astronomy),
    ("shuffled", astronomy_shuffled),
    ("one word swapped", astronomy_one_swap),
    ("cooking", cooking),
]}

print(f"embedding dim: {DIM}, all unit norm: "
      f"{all(abs(np.linalg.norm(x) - 1) < 1e-9 for x in v.values())}")
print()
base = v["astronomy"]
for name, vec in v.items():
    print(f"  d_cos(astronomy, {name:18s}) = {cosine_distance(base, vec):.4f}")

print()
print("word order is free (distance 0), one swap is cheap, a topic change")
print("is nearly maximal -- the locality a sentence-level watermark rides on.")
