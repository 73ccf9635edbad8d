#!/usr/bin/env python3
"""Two ways to partition the semantic space: fitted k-means clusters vs
random LSH hyperplanes, and what each does to topical structure.

k-means regions follow the corpus's topic bundles, so nearly every sentence
sits deep inside its region.  Random hyperplanes cut straight through the
bundles, stranding many sentences near a boundary.
"""

from collections import Counter

import numpy as np

from sentmark import fit_kmeans, fit_lsh, lsh_margin_ok, lsh_signature, margin_ok
from sentmark.embedding import toy_embed
from sentmark.partition import assign
from sentmark.sentences import split_sentences
from sentmark.toylm import make_corpus, dominant_topic

DIM, SEED = 64, 901
MARGIN = 0.035

sentences = [s for p in make_corpus(400, seed=31) for s in split_sentences(p)]
vectors = np.stack([toy_embed(s, DIM, SEED) for s in sentences])
print(f"corpus: {len(sentences)} sentences over 8 topics")

kpart = fit_kmeans(vectors, 8, seed=77)
print(f"\nk-means fit: K=8, {kpart.n_iters} iterations, inertia {kpart.inertia:.1f}")
print(f"inertia per iteration: {[round(t, 1) for t in kpart.inertia_trace]}")

conf = Counter()
for s, v in zip(sentences, vectors):
    t = dominant_topic(s)
    if t is not None:
        conf[(t, assign(kpart, v))] += 1
purity = sum(max(conf.get((t, r), 0) for r in range(8)) for t in range(8)) / len(sentences)
print(f"topic/cluster purity: {purity:.3f} (1.0 = clusters equal topics)")

lpart = fit_lsh(3, DIM, seed=78)
sig_counts = Counter(lsh_signature(lpart, v) for v in vectors)
print(f"\nLSH fit: d=3 hyperplanes -> {lpart.region_count} regions")
print(f"region occupancy: {[sig_counts.get(r, 0) for r in range(8)]}")

k_pass = np.mean([margin_ok(kpart, v, MARGIN) for v in vectors])
l_pass = np.mean([lsh_margin_ok(lpart, v, MARGIN) for v in vectors])
print(f"\nfraction clearing margin m={MARGIN}:")
print(f"  k-means  {k_pass:.3f}   (deep inside topic clusters)")
print(f"  LSH      {l_pass:.3f}   (hyperplanes slice through clusters)")
