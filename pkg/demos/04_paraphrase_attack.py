#!/usr/bin/env python3
"""Paraphrase attacks vs both partition schemes.

The lexical attack swaps words for near-synonyms at increasing strength.
Cluster-shaped regions keep drifted embeddings in-region (the margin buys
extra slack), while hyperplane regions flip bits easily, so the k-means
watermark survives attacks that wash the LSH one out.
"""

import numpy as np

from sentmark import WatermarkConfig, detect, fit_kmeans, fit_lsh, generate_watermarked
from sentmark.attacks import AttackConfig, attack_document, default_synonym_table
from sentmark.embedding import EmbedderHandle, toy_embed
from sentmark.sentences import split_sentences
from sentmark.toylm import GeneratorHandle, make_corpus, make_prompt

DIM, SEED = 64, 901
N_DOCS, T = 40, 12

embedder = EmbedderHandle("toy", DIM, SEED)
sentences = [s for p in make_corpus(400, seed=31) for s in split_sentences(p)]
vectors = np.stack([toy_embed(s, DIM, SEED) for s in sentences])
parts = {"k-means": fit_kmeans(vectors, 8, seed=77), "LSH": fit_lsh(3, DIM, seed=78)}
configs = {
    "k-means": WatermarkConfig(gamma=0.25, margin=0.035, mode="kmeans"),
    "LSH": WatermarkConfig(gamma=0.25, margin=0.035, mode="lsh"),
}
table = default_synonym_table(DIM, SEED, 5)

docs = {
    name: [
        generate_watermarked(
            GeneratorHandle("toy", seed=1000 + i), embedder, parts[name],
            configs[name], make_prompt(3, i), T,
        ).document_text()
        for i in range(N_DOCS)
    ]
    for name in parts
}

print(f"{N_DOCS} watermarked docs per scheme, {T} sentences each\n")
print("strength   similarity   mean z (k-means)   mean z (LSH)")
for strength in (0.0, 0.1, 0.2, 0.3, 0.5):
    sims, z = [], {}
    for name in parts:
        zs = []
        for i, doc in enumerate(docs[name]):
            cfg = AttackConfig("lexical", strength, seed=77_000 + i, synonym_table=table)
            attacked, s = attack_document(doc, cfg, embedder)
            zs.append(detect(attacked, parts[name], configs[name], embedder).z)
            if name == "k-means":
                sims.extend(s)
        z[name] = np.mean(zs)
    print(f"  {strength:.1f}      {np.mean(sims):8.3f}     {z['k-means']:10.2f}      {z['LSH']:10.2f}")

print("\nthe same lexical drift costs LSH several z-units while the")
print("cluster-shaped regions barely notice.")
