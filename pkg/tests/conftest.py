"""Shared fixtures: one standard toy universe reused across the suite.

The standard universe: hashing embedder (dim 64, seed 901), a 400-paragraph
topical corpus (seed 31), a k-means partition with K=8 (seed 77) and an LSH
partition with d=3 (seed 78), at the default operating point gamma=0.25,
margin=0.035.
"""

import numpy as np
import pytest

from sentmark.embedding import EmbedderHandle, toy_embed
from sentmark.generation import WatermarkConfig, select_valid_regions
from sentmark.partition import fit_kmeans, fit_lsh
from sentmark.rng import Xoshiro256StarStar
from sentmark.sentences import split_sentences
from sentmark.toylm import make_corpus

EMB_DIM = 64
EMB_SEED = 901
CORPUS_SEED = 31
KMEANS_SEED = 77
LSH_SEED = 78


@pytest.fixture(scope="session")
def embedder():
    return EmbedderHandle("toy", EMB_DIM, EMB_SEED)


@pytest.fixture(scope="session")
def corpus_sentences():
    return [s for p in make_corpus(400, seed=CORPUS_SEED) for s in split_sentences(p)]


@pytest.fixture(scope="session")
def corpus_vectors(corpus_sentences):
    return np.stack([toy_embed(s, EMB_DIM, EMB_SEED) for s in corpus_sentences])


@pytest.fixture(scope="session")
def kmeans_part(corpus_vectors):
    return fit_kmeans(corpus_vectors, 8, seed=KMEANS_SEED)


@pytest.fixture(scope="session")
def lsh_part():
    return fit_lsh(3, EMB_DIM, seed=LSH_SEED)


@pytest.fixture(scope="session")
def cfg_kmeans():
    return WatermarkConfig(gamma=0.25, margin=0.035, mode="kmeans")


@pytest.fixture(scope="session")
def cfg_lsh():
    return WatermarkConfig(gamma=0.25, margin=0.035, mode="lsh")


def human_documents(n_docs: int, sentences_per_doc: int, seed: int) -> list[str]:
    """Unwatermarked toy documents: consecutive topical sentences."""
    docs = []
    para_index = 0
    buffer: list[str] = []
    while len(docs) < n_docs:
        while len(buffer) < sentences_per_doc:
            from sentmark.toylm import make_paragraph

            buffer.extend(split_sentences(make_paragraph(seed, para_index)))
            para_index += 1
        docs.append(" ".join(buffer[:sentences_per_doc]))
        buffer = buffer[sentences_per_doc:]
    return docs


def simulate_null_valid_flags(
    r_count: int, gamma: float, prime: int, n_flags: int, rng: Xoshiro256StarStar
) -> list[bool]:
    """Validity flags for a document whose regions are i.i.d. uniform."""
    prev = rng.randbelow(r_count)
    flags = []
    for _ in range(n_flags):
        region = rng.randbelow(r_count)
        flags.append(region in select_valid_regions(prev, prime, r_count, gamma))
        prev = region
    return flags
