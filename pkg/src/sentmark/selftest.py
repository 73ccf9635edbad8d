"""Built-in oracle suite behind ``sentmark selftest``.

Each check recomputes an expected value through an independent route
(high-precision decimal arithmetic, brute-force pairwise counts, hand
fixtures) and compares the library against it.
"""

from __future__ import annotations

import math
from decimal import Decimal, getcontext

import numpy as np

from .detection import detect, z_score
from .embedding import EmbedderHandle, toy_embed
from .evaluation import auc, ent3
from .generation import WatermarkConfig, generate_watermarked, select_valid_regions
from .partition import assign, fit_kmeans, load_partition, save_partition
from .rng import Xoshiro256StarStar, splitmix64
from .sentences import split_sentences
from .toylm import GeneratorHandle, make_corpus, make_prompt

getcontext().prec = 50


def z_score_highprecision(s_v: int, n: int, gamma: float) -> float:
    """The z formula evaluated in 50-digit decimal arithmetic."""
    g = Decimal(gamma)  # exact binary value of the float
    num = Decimal(s_v) - g * Decimal(n)
    var = g * (Decimal(1) - g) * Decimal(n)
    return float(num / var.sqrt())


def brute_force_auc(pos, neg) -> float:
    doubled = 0
    for p in pos:
        for q in neg:
            if p > q:
                doubled += 2
            elif p == q:
                doubled += 1
    return doubled / (2 * len(pos) * len(neg))


def _check_splitmix_reference() -> bool:
    return splitmix64(0, 3) == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def _check_z_oracle() -> bool:
    fixed = [
        (25, 100, 0.25, 0.0),
        (40, 100, 0.25, 3.4641016151377544),
        (20, 20, 0.25, math.sqrt(60.0)),
    ]
    for s_v, n, gamma, expected in fixed:
        if abs(z_score(s_v, n, gamma) - expected) > 1e-12:
            return False
    rng = Xoshiro256StarStar(0x5E1F)
    for _ in range(300):
        n = 1 + rng.randbelow(500)
        s_v = rng.randbelow(n + 1)
        gamma = 0.01 + 0.98 * rng.random()
        if abs(z_score(s_v, n, gamma) - z_score_highprecision(s_v, n, gamma)) > 1e-12:
            return False
    return True


def _check_auc_oracle() -> bool:
    rng = Xoshiro256StarStar(0xA0C)
    for _ in range(100):
        pos = [rng.randbelow(10) / 2.0 for _ in range(1 + rng.randbelow(12))]
        neg = [rng.randbelow(10) / 2.0 for _ in range(1 + rng.randbelow(12))]
        if auc(pos, neg) != brute_force_auc(pos, neg):
            return False
    return auc([1.0, 2.0], [1.0, 2.0]) == 0.5


def _check_ent3_fixtures() -> bool:
    if ent3(["echo echo echo echo echo"]) != 0.0:  # one distinct trigram
        return False
    four = "a b c d e f"  # trigrams abc bcd cde def, each once
    return ent3([four]) == 2.0


def _check_splitter() -> bool:
    if split_sentences("A b. C d!") != ["A b.", "C d!"]:
        return False
    if split_sentences('He said "go." Then left.') != ['He said "go."', "Then left."]:
        return False
    if split_sentences("no terminal") != ["no terminal"]:
        return False
    for para in make_corpus(20, seed=7):
        joined = "".join("".join(s.split()) for s in split_sentences(para))
        if joined != "".join(para.split()):
            return False
    return True


def _check_valid_regions() -> bool:
    a = select_valid_regions(3, 2_147_483_647, 8, 0.25)
    b = select_valid_regions(3, 2_147_483_647, 8, 0.25)
    if a != b or len(a) != 2:
        return False
    return len(select_valid_regions(0, 97, 4, 0.25)) == 1 and len(
        select_valid_regions(0, 97, 5, 0.25)
    ) == 1


def _check_kmeans() -> bool:
    pts = np.eye(4)[:, :4]
    part = fit_kmeans(pts, 4, seed=11)
    if part.inertia > 1e-9:
        return False
    if any(b > a + 1e-12 for a, b in zip(part.inertia_trace, part.inertia_trace[1:])):
        return False
    return all(assign(part, part.centroids[i]) == i for i in range(4))


def _check_roundtrip(tmpdir=None) -> bool:
    import tempfile
    import os

    embedder = EmbedderHandle("toy", 64, 901)
    corpus = make_corpus(150, seed=31)
    sentences = [s for p in corpus for s in split_sentences(p)]
    vectors = np.stack([toy_embed(s, 64, 901) for s in sentences])
    part = fit_kmeans(vectors, 8, seed=77)
    config = WatermarkConfig(gamma=0.25, margin=0.035)
    lm = GeneratorHandle("toy", seed=5)
    trace = generate_watermarked(lm, embedder, part, config, make_prompt(3, 0), 6)
    result = detect(trace.document_text(), part, config, embedder)
    if result.valid_count != result.sentence_count or trace.fallback_count() != 0:
        return False
    with tempfile.TemporaryDirectory() as td:
        path = os.path.join(td, "part.json")
        save_partition(part, path)
        loaded = load_partition(path)
        probe_rng = Xoshiro256StarStar(13)
        for _ in range(200):
            v = np.array([probe_rng.gauss() for _ in range(64)])
            v /= np.linalg.norm(v)
            if assign(part, v) != assign(loaded, v):
                return False
    return True


CHECKS = [
    ("splitmix64 reference outputs", _check_splitmix_reference),
    ("z-score vs 50-digit decimal oracle", _check_z_oracle),
    ("AUC vs brute-force pairwise count", _check_auc_oracle),
    ("trigram entropy fixtures", _check_ent3_fixtures),
    ("sentence splitter fixtures and reassembly", _check_splitter),
    ("valid-region selection determinism and size", _check_valid_regions),
    ("k-means fixtures and inertia monotonicity", _check_kmeans),
    ("generate/detect round trip and partition persistence", _check_roundtrip),
]


def run_selftest(verbose: bool = True) -> int:
    """Run every check; returns the number of failures."""
    failures = 0
    for name, fn in CHECKS:
        try:
            ok = fn()
        except Exception as exc:  # a crashed oracle is a failure, not an abort
            ok = False
            if verbose:
                print(f"selftest: {name}: exception {exc!r}")
        failures += not ok
        if verbose:
            print(f"selftest: {name}: {'ok' if ok else 'FAIL'}")
    if verbose:
        print(f"selftest: {len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return failures
