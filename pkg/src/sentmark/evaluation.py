"""Detection-quality and generation-quality metrics.

AUC is the exact Mann-Whitney statistic (ties credit 0.5), computed with
integer rank arithmetic so it agrees bit-for-bit with a brute-force pairwise
count.  Entropies are reported in bits.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .embedding import EmbedderHandle, embed_batch, normalize, tokenize
from .errors import DegenerateCorpusError, InsufficientDataError, UndefinedMetricError
from .generation import REASON_BLOCKED, REASON_DEGENERATE, REASON_MARGIN
from .partition import fit_kmeans, assign
from .sentences import split_sentences


@dataclass(frozen=True)
class ScoredDocument:
    doc_id: str
    label: str  # "machine" | "human"
    z: float

    def __post_init__(self):
        if self.label not in ("machine", "human"):
            raise ValueError(f"label must be 'machine' or 'human', got {self.label!r}")
        if not math.isfinite(self.z):
            raise ValueError(f"non-finite z for {self.doc_id!r}")


def _check_sides(pos, neg) -> None:
    if not pos or not neg:
        raise UndefinedMetricError("AUC/TPR need at least one score on each side")
    for v in pos:
        if not math.isfinite(v):
            raise UndefinedMetricError("non-finite score in positive side")
    for v in neg:
        if not math.isfinite(v):
            raise UndefinedMetricError("non-finite score in negative side")


def auc(pos, neg) -> float:
    """P(pos > neg) + 0.5 P(pos = neg), exactly.

    Midrank formulation: doubled ranks stay integers, so the numerator is
    exact and the single float division matches the brute-force pairwise
    count bit-for-bit.
    """
    _check_sides(pos, neg)
    n_pos, n_neg = len(pos), len(neg)
    scored = sorted([(v, 1) for v in pos] + [(v, 0) for v in neg])
    doubled_rank_pos = 0  # 2 * sum of midranks of positive scores
    i = 0
    n = len(scored)
    while i < n:
        j = i
        while j < n and scored[j][0] == scored[i][0]:
            j += 1
        doubled_midrank = (i + 1) + j  # ranks are 1-based, group spans i+1..j
        for k in range(i, j):
            if scored[k][1] == 1:
                doubled_rank_pos += doubled_midrank
        i = j
    doubled_u = doubled_rank_pos - n_pos * (n_pos + 1)
    return doubled_u / (2 * n_pos * n_neg)


def tp_at_fpr(pos, neg, fpr: float) -> float:
    """TPR at the smallest threshold whose empirical FPR is <= fpr.

    Classification is strict (score > threshold), matching
    :func:`sentmark.detection.classify`.
    """
    _check_sides(pos, neg)
    if not 0.0 < fpr < 1.0:
        raise ValueError(f"fpr must lie in (0, 1), got {fpr}")
    n_neg = len(neg)
    # largest k with k/n_neg <= fpr, robust to float rounding of fpr * n_neg
    k = math.floor(fpr * n_neg)
    while k + 1 <= n_neg and (k + 1) / n_neg <= fpr:
        k += 1
    while k > 0 and k / n_neg > fpr:
        k -= 1
    neg_desc = sorted(neg, reverse=True)
    threshold = neg_desc[k] if k < n_neg else neg_desc[-1]
    return sum(1 for v in pos if v > threshold) / len(pos)


def roc_points(pos, neg):
    """(threshold, fpr, tpr) at every distinct score, descending."""
    _check_sides(pos, neg)
    points = []
    for thr in sorted(set(pos) | set(neg), reverse=True):
        fp = sum(1 for v in neg if v > thr) / len(neg)
        tp = sum(1 for v in pos if v > thr) / len(pos)
        points.append((thr, fp, tp))
    return points


@dataclass
class RocReport:
    auc: float
    tp_at: dict
    n_pos: int
    n_neg: int


def roc_report(pos, neg, fpr_targets=(0.01, 0.05)) -> RocReport:
    return RocReport(
        auc=auc(pos, neg),
        tp_at={f: tp_at_fpr(pos, neg, f) for f in fpr_targets},
        n_pos=len(pos),
        n_neg=len(neg),
    )


def _entropy_bits(counts) -> float:
    # summed over sorted counts so the result is permutation-invariant
    total = sum(counts)
    h = 0.0
    for c in sorted(counts):
        if c:
            p = c / total
            h -= p * math.log2(p)
    return h


def ent3(corpus) -> float:
    """Shannon entropy (bits) of the word-trigram frequency distribution."""
    counts: Counter = Counter()
    for text in corpus:
        toks = tokenize(text)
        for i in range(len(toks) - 2):
            counts[(toks[i], toks[i + 1], toks[i + 2])] += 1
    if not counts:
        raise UndefinedMetricError("corpus yields no word trigram")
    return _entropy_bits(counts.values())


def doc_embedding(text: str, embedder: EmbedderHandle) -> np.ndarray:
    """Normalized mean of a document's sentence embeddings."""
    vectors = embed_batch(embedder, split_sentences(text))
    return normalize(np.mean(vectors, axis=0))


def sem_ent(docs, embedder: EmbedderHandle, k: int = 50, seed: int = 0) -> float:
    """Entropy (bits) of k-means cluster assignments of document embeddings.

    A corpus with no semantic spread (all documents embedding identically)
    cannot be clustered; it scores 0 bits with a warning.
    """
    if len(docs) < k:
        raise InsufficientDataError(f"sem_ent needs at least k={k} documents, got {len(docs)}")
    points = np.stack([doc_embedding(d, embedder) for d in docs])
    try:
        part = fit_kmeans(points, k, seed)
    except DegenerateCorpusError:
        warnings.warn("degenerate corpus: all document embeddings identical", stacklevel=2)
        return 0.0
    hist = [0] * part.k
    for p in points:
        hist[assign(part, p)] += 1
    return _entropy_bits(hist)


@dataclass
class EfficiencyReport:
    mean_candidates_per_sentence: float
    rejection_share: dict  # reason -> fraction of all rejections
    fallback_rate: float
    total_sentences: int
    total_candidates: int
    total_rejections: int

    def to_dict(self) -> dict:
        return {
            "mean_candidates_per_sentence": self.mean_candidates_per_sentence,
            "rejection_share": dict(self.rejection_share),
            "fallback_rate": self.fallback_rate,
            "total_sentences": self.total_sentences,
            "total_candidates": self.total_candidates,
            "total_rejections": self.total_rejections,
        }


def efficiency_stats(traces) -> EfficiencyReport:
    """Sampling-efficiency statistics pooled over generation traces."""
    traces = list(traces)
    if not traces:
        raise ValueError("efficiency_stats needs at least one trace")
    sentences = 0
    candidates = 0
    fallbacks = 0
    reasons: Counter = Counter()
    for tr in traces:
        sentences += len(tr.sentences)
        candidates += tr.candidates_drawn()
        fallbacks += tr.fallback_count()
        for rej in tr.rejection_log:
            reasons[rej.reason] += 1
    total_rej = sum(reasons.values())
    share = {
        reason: (reasons.get(reason, 0) / total_rej if total_rej else 0.0)
        for reason in (REASON_BLOCKED, REASON_MARGIN, REASON_DEGENERATE)
    }
    return EfficiencyReport(
        mean_candidates_per_sentence=candidates / sentences if sentences else 0.0,
        rejection_share=share,
        fallback_rate=fallbacks / sentences if sentences else 0.0,
        total_sentences=sentences,
        total_candidates=candidates,
        total_rejections=total_rej,
    )
