"""Watermark detection: recompute the seeded region chain and run a
one-proportion z-test on the valid-sentence count.

The first sentence only seeds the chain and is never counted, so a text of N
sentences yields S_T = N - 1 tested sentences.  Detection never consults
margins: a sentence that barely cleared the margin at generation time detects
exactly like one that cleared it with slack.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .embedding import EmbedderHandle, embed_batch
from .errors import InsufficientTextError, UndefinedStatisticError
from .generation import WatermarkConfig, select_valid_regions, valid_region_count
from .partition import region_of
from .sentences import split_sentences


def z_score(s_v: int, n: int, gamma: float) -> float:
    """(S_V - gamma*N) / sqrt(gamma*(1-gamma)*N)."""
    if n < 1:
        raise UndefinedStatisticError("z-score needs at least one tested sentence")
    if not 0 <= s_v <= n:
        raise ValueError(f"S_V={s_v} outside [0, {n}]")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    return (s_v - gamma * n) / math.sqrt(gamma * (1.0 - gamma) * n)


@dataclass(frozen=True)
class SentenceVerdict:
    text: str
    region: int
    valid: bool | None  # None for the seed sentence (never tested)


@dataclass
class DetectionResult:
    """Outcome of one detection run.

    ``sentence_count`` is the number of *tested* sentences (total minus the
    seed).  ``null_valid_rate`` is |G|/R, the exact null acceptance rate; it
    differs from gamma whenever gamma*R is fractional, while the z statistic
    always uses the configured gamma.
    """

    sentence_count: int
    valid_count: int
    z: float
    per_sentence: list
    null_valid_rate: float

    @property
    def valid_flags(self) -> list[bool]:
        return [v.valid for v in self.per_sentence if v.valid is not None]


def detect(
    text: str,
    partition,
    config: WatermarkConfig,
    embedder: EmbedderHandle,
) -> DetectionResult:
    """Recompute regions and count sentences landing in their step's valid set."""
    config.check_partition(partition)
    sentences = split_sentences(text)
    if len(sentences) < 2:
        raise InsufficientTextError(
            "detection needs at least two sentences (one seeds, one is tested)"
        )
    vectors = embed_batch(embedder, sentences)
    regions = [region_of(partition, v) for v in vectors]
    r_count = partition.region_count

    per_sentence = [SentenceVerdict(sentences[0], regions[0], None)]
    valid_count = 0
    for t in range(1, len(sentences)):
        valid_set = select_valid_regions(regions[t - 1], config.prime, r_count, config.gamma)
        ok = regions[t] in valid_set
        valid_count += ok
        per_sentence.append(SentenceVerdict(sentences[t], regions[t], ok))

    tested = len(sentences) - 1
    return DetectionResult(
        sentence_count=tested,
        valid_count=valid_count,
        z=z_score(valid_count, tested, config.gamma),
        per_sentence=per_sentence,
        null_valid_rate=valid_region_count(r_count, config.gamma) / r_count,
    )


@dataclass(frozen=True)
class ThresholdEntry:
    target_fpr: float
    threshold: float
    achieved_fpr: float
    saturated: bool


@dataclass
class ThresholdTable:
    entries: list

    def threshold_for(self, target_fpr: float) -> float:
        for e in self.entries:
            if e.target_fpr == target_fpr:
                return e.threshold
        raise KeyError(f"no calibrated threshold for target {target_fpr}")


THRESHOLD_SWEEP_MAX = 6.0
THRESHOLD_SWEEP_STEP = 0.01


def calibrate_thresholds(human_z: list[float], targets: list[float]) -> ThresholdTable:
    """Smallest threshold in a 0.01-step sweep of [0, 6] whose empirical
    false-positive rate on the human sample is <= each target.

    An unreachable target saturates at 6.0 (flagged) rather than failing.
    """
    if not human_z:
        raise ValueError("calibration needs a non-empty human z sample")
    for r in targets:
        if not 0.0 < r < 1.0:
            raise ValueError(f"target FPR must lie in (0, 1), got {r}")
    z_sorted = sorted(human_z)
    n = len(z_sorted)
    steps = int(round(THRESHOLD_SWEEP_MAX / THRESHOLD_SWEEP_STEP))

    def fpr_at(threshold: float) -> float:
        # count of z strictly above the threshold
        lo, hi = 0, n
        while lo < hi:
            mid = (lo + hi) // 2
            if z_sorted[mid] <= threshold:
                lo = mid + 1
            else:
                hi = mid
        return (n - lo) / n

    entries = []
    for target in targets:
        chosen = None
        for i in range(steps + 1):
            m = round(i * THRESHOLD_SWEEP_STEP, 2)
            if fpr_at(m) <= target:
                chosen = m
                break
        if chosen is None:
            entries.append(ThresholdEntry(target, THRESHOLD_SWEEP_MAX, fpr_at(THRESHOLD_SWEEP_MAX), True))
            warnings.warn(
                f"target FPR {target} unreachable within [0, {THRESHOLD_SWEEP_MAX}]; saturated",
                stacklevel=2,
            )
        else:
            entries.append(ThresholdEntry(target, chosen, fpr_at(chosen), False))
    return ThresholdTable(entries)


def classify(z: float, threshold: float) -> bool:
    """True (machine-generated) iff z strictly exceeds the threshold."""
    return z > threshold
