"""Watermarked generation: seeded valid-region selection and margin-gated
rejection sampling over candidate sentences.

Each step seeds the package PRNG with ``previous_region * prime`` (64-bit
wrapping multiply), Fisher-Yates shuffles the region indices, and keeps the
first ``max(1, floor(gamma * R))`` as the valid set.  Candidates are drawn
until one lands in a valid region and clears the margin test; after ``n_max``
tries the last embeddable candidate is emitted anyway (fallback), because
bounded latency beats a perfect signal.  The trace records every rejection,
which is what makes sampling-efficiency claims measurable afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from .embedding import EmbedderHandle, embed_batch
from .errors import (
    ConfigError,
    DegenerateEmbeddingError,
    DegenerateGeneratorError,
    DimensionMismatchError,
)
from .partition import partition_margin_ok, region_of
from .rng import Xoshiro256StarStar
from .sentences import split_sentences
from .toylm import GeneratorHandle, toy_next_sentence

_MASK64 = (1 << 64) - 1

DEFAULT_PRIME = 2_147_483_647  # 2**31 - 1
DEFAULT_N_MAX = 100

REASON_BLOCKED = "blocked-region"
REASON_MARGIN = "margin"
REASON_DEGENERATE = "degenerate"


def _is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 2**64."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class WatermarkConfig:
    """Everything generation and detection must share."""

    gamma: float
    margin: float
    prime: int = DEFAULT_PRIME
    n_max: int = DEFAULT_N_MAX
    mode: str = "kmeans"

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.margin < 0.0:
            raise ConfigError(f"margin must be >= 0, got {self.margin}")
        if self.n_max < 1:
            raise ConfigError(f"n_max must be >= 1, got {self.n_max}")
        if self.mode not in ("kmeans", "lsh"):
            raise ConfigError(f"mode must be 'kmeans' or 'lsh', got {self.mode!r}")
        if not (1 < self.prime <= _MASK64):
            raise ConfigError("prime must be a positive 64-bit integer > 1")
        if not _is_prime(self.prime):
            raise ConfigError(f"{self.prime} is not prime")

    def check_partition(self, partition) -> None:
        if partition.mode != self.mode:
            raise ConfigError(
                f"config mode {self.mode!r} does not match partition mode {partition.mode!r}"
            )
        if math.floor(self.gamma * partition.region_count) < 1:
            raise ConfigError(
                f"gamma={self.gamma} with {partition.region_count} regions "
                "leaves no whole valid region"
            )

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "margin": self.margin,
            "prime": self.prime,
            "n_max": self.n_max,
            "mode": self.mode,
        }


@lru_cache(maxsize=1 << 14)
def _valid_regions(prev_region: int, prime: int, r_count: int, gamma: float) -> frozenset:
    seed = (prev_region * prime) & _MASK64
    rng = Xoshiro256StarStar(seed)
    order = list(range(r_count))
    rng.shuffle(order)
    g = max(1, math.floor(gamma * r_count))
    return frozenset(order[:g])


def select_valid_regions(prev_region: int, prime: int, r_count: int, gamma: float) -> frozenset:
    """Valid-region set G seeded by the previous sentence's region.

    Pure and deterministic: same (prev_region, prime, R, gamma) always yields
    the same set of size ``max(1, floor(gamma * R))``.
    """
    if not 0 <= prev_region < r_count:
        raise ValueError(f"prev_region {prev_region} outside [0, {r_count})")
    if not 0.0 < gamma < 1.0:
        raise ConfigError(f"gamma must lie in (0, 1), got {gamma}")
    return _valid_regions(prev_region, prime, r_count, gamma)


def valid_region_count(r_count: int, gamma: float) -> int:
    """|G| under the floor-with-minimum rule; the true null validity rate is
    this divided by R, which differs from gamma whenever gamma*R is fractional."""
    return max(1, math.floor(gamma * r_count))


@dataclass(frozen=True)
class SentenceDraw:
    text: str
    region: int
    accepted_on_try: int
    fallback: bool


@dataclass(frozen=True)
class Rejection:
    step: int
    try_index: int
    reason: str


@dataclass
class GenerationTrace:
    """Full record of one watermarked generation run."""

    prompt: str
    seed_sentence: str
    seed_region: int
    sentences: list = field(default_factory=list)
    rejection_log: list = field(default_factory=list)
    config: WatermarkConfig | None = None

    def document_text(self, include_seed: bool = True) -> str:
        parts = [self.seed_sentence] if include_seed else []
        parts.extend(s.text for s in self.sentences)
        return " ".join(parts)

    def candidates_drawn(self) -> int:
        return sum(s.accepted_on_try for s in self.sentences)

    def fallback_count(self) -> int:
        return sum(1 for s in self.sentences if s.fallback)

    def to_step_objects(self) -> list[dict]:
        """JSON-lines form: step 0 carries the run header, then one object
        per generated sentence with its rejections folded in."""
        lines = [
            {
                "step": 0,
                "prompt": self.prompt,
                "seed_sentence": self.seed_sentence,
                "seed_region": self.seed_region,
                "config": self.config.to_dict() if self.config else None,
            }
        ]
        by_step: dict[int, list] = {}
        for rej in self.rejection_log:
            by_step.setdefault(rej.step, []).append(rej)
        for t, s in enumerate(self.sentences, start=1):
            lines.append(
                {
                    "step": t,
                    "text": s.text,
                    "region": s.region,
                    "accepted_on_try": s.accepted_on_try,
                    "fallback": s.fallback,
                    "rejections": [
                        {"try": r.try_index, "reason": r.reason} for r in by_step.get(t, [])
                    ],
                }
            )
        return lines

    @classmethod
    def from_step_objects(cls, objs: list[dict]) -> "GenerationTrace":
        header = next(o for o in objs if o["step"] == 0)
        cfg = WatermarkConfig(**header["config"]) if header.get("config") else None
        trace = cls(
            prompt=header["prompt"],
            seed_sentence=header["seed_sentence"],
            seed_region=header["seed_region"],
            config=cfg,
        )
        for o in sorted((o for o in objs if o["step"] > 0), key=lambda o: o["step"]):
            trace.sentences.append(
                SentenceDraw(
                    text=o["text"],
                    region=int(o["region"]),
                    accepted_on_try=int(o["accepted_on_try"]),
                    fallback=bool(o["fallback"]),
                )
            )
            for r in o.get("rejections", []):
                trace.rejection_log.append(Rejection(o["step"], int(r["try"]), r["reason"]))
        return trace


def next_sentence(lm: GeneratorHandle, context: list[str], try_index: int) -> str:
    """Draw one candidate from the generator behind the handle."""
    if lm.kind == "toy":
        return toy_next_sentence(lm, context, try_index)
    from . import wire

    return wire.client_for(lm.endpoint).continue_text(context, try_index)


def generate_watermarked(
    lm: GeneratorHandle,
    embedder: EmbedderHandle,
    partition,
    config: WatermarkConfig,
    prompt: str,
    t_sentences: int,
) -> GenerationTrace:
    """Run the rejection-sampling loop for ``t_sentences`` steps.

    The prompt's final sentence seeds step 1; every accepted or fallback
    sentence is appended to the generator context and its region seeds the
    next step (detection recomputes regions from the actual text, so the
    chain must too, fallbacks included).
    """
    if t_sentences < 1:
        raise ValueError("t_sentences must be >= 1")
    config.check_partition(partition)
    if embedder.dim != partition.dim:
        raise DimensionMismatchError(
            f"embedder dim {embedder.dim} does not match partition dim {partition.dim}"
        )
    prompt_sentences = split_sentences(prompt)
    seed_sentence = prompt_sentences[-1]
    seed_vec = embed_batch(embedder, [seed_sentence])[0]
    prev_region = region_of(partition, seed_vec)

    trace = GenerationTrace(
        prompt=prompt,
        seed_sentence=seed_sentence,
        seed_region=prev_region,
        config=config,
    )
    r_count = partition.region_count
    context = list(prompt_sentences)

    for step in range(1, t_sentences + 1):
        valid = select_valid_regions(prev_region, config.prime, r_count, config.gamma)
        last_embeddable: tuple[str, int] | None = None
        accepted = None
        for try_index in range(1, config.n_max + 1):
            raw = next_sentence(lm, context, try_index)
            stripped = raw.strip()
            if not stripped:
                trace.rejection_log.append(Rejection(step, try_index, REASON_DEGENERATE))
                continue
            candidate = split_sentences(stripped)[0]
            try:
                vec = embed_batch(embedder, [candidate])[0]
            except DegenerateEmbeddingError:
                trace.rejection_log.append(Rejection(step, try_index, REASON_DEGENERATE))
                continue
            region = region_of(partition, vec)
            last_embeddable = (candidate, region)
            if region not in valid:
                trace.rejection_log.append(Rejection(step, try_index, REASON_BLOCKED))
                continue
            if not partition_margin_ok(partition, vec, config.margin):
                trace.rejection_log.append(Rejection(step, try_index, REASON_MARGIN))
                continue
            accepted = SentenceDraw(candidate, region, try_index, fallback=False)
            break
        if accepted is None:
            if last_embeddable is None:
                raise DegenerateGeneratorError(
                    f"no embeddable candidate in {config.n_max} tries at step {step}"
                )
            text, region = last_embeddable
            accepted = SentenceDraw(text, region, config.n_max, fallback=True)
        trace.sentences.append(accepted)
        context.append(accepted.text)
        prev_region = accepted.region

    return trace
