"""Paraphrase-attack simulators with controllable semantic drift.

Two desk-scale stand-ins for neural paraphrasers:

* lexical: each covered word is independently swapped for a table synonym
  with probability ``strength``.  The default table is mined against the
  hashing embedder so that most synonyms collide with their original's
  feature (zero drift) and a minority land elsewhere, making cosine drift
  grow smoothly with strength instead of jumping.
* resample: each sentence is, with probability ``strength``, replaced by a
  fresh generator sentence from its own topical pool, picked to sit closest
  to ``target_similarity`` against the original.  Models aggressive
  meaning-preserving rewrites.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .embedding import EmbedderHandle, _word_feature, embed_batch, tokenize
from .errors import DegenerateEmbeddingError
from .rng import Xoshiro256StarStar, derive_seed
from .sentences import split_sentences
from . import toylm

_TAG_ATTACK = 0xA77A
_TAG_TABLE = 0x7AB1E
_TAG_RESAMPLE = 0x4E5A

_TOKEN_SPLIT = re.compile(r"([0-9A-Za-z]+)")

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class AttackConfig:
    method: str  # "lexical" | "resample"
    strength: float
    seed: int = 0
    synonym_table: dict = field(default_factory=dict, hash=False)
    target_similarity: float = 0.8

    def __post_init__(self):
        if self.method not in ("lexical", "resample"):
            raise ValueError(f"unknown attack method: {self.method!r}")
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError("strength must lie in [0, 1]")
        if not 0.0 < self.target_similarity <= 1.0:
            raise ValueError("target_similarity must lie in (0, 1]")


def _pseudo_word(rng: Xoshiro256StarStar) -> str:
    length = 5 + rng.randbelow(4)
    return "".join(_LETTERS[rng.randbelow(26)] for _ in range(length))


def build_synonym_table(
    words,
    dim: int,
    embed_seed: int,
    table_seed: int,
    n_matched: int = 3,
    n_fresh: int = 1,
) -> dict[str, list[str]]:
    """Mine a synonym table against the hashing embedder.

    For each word, ``n_matched`` pseudo-words hashing to the same coordinate
    and sign (invisible replacements) plus ``n_fresh`` hashing elsewhere
    (each costs one coordinate out, one in).  Expected embedding drift per
    replacement is therefore n_fresh / (n_matched + n_fresh) of a full swap.
    """
    rng = Xoshiro256StarStar(derive_seed(table_seed, _TAG_TABLE))
    vocab = set(words)
    table: dict[str, list[str]] = {}
    for word in words:
        coord, sign = _word_feature(word, dim, embed_seed)
        matched: list[str] = []
        fresh: list[str] = []
        while len(matched) < n_matched or len(fresh) < n_fresh:
            cand = _pseudo_word(rng)
            if cand in vocab or cand == word:
                continue
            c, s = _word_feature(cand, dim, embed_seed)
            if c == coord and s == sign:
                if len(matched) < n_matched:
                    matched.append(cand)
            elif c != coord:
                if len(fresh) < n_fresh:
                    fresh.append(cand)
        table[word] = matched + fresh
    return table


@lru_cache(maxsize=8)
def default_synonym_table(dim: int, embed_seed: int, table_seed: int = 0) -> dict:
    """Table covering the whole toy vocabulary for a given embedder geometry."""
    vocab = [w for pool in toylm.TOPICS for w in pool]
    return build_synonym_table(vocab, dim, embed_seed, table_seed)


def lexical_paraphrase(sentence: str, config: AttackConfig) -> str:
    """Swap covered words for table synonyms with probability ``strength``.

    Words without a table entry pass through; capitalization of a replaced
    word's first letter is preserved.  Deterministic given (sentence, config).
    """
    rng = Xoshiro256StarStar(derive_seed(config.seed, _TAG_ATTACK))
    parts = _TOKEN_SPLIT.split(sentence)
    for i, part in enumerate(parts):
        if i % 2 == 0:  # delimiter slice, never a word
            continue
        synonyms = config.synonym_table.get(part.lower())
        if not synonyms:
            continue
        if rng.random() < config.strength:
            pick = synonyms[rng.randbelow(len(synonyms))]
            if part[0].isupper():
                pick = pick.capitalize()
            parts[i] = pick
    return "".join(parts)


def _resample_sentence(sentence: str, config: AttackConfig, embedder: EmbedderHandle, rng) -> str:
    topic = toylm.dominant_topic(sentence)
    if topic is None:
        return sentence
    try:
        original = embed_batch(embedder, [sentence])[0]
    except DegenerateEmbeddingError:
        return sentence
    best, best_gap = sentence, float("inf")
    for _ in range(24):
        cand = toylm.toy_topic_sentence(topic, rng.next_u64())
        sim = float(original @ embed_batch(embedder, [cand])[0])
        gap = abs(sim - config.target_similarity)
        if gap < best_gap:
            best, best_gap = cand, gap
    return best


def attack_document(
    text: str,
    config: AttackConfig,
    embedder: EmbedderHandle,
) -> tuple[str, list[float]]:
    """Attack a document sentence-by-sentence.

    Returns the attacked text and, per sentence, the cosine similarity
    between original and attacked embeddings computed with the *same*
    embedder detection will use; that is the fidelity bookkeeping for
    robustness experiments.  A degenerate embedding on either side records
    similarity 0.0.
    """
    sentences = split_sentences(text)
    attacked: list[str] = []
    sims: list[float] = []
    for idx, sentence in enumerate(sentences):
        sub_seed = derive_seed(config.seed, _TAG_ATTACK, idx)
        if config.method == "lexical":
            sub = AttackConfig(
                method="lexical",
                strength=config.strength,
                seed=sub_seed,
                synonym_table=config.synonym_table,
                target_similarity=config.target_similarity,
            )
            new = lexical_paraphrase(sentence, sub)
        else:
            rng = Xoshiro256StarStar(derive_seed(sub_seed, _TAG_RESAMPLE))
            new = sentence
            if rng.random() < config.strength:
                new = _resample_sentence(sentence, config, embedder, rng)
        attacked.append(new)
        if new == sentence:
            sims.append(1.0)
        else:
            try:
                a, b = embed_batch(embedder, [sentence, new])
                sims.append(float(a @ b))
            except DegenerateEmbeddingError:
                sims.append(0.0)
    return " ".join(attacked), sims
