"""Sentence embeddings: unit-vector arithmetic, a deterministic built-in
hashing embedder, and batch embedding through handles (built-in or external).

The built-in embedder is a desk-scale stand-in for a real sentence encoder.
It is a signed bag-of-words feature hasher, so word order never matters and
replacing one word moves the vector by a bounded amount.  Its determinism
contract (part of the cross-port surface):

* tokenization: ``str.lower()`` then ASCII alphanumeric runs (``[0-9a-z]+``);
* per word, ``H = mix64(seed XOR fnv1a64(utf8(word)))``; the coordinate is
  ``H mod dim`` and the sign is ``+1`` when ``mix64(H)`` is even, else ``-1``;
* each occurrence adds ``sign`` to its coordinate, then the vector is
  L2-normalized.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (
    DegenerateEmbeddingError,
    DimensionMismatchError,
    ProtocolContractError,
)
from .rng import mix64

_WORD_RE = re.compile(r"[0-9a-z]+")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

TOY_DIM = 64  # default embedding width; small enough for fast clustering


def tokenize(text: str) -> list[str]:
    """Lowercased ASCII alphanumeric runs; the shared tokenizer."""
    return _WORD_RE.findall(text.lower())


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


@lru_cache(maxsize=1 << 20)
def _word_feature(word: str, dim: int, seed: int) -> tuple[int, int]:
    """(coordinate, sign) of a word under the hashing embedder."""
    h = mix64((seed & _MASK64) ^ fnv1a64(word.encode("utf-8")))
    sign = 1 if mix64(h) & 1 == 0 else -1
    return h % dim, sign


def normalize(v) -> np.ndarray:
    """Scale a raw vector to unit L2 norm.

    Raises DegenerateEmbeddingError on zero or non-finite input.
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise DimensionMismatchError(f"expected a 1-d vector of dim >= 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DegenerateEmbeddingError("non-finite component in raw vector")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0 or not np.isfinite(norm):
        raise DegenerateEmbeddingError("cannot normalize a zero vector")
    return arr / norm


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """1 - a.b on unit vectors; in [0, 2] up to float rounding."""
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return 1.0 - float(np.dot(a, b))


def toy_embed(text: str, dim: int = TOY_DIM, seed: int = 0) -> np.ndarray:
    """Embed one sentence with the built-in hashing embedder."""
    if dim < 2:
        raise DimensionMismatchError("embedding dim must be >= 2")
    tokens = tokenize(text)
    if not tokens:
        raise DegenerateEmbeddingError(f"no tokens in text: {text!r}")
    vec = np.zeros(dim, dtype=np.float64)
    for word in tokens:
        coord, sign = _word_feature(word, dim, seed)
        vec[coord] += sign
    if not vec.any():
        raise DegenerateEmbeddingError("all hashed features cancelled")
    return vec / np.linalg.norm(vec)


@dataclass(frozen=True)
class EmbedderHandle:
    """Immutable descriptor of an embedder; safe to share across threads.

    kind "toy" embeds locally; kind "external" speaks the newline-delimited
    JSON wire protocol through ``endpoint`` (see :mod:`sentmark.wire`).
    Both kinds promise: the same text always embeds to the same bits.
    """

    kind: str = "toy"
    dim: int = TOY_DIM
    seed: int = 0
    endpoint: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("toy", "external"):
            raise ValueError(f"unknown embedder kind: {self.kind!r}")
        if self.dim < 2:
            raise DimensionMismatchError("embedder dim must be >= 2")
        if self.kind == "external" and not self.endpoint:
            raise ValueError("external embedder needs an endpoint")


def embed_batch(handle: EmbedderHandle, texts: list[str]) -> list[np.ndarray]:
    """Embed texts in order; every result is unit-norm.

    External results are validated against the wire contract and re-normalized
    locally, so downstream cosine math never divides by a norm.
    """
    if not texts:
        raise ValueError("embed_batch needs at least one text")
    if handle.kind == "toy":
        return [toy_embed(t, handle.dim, handle.seed) for t in texts]

    from . import wire

    rows = wire.client_for(handle.endpoint).embed(texts, expected_dim=handle.dim)
    out = []
    for i, row in enumerate(rows):
        arr = np.asarray(row, dtype=np.float64)
        if arr.ndim != 1 or arr.size != handle.dim:
            raise ProtocolContractError(
                f"embedding {i} has dimension {arr.size}, handle declares {handle.dim}"
            )
        if not np.all(np.isfinite(arr)):
            raise ProtocolContractError(f"embedding {i} contains non-finite values")
        norm = float(np.linalg.norm(arr))
        if norm == 0.0:
            raise ProtocolContractError(f"embedding {i} is a zero vector")
        out.append(arr / norm)
    return out
