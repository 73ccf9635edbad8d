"""Encoder backends behind the bridge.

``hash:<dim>[:<seed>]`` selects the built-in deterministic hashing encoder
(no model download, used by the protocol tests).  Any other identifier is
treated as a sentence-transformers model name and loaded lazily.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

import numpy as np

_TOKEN_RE = re.compile(r"[0-9a-z]+")


@dataclass(frozen=True)
class BridgeConfig:
    model: str
    batch_size: int = 32
    device: str | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


class HashEncoder:
    """Deterministic sha256 feature-hashing encoder; inference-free."""

    def __init__(self, dim: int, seed: int = 0):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.dim = dim
        self.seed = seed

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            tokens = _TOKEN_RE.findall(text.lower())
            if not tokens:
                raise ValueError(f"text {i} has no tokens to embed")
            for tok in tokens:
                digest = hashlib.sha256(f"{self.seed}:{tok}".encode("utf-8")).digest()
                bucket = int.from_bytes(digest[:8], "big") % self.dim
                sign = 1.0 if digest[8] % 2 == 0 else -1.0
                out[i, bucket] += sign
        return out


class SentenceTransformerEncoder:
    """Thin wrapper over a sentence-transformers model, pinned to eval mode."""

    def __init__(self, config: BridgeConfig):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:  # pragma: no cover - depends on extras
            raise RuntimeError(
                "sentence-transformers is not installed; "
                "install the 'real' extra or use a hash:<dim> model"
            ) from exc
        self._model = SentenceTransformer(config.model, device=config.device)
        self._model.eval()
        self._batch_size = config.batch_size
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: list[str]) -> np.ndarray:
        import torch

        with torch.no_grad():
            return np.asarray(
                self._model.encode(
                    texts,
                    batch_size=self._batch_size,
                    convert_to_numpy=True,
                    normalize_embeddings=False,
                    show_progress_bar=False,
                ),
                dtype=np.float64,
            )


def load_encoder(config: BridgeConfig):
    if config.model.startswith("hash:"):
        fields = config.model.split(":")
        dim = int(fields[1])
        seed = int(fields[2]) if len(fields) > 2 else 0
        return HashEncoder(dim, seed)
    return SentenceTransformerEncoder(config)
