"""Deterministic toy sentence generator and synthetic fixtures.

Sentences are drawn from eight disjoint topical word pools, so embeddings of
toy sentences form eight well-separated bundles on the sphere: the same
structure the k-means partitioner is meant to discover.  The sampler is a
pure function of (seed, context length, try index); successive tries differ,
repeated calls do not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import normalize
from .rng import Xoshiro256StarStar, derive_seed

TOPICS: tuple[tuple[str, ...], ...] = (
    # astronomy
    ("star", "planet", "orbit", "comet", "nebula", "galaxy", "telescope", "eclipse",
     "meteor", "lunar", "solar", "cosmic", "quasar", "nova", "photon", "parallax",
     "zenith", "aurora", "crater", "asteroid", "pulsar", "supernova", "equinox", "starlight"),
    # cooking
    ("onion", "garlic", "butter", "simmer", "roast", "knead", "dough", "saffron",
     "vinegar", "skillet", "braise", "whisk", "ladle", "broth", "pepper", "sizzle",
     "oven", "glaze", "marinade", "stew", "flour", "nutmeg", "basil", "caramel"),
    # sailing
    ("harbor", "mast", "rudder", "keel", "anchor", "tide", "breeze", "sail",
     "compass", "knot", "hull", "deck", "rigging", "buoy", "helm", "starboard",
     "wake", "channel", "gull", "mooring", "spinnaker", "lagoon", "ballast", "voyage"),
    # geology
    ("granite", "basalt", "quartz", "sediment", "fault", "magma", "erosion", "fossil",
     "stratum", "mineral", "shale", "tectonic", "canyon", "glacier", "bedrock", "limestone",
     "marble", "ore", "seismic", "volcano", "delta", "moraine", "gypsum", "karst"),
    # music
    ("violin", "cello", "tempo", "melody", "chord", "rhythm", "sonata", "octave",
     "harmony", "cadence", "fugue", "aria", "timbre", "crescendo", "maestro", "oboe",
     "clarinet", "concerto", "refrain", "waltz", "ballad", "lyric", "percussion", "chorus"),
    # gardening
    ("tulip", "compost", "trellis", "seedling", "mulch", "pruning", "orchard", "blossom",
     "fern", "ivy", "peony", "lavender", "thyme", "marigold", "hedge", "loam",
     "perennial", "graft", "pollen", "nectar", "rosebush", "sapling", "weed", "wheelbarrow"),
    # chess
    ("pawn", "rook", "bishop", "knight", "gambit", "checkmate", "endgame", "castling",
     "zugzwang", "stalemate", "fianchetto", "blunder", "sacrifice", "opening", "middlegame",
     "promotion", "fork", "pin", "skewer", "grandmaster", "notation", "rank", "file", "queen"),
    # weather
    ("drizzle", "thunder", "lightning", "humid", "frost", "blizzard", "hail", "monsoon",
     "cyclone", "fog", "gale", "sleet", "downpour", "overcast", "barometer", "forecast",
     "squall", "mist", "rainbow", "dew", "heatwave", "chill", "cloudburst", "gust"),
)

N_TOPICS = len(TOPICS)

WORD_TO_TOPIC: dict[str, int] = {w: i for i, pool in enumerate(TOPICS) for w in pool}

# domain tags feeding derive_seed so independent streams never collide
_TAG_SENTENCE = 0x5E17
_TAG_PROMPT = 0x9201
_TAG_CORPUS = 0xC0B9

_TERMINAL_CHOICES = (".", ".", ".", ".", ".", ".", "!", "?")


@dataclass(frozen=True)
class GeneratorHandle:
    """Immutable descriptor of a sentence generator.

    The toy kind samples from the topical pools; ``spread`` is the
    temperature-like knob: the probability that any given word is stolen
    from a different pool, pushing the sentence embedding away from its
    topic bundle.  External kinds answer the "continue" wire op.
    """

    kind: str = "toy"
    seed: int = 0
    spread: float = 0.15
    endpoint: tuple = ()

    def __post_init__(self):
        if self.kind not in ("toy", "external"):
            raise ValueError(f"unknown generator kind: {self.kind!r}")
        if not 0.0 <= self.spread <= 1.0:
            raise ValueError("spread must lie in [0, 1]")
        if self.kind == "external" and not self.endpoint:
            raise ValueError("external generator needs an endpoint")


def _sample_sentence(rng: Xoshiro256StarStar, topic: int, spread: float) -> str:
    pool = TOPICS[topic]
    length = 6 + rng.randbelow(5)
    words = []
    prev = None
    for _ in range(length):
        use_pool = pool
        if spread > 0.0 and rng.random() < spread:
            use_pool = TOPICS[rng.randbelow(N_TOPICS)]
        w = use_pool[rng.randbelow(len(use_pool))]
        while w == prev:
            w = use_pool[rng.randbelow(len(use_pool))]
        words.append(w)
        prev = w
    terminal = _TERMINAL_CHOICES[rng.randbelow(len(_TERMINAL_CHOICES))]
    return words[0].capitalize() + " " + " ".join(words[1:]) + terminal


def toy_next_sentence(lm: GeneratorHandle, context: list[str], try_index: int) -> str:
    """One candidate sentence; a pure function of (seed, len(context), try_index)."""
    rng = Xoshiro256StarStar(derive_seed(lm.seed, _TAG_SENTENCE, len(context), try_index))
    topic = rng.randbelow(N_TOPICS)
    return _sample_sentence(rng, topic, lm.spread)


def toy_topic_sentence(topic: int, seed: int, spread: float = 0.0) -> str:
    """A fresh sentence pinned to one topical pool (resample-attack source)."""
    rng = Xoshiro256StarStar(derive_seed(seed, _TAG_SENTENCE, topic))
    return _sample_sentence(rng, topic, spread)


def dominant_topic(text: str) -> int | None:
    """Topic pool with the most word hits; ties to the lowest pool index."""
    from .embedding import tokenize

    counts = [0] * N_TOPICS
    for tok in tokenize(text):
        t = WORD_TO_TOPIC.get(tok)
        if t is not None:
            counts[t] += 1
    best = max(counts)
    if best == 0:
        return None
    return counts.index(best)


def make_prompt(seed: int, doc_index: int, spread: float = 0.15) -> str:
    """Deterministic one-sentence prompt for document ``doc_index``."""
    rng = Xoshiro256StarStar(derive_seed(seed, _TAG_PROMPT, doc_index))
    return _sample_sentence(rng, rng.randbelow(N_TOPICS), spread)


def make_paragraph(seed: int, index: int, spread: float = 0.15) -> str:
    """Deterministic multi-sentence paragraph (3 to 6 sentences)."""
    rng = Xoshiro256StarStar(derive_seed(seed, _TAG_CORPUS, index))
    n = 3 + rng.randbelow(4)
    sents = [_sample_sentence(rng, rng.randbelow(N_TOPICS), spread) for _ in range(n)]
    return " ".join(sents)


def make_corpus(n_paragraphs: int, seed: int, spread: float = 0.15) -> list[str]:
    """Synthetic fitting corpus: n paragraphs over the eight topics."""
    return [make_paragraph(seed, i, spread) for i in range(n_paragraphs)]


def make_clustered_embeddings(
    k: int, n_per_cluster: int, dim: int, seed: int, jitter: float = 0.04
):
    """Synthetic bundles with known generator centers.

    Returns (points, labels, centers).  Centers are random unit vectors kept
    pairwise separated (cosine distance > 0.5); points are centers plus
    isotropic Gaussian jitter, re-normalized.
    """
    rng = Xoshiro256StarStar(seed)
    centers = np.empty((k, dim), dtype=np.float64)
    placed = 0
    while placed < k:
        c = normalize([rng.gauss() for _ in range(dim)])
        if placed and float(np.max(centers[:placed] @ c)) > 0.5:
            continue
        centers[placed] = c
        placed += 1
    points = np.empty((k * n_per_cluster, dim), dtype=np.float64)
    labels = np.empty(k * n_per_cluster, dtype=np.int64)
    row = 0
    for i in range(k):
        for _ in range(n_per_cluster):
            noise = np.array([rng.gauss() for _ in range(dim)])
            points[row] = normalize(centers[i] + jitter * noise)
            labels[row] = i
            row += 1
    return points, labels, centers
