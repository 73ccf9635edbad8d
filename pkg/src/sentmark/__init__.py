"""Sentence-level semantic watermarking toolkit.

Partition an embedding space (k-means clusters or LSH hyperplanes), steer a
sentence generator into pseudorandomly chosen valid regions via rejection
sampling, and detect the resulting signature with a one-proportion z-test.
Ships deterministic toy models so every experiment runs at desk scale.
"""

from .attacks import AttackConfig, attack_document, build_synonym_table, lexical_paraphrase
from .detection import (
    DetectionResult,
    ThresholdTable,
    calibrate_thresholds,
    classify,
    detect,
    z_score,
)
from .embedding import (
    EmbedderHandle,
    TOY_DIM,
    cosine_distance,
    embed_batch,
    normalize,
    tokenize,
    toy_embed,
)
from .errors import (
    ConfigError,
    DegenerateCorpusError,
    DegenerateEmbeddingError,
    DegenerateGeneratorError,
    DimensionMismatchError,
    InsufficientDataError,
    InsufficientTextError,
    PartitionLoadError,
    ProtocolContractError,
    SentmarkError,
    TransportError,
    UndefinedMetricError,
    UndefinedStatisticError,
)
from .evaluation import (
    EfficiencyReport,
    RocReport,
    ScoredDocument,
    auc,
    efficiency_stats,
    ent3,
    roc_report,
    sem_ent,
    tp_at_fpr,
)
from .generation import (
    GenerationTrace,
    WatermarkConfig,
    generate_watermarked,
    select_valid_regions,
)
from .partition import (
    KMeansPartition,
    LSHPartition,
    assign,
    fit_kmeans,
    fit_lsh,
    load_partition,
    lsh_margin_ok,
    lsh_signature,
    margin_ok,
    save_partition,
)
from .sentences import split_sentences
from .toylm import GeneratorHandle, make_corpus, make_prompt, toy_next_sentence

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "ConfigError",
    "DegenerateCorpusError",
    "DegenerateEmbeddingError",
    "DegenerateGeneratorError",
    "DetectionResult",
    "DimensionMismatchError",
    "EfficiencyReport",
    "EmbedderHandle",
    "GenerationTrace",
    "GeneratorHandle",
    "InsufficientDataError",
    "InsufficientTextError",
    "KMeansPartition",
    "LSHPartition",
    "PartitionLoadError",
    "ProtocolContractError",
    "RocReport",
    "ScoredDocument",
    "SentmarkError",
    "ThresholdTable",
    "TOY_DIM",
    "TransportError",
    "UndefinedMetricError",
    "UndefinedStatisticError",
    "WatermarkConfig",
    "assign",
    "attack_document",
    "auc",
    "build_synonym_table",
    "calibrate_thresholds",
    "classify",
    "cosine_distance",
    "detect",
    "efficiency_stats",
    "embed_batch",
    "ent3",
    "fit_kmeans",
    "fit_lsh",
    "generate_watermarked",
    "lexical_paraphrase",
    "load_partition",
    "lsh_margin_ok",
    "lsh_signature",
    "make_corpus",
    "make_prompt",
    "margin_ok",
    "normalize",
    "roc_report",
    "save_partition",
    "select_valid_regions",
    "sem_ent",
    "split_sentences",
    "tokenize",
    "toy_embed",
    "toy_next_sentence",
    "tp_at_fpr",
    "z_score",
]
