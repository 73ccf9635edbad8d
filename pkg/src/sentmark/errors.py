"""Exception taxonomy shared across the package.

Exit-code mapping for the CLI lives in ``sentmark.cli``; library code raises
these types and never calls ``sys.exit``.
"""


class SentmarkError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SentmarkError):
    """Invalid or inconsistent configuration values."""


class DegenerateEmbeddingError(SentmarkError):
    """Zero, empty, or non-finite input where a unit embedding is required."""


class DimensionMismatchError(SentmarkError):
    """Vectors or partitions with incompatible dimensions."""


class InsufficientDataError(SentmarkError):
    """Fewer data points than an operation needs (e.g. |points| < K)."""


class DegenerateCorpusError(SentmarkError):
    """Corpus has no usable structure (e.g. all points identical, K >= 2)."""


class InsufficientTextError(SentmarkError):
    """Text too short to test (detection needs a seed sentence plus one more)."""


class DegenerateGeneratorError(SentmarkError):
    """Generator produced no embeddable sentence within the try budget."""


class UndefinedStatisticError(SentmarkError):
    """Statistic requested on an empty sample (e.g. z-score with N = 0)."""


class UndefinedMetricError(SentmarkError):
    """Metric requested on inputs where it is undefined (empty score side,
    corpus with no trigram)."""


class PartitionLoadError(SentmarkError):
    """Partition file is malformed, truncated, of an unknown version, or
    violates a partition invariant."""


class TransportError(SentmarkError):
    """External endpoint unreachable, timed out, or emitted unparseable bytes."""


class ProtocolContractError(SentmarkError):
    """External endpoint answered, but violated the wire contract (wrong id,
    wrong count, wrong dimension, non-finite numbers, or an error object)."""
