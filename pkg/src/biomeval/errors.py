"""Exception hierarchy. Every error raised on purpose derives from BiomevalError
so the CLI can turn it into a single-line diagnostic and a nonzero exit code."""


class BiomevalError(Exception):
    """Base class for all engine errors."""


class FormatError(BiomevalError):
    """A file could not be parsed (malformed JSON, bad CSV header, bad landmark line)."""


class ProtocolError(BiomevalError):
    """A protocol violates a structural rule; the message names the first violation."""


class AlignmentError(BiomevalError):
    """Degenerate anchors, missing landmarks, or an unusable alignment spec."""


class EmbeddingError(BiomevalError):
    """Extractor failure, dimension mismatch, zero vectors, missing ids."""


class MetricError(BiomevalError):
    """A metric was requested on a score set that cannot support it (e.g. no impostors)."""


class EvaluationError(BiomevalError):
    """Policy/protocol mismatch or score pools that do not cover the requested evaluation."""
