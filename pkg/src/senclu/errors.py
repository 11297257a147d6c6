"""Exception types raised by the senclu package."""


class SenCluError(Exception):
    """Base class for all senclu-specific failures."""


class CorpusFormatError(SenCluError):
    """A corpus file is malformed (bad JSON, missing fields, duplicate ids)."""


class EmbeddingFormatError(SenCluError):
    """An embedding file violates the EMB1 layout."""


class DegenerateVectorError(SenCluError):
    """A vector with zero Euclidean norm where a direction is required."""


class ProviderError(SenCluError):
    """An external embedding provider process failed."""


class AlignmentError(SenCluError):
    """Embedding rows do not line up with the corpus group index."""


class InsufficientDocumentsError(SenCluError):
    """Triplet generation needs at least two documents."""


class OverFilterError(SenCluError):
    """Filter fractions would remove every triplet."""


class IntegrityError(SenCluError):
    """A group reference does not resolve in the corpus."""


class InsufficientDataError(SenCluError):
    """Fewer sentence groups than requested topics."""


class UndefinedCoherenceError(SenCluError):
    """No topic has enough reference-scorable words for NPMI."""
