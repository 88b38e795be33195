"""Exception hierarchy shared by all hgx modules."""


class HgxError(Exception):
    """Base class for all domain errors."""


class ValidationError(HgxError):
    """A value violates a structural invariant (empty edge, bad id, ...)."""


class FormatError(HgxError):
    """A file does not match its declared binary/JSON format."""


class DimensionMismatchError(HgxError):
    """Two structures that must share a vertex universe or dimension do not."""


class ParameterError(HgxError):
    """An operation received parameters outside its valid range."""


class NotFoundError(HgxError):
    """A referenced edge, image or metadata field does not exist."""


class ConflictError(HgxError):
    """Optimistic-concurrency check failed: expected revision is stale."""


class UndefinedSimilarityError(HgxError):
    """Cosine similarity requested for a zero vector."""
