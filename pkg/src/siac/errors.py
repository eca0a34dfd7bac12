"""Exception types shared across the package."""


class SiacError(ValueError):
    """Base class for validation and parsing failures."""


class LengthMismatchError(SiacError):
    """Two aligned sequences (labels vs tokens, weights vs frames) differ in length."""


class DegenerateEmbeddingError(SiacError):
    """An embedding has zero norm, so cosine similarity is undefined."""


class ParseError(SiacError):
    """A labeling, importance, embedding, or config file violates its schema."""
