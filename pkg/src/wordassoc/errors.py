"""Exception types raised by the library.

Everything derives from ``ValueError`` so callers that only care about
"bad input" can catch one thing; the CLI maps these to exit status 1.
"""


class WordAssocError(ValueError):
    pass


class EmbeddingFormatError(WordAssocError):
    """Malformed embedding file (bad header, arity, duplicates, non-finite)."""


class MissingTokenError(WordAssocError):
    def __init__(self, token: str, where: str = "embedding vocabulary"):
        self.token = token
        super().__init__(f"token {token!r} not found in {where}")


class UnobservedPairError(WordAssocError):
    """A probability was requested for a pair with zero co-occurrence count."""

    def __init__(self, center: str, context: str):
        self.pair = (center, context)
        super().__init__(f"unobserved pair ({center!r}, {context!r})")


class DegenerateError(WordAssocError):
    """A quantity is undefined for the given input (zero norm, tie, 0/0)."""
