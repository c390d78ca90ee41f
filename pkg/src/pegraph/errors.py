"""Exception hierarchy shared across the engine.

Exit-code mapping used by the CLI: validation/input problems -> 2,
query failures -> 3, numeric failures -> 4.
"""


class PegraphError(Exception):
    """Base class for all engine errors."""


class ValidationError(PegraphError):
    """Input violates a documented precondition or invariant."""


class CorpusParseError(ValidationError):
    """A corpus record could not be parsed; the message names its ordinal."""


class DegeneratePaperError(ValidationError):
    """A paper carries no community signal (all-zero factor row)."""


class QueryError(PegraphError):
    """A structurally valid query that cannot be answered on this index."""


class NumericError(PegraphError):
    """Numerical failure: non-finite values or non-convergence."""
