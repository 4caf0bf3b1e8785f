"""Exception hierarchy.

``DataError`` marks problems with the input data (bad manifests, documents
that normalize to nothing, documents too short to shingle).  The CLI maps it
to exit code 2; anything else escaping is an internal error.
"""


class DataError(ValueError):
    """Input data violates a documented contract."""


class EmptyDocumentError(DataError):
    """Normalization left no tokens."""


class ManifestError(DataError):
    """A manifest line could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DocumentTooShortError(DataError):
    """A document has fewer tokens than the requested shingle order."""


class ConvergenceError(RuntimeError):
    """Iterative estimation stopped before meeting its tolerance.

    ``last`` holds the final iterate.
    """

    def __init__(self, message, last):
        self.last = last
        super().__init__(message)


class StageError(RuntimeError):
    """An experiment stage failed; ``stage`` names it, ``cause`` is the original error."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")
