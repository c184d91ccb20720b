"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A sampler or transform received an out-of-range parameter."""


class ShapeMismatchError(ValueError):
    """Two arrays that must share a shape do not."""


class EmptyBankError(RuntimeError):
    """A mixing-picture bank contains no decodable images."""


class IncompleteGridError(ValueError):
    """The corruption x severity grid has missing or empty cells."""


class LogSchemaError(ValueError):
    """A prediction log line violates the JSONL schema.

    Carries the 1-based line number when raised during file ingestion.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
