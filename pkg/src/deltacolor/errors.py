class DeltaColorError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameters(DeltaColorError, ValueError):
    pass


class GraphFormatError(DeltaColorError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphInvariantError(DeltaColorError, ValueError):
    pass


class ProtocolError(DeltaColorError):
    """A vertex program addressed a vertex that is not its neighbor."""


class NonTerminationError(DeltaColorError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class PreconditionError(DeltaColorError, ValueError):
    pass


class EmptyChoiceError(DeltaColorError):
    """No free element was left for a vertex: its degree or input coloring broke the contract."""
