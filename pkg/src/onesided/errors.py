"""Exception types shared across the package.

The CLI maps ``InputError`` to exit code 1 and ``AlgorithmFailure`` to exit
code 2, so every error path raises one of these (or a subclass).
"""


class InputError(ValueError):
    """Malformed or inconsistent input."""


class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PreconditionError(InputError):
    """An algorithm was called on input that violates its stated preconditions."""


class AlgorithmFailure(RuntimeError):
    """An algorithm ran but could not produce the requested object."""


class NotIndependentError(InputError):
    def __init__(self, message, witness):
        self.witness = witness
        super().__init__(message)


class ImproperColoringError(AlgorithmFailure):
    def __init__(self, message, witness):
        self.witness = witness
        super().__init__(message)


class CompletionFailure(AlgorithmFailure):
    def __init__(self, message, component, reason):
        self.component = component
        self.reason = reason
        super().__init__(message)


class RecoveryFailure(AlgorithmFailure):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or []
        super().__init__(message)
