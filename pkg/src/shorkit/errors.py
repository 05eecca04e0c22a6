"""Exception hierarchy shared by every layer of the package."""


class ShorError(Exception):
    """Base class for all errors raised by shorkit."""


class ParameterError(ShorError, ValueError):
    """Invalid user-facing parameters (a, N, widths, ...)."""


class TypingError(ShorError):
    """A reversible circuit is not well typed for the register it runs on."""


class IrreversibleError(ParameterError):
    """Requested multiplier is not invertible modulo N."""


class TranslationError(ShorError):
    """A circuit cannot be expressed in the target gate set."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending


class ResourceError(ShorError):
    """The simulator ran out of qubit width or hit its support cap."""

    def __init__(self, message, peak_support=None):
        super().__init__(message)
        self.peak_support = peak_support


class QasmError(ShorError):
    """Malformed or unsupported OpenQASM input."""

    def __init__(self, message, line=None, column=None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column
