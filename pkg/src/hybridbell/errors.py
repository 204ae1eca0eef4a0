"""Exception types shared across the package."""


class ParameterDomainError(ValueError):
    """A parameter lies outside its physical domain (e.g. an efficiency above one)."""


class TruncationError(ValueError):
    """The number-basis cutoff is too small for the requested amplitudes."""

    def __init__(self, message, required_n_max=None):
        super().__init__(message)
        self.required_n_max = required_n_max


class QuadratureError(RuntimeError):
    """A frequency or time integral failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DegenerateFilterError(ValueError):
    """The atom barely changes the transmitted field, so no output amplitude can be produced."""


class RowError(RuntimeError):
    """A pipeline step failed for one named parameter row; the cause is chained."""

    def __init__(self, row, cause):
        super().__init__(f"row {row!r}: {type(cause).__name__}: {cause}")
        self.row = row
        self.cause = cause
