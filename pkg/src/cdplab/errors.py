"""Exception hierarchy shared by every cdplab module."""


class CdpLabError(Exception):
    """Base class for all library errors."""


class InvalidInput(CdpLabError, ValueError):
    pass


class NotHermitian(InvalidInput):
    pass


class NotCompletelyPositive(InvalidInput):
    pass


class NotTomographicallyComplete(CdpLabError):
    """Raised when the probe state has operator Schmidt rank below d_A**2."""


class ReconstructionFailed(CdpLabError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SolverFailed(CdpLabError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class ParseError(CdpLabError):
    """Malformed input file; ``field`` names the offending key when known."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class ValidationError(CdpLabError):
    """Input parsed but violates a domain invariant."""
