"""Exception types shared across the package."""


class NetsyncError(Exception):
    """Base class for all errors raised by netsync."""


class ValidationError(NetsyncError, ValueError):
    """An input violates a documented precondition."""


class InvalidSizeError(ValidationError):
    pass


class SymmetryError(ValidationError):
    pass


class CertificateFailedError(NetsyncError):
    """A bound was requested from a certificate that does not hold."""


class DivergenceError(NetsyncError):
    """The integrated state left the finite region.

    ``t`` is the last time at which the state was still finite.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t
