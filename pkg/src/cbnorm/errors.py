"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the domain of an operation (bad shape, non-Hermitian, ...)."""


class FactorizationError(RuntimeError):
    """A dense factorization did not converge."""


class ExtractionError(RuntimeError):
    """A structure extraction produced residuals above tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class CertificationRefused(RuntimeError):
    """An operation refused to run because its certificate precondition failed.

    The failing report is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SolverError(RuntimeError):
    """The interior-point solver failed to reach the requested accuracy."""

    def __init__(self, message, last_iterate=None, gap=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.gap = gap
