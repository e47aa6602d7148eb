"""Exception types shared across the package."""


class NumericalFailure(RuntimeError):
    """A numerical routine could not meet its accuracy contract."""


class WindowTooSmallError(NumericalFailure):
    """The site window truncates non-negligible probability mass."""


class ChebyshevConvergenceError(NumericalFailure):
    """Chebyshev order selection exceeded its hard cap (bad spectral bounds)."""
