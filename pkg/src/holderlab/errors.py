"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain where a quantity is defined."""


class DegeneratePointError(DomainError):
    """A derivative needed as a denominator vanishes at the requested point."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature stopped before reaching its tolerance.

    The best available estimate is kept on ``partial`` so callers can still
    report it.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
