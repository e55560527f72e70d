"""Exception types shared across the package."""


class SolitonLabError(Exception):
    pass


class ConvergenceFailure(SolitonLabError, RuntimeError):
    """Root finder ran out of iterations. Indicates a solver bug."""


class QuadratureFailure(SolitonLabError, RuntimeError):
    """Adaptive quadrature could not reach the requested accuracy."""


class DomainError(SolitonLabError, ValueError):
    """Operation is undefined for the given parameters (e.g. n = 1 collapse)."""


class DegenerateRicci(SolitonLabError, ArithmeticError):
    """Radial Ricci eigenvalue is not positive."""
