class BHDiracError(Exception):
    """Base class for all package errors."""


class DomainError(BHDiracError, ValueError):
    pass


class ConditioningError(BHDiracError):
    pass


class FrobeniusDegenerateError(BHDiracError):
    pass


class BranchError(BHDiracError, ValueError):
    pass


class QuadratureError(BHDiracError):
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class EigenConvergenceError(BHDiracError):
    def __init__(self, message, converged=()):
        super().__init__(message)
        self.converged = list(converged)


class SaddleError(BHDiracError):
    pass


class ShootingError(BHDiracError):
    def __init__(self, message, radius=None, last_energy=None):
        super().__init__(message)
        self.radius = radius
        self.last_energy = last_energy


class NoBoundStateError(BHDiracError):
    pass
