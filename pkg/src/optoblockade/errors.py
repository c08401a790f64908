"""Exception hierarchy shared by all modules."""


class BlockadeError(Exception):
    """Base class for errors raised by this package."""


class ParameterDomainError(BlockadeError, ValueError):
    """A parameter lies outside its physical or numerical domain."""


class TruncationError(BlockadeError):
    """An operator function is not converged on the truncated phonon space."""


class NumericError(BlockadeError):
    """A linear-algebra routine failed; ``point`` names the parameters involved."""

    def __init__(self, message, point=None):
        super().__init__(message if point is None else f"{message} at {point}")
        self.point = point


class LosslessResonanceError(NumericError):
    """A manifold block is singular (no loss at an exact resonance)."""


class UndefinedCorrelationError(BlockadeError):
    """g2(0) is undefined because the cavity carries no photons."""


class MixedStateError(BlockadeError):
    """No eigenvector has overlap >= 0.5 with the requested bare state."""

    def __init__(self, message, overlap):
        super().__init__(message)
        self.overlap = overlap


class NonConvergenceError(BlockadeError):
    """Phonon cutoff ceiling reached without meeting the g2 tolerance."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace
