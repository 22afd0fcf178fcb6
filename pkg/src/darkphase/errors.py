"""Exception types shared by all modules."""


class ArgumentError(ValueError):
    """An argument violates a precondition (bad dimension, out-of-range value)."""


class NumericsError(RuntimeError):
    """A numerical contract failed: non-finite values, unphysical states,
    or a residual above tolerance."""

    def __init__(self, message, residual=None, time=None):
        super().__init__(message)
        self.residual = residual
        self.time = time


class ResolutionError(NumericsError):
    """Sampling too coarse to resolve a phase unambiguously; rerun with more
    samples."""
