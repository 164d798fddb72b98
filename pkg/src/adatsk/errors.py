"""Exception types raised across the package."""


class AdaTSKError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(AdaTSKError, ValueError):
    pass


class CapacityError(AdaTSKError, ValueError):
    """A construction would exceed a hard size limit."""


class DegenerateFiringError(AdaTSKError, FloatingPointError):
    """Every rule fired with strength zero for at least one instance."""


class InvalidStateError(AdaTSKError, RuntimeError):
    pass


class TrainingDivergedError(AdaTSKError, FloatingPointError):
    def __init__(self, phase, iteration=None):
        self.phase = phase
        self.iteration = iteration
        where = f" at iteration {iteration}" if iteration is not None else ""
        super().__init__(f"training diverged in phase '{phase}'{where}: non-finite loss or gradient")


class DataFormatError(AdaTSKError, ValueError):
    """Malformed input file; message carries row/column location."""
