"""Exception hierarchy shared by every module of the package."""


class SurfdivError(Exception):
    """Base class for all errors raised by surfdiv."""


class LatticeMismatchError(SurfdivError):
    """Two classes from different lattices were combined."""


class SignatureError(SurfdivError):
    """An intersection form is degenerate or not of signature (1, n)."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class PreconditionError(SurfdivError):
    """An operation was called on input outside its contract."""


class ConsistencyError(SurfdivError):
    """An internal invariant failed.

    Usually this means the curve list does not generate the effective cone
    (the Mori-dream input contract is violated). ``trace`` holds the partial
    algorithm trace when raised from the non-vanishing pipeline.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ModelIncompleteError(SurfdivError):
    """A cone question was asked of a lattice with no curve generators."""


class ResourceError(SurfdivError):
    """A search exceeded its configured size cap."""


class RadicandError(SurfdivError):
    """Quadratic scalars with different radicands were mixed."""
