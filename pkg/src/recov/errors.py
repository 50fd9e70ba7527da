"""Exception hierarchy shared across modules."""


class RecovError(Exception):
    """Base class for all package errors."""


class StructuralError(RecovError, ValueError):
    """Shapes, spaces or kinds do not fit together."""


class RankError(StructuralError):
    """A matrix expected to have full column rank does not."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(int(c) for c in columns)


class PreconditionError(RecovError, ValueError):
    """An operation was called outside its documented domain."""


class StandingAssumptionError(RecovError):
    """V meets the null space of M nontrivially; ``witness`` is a nonzero element of V ∩ N."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SolverError(RecovError):
    """A numerical core failed; ``report`` carries whatever partial state exists."""

    def __init__(self, message, report=None, trace=None):
        super().__init__(message)
        self.report = report
        self.trace = trace


class ConvergenceError(SolverError):
    """An iterative method hit its iteration cap before meeting its tolerance."""

    def __init__(self, message, gap=None, trace=None):
        super().__init__(message, trace=trace)
        self.gap = gap


class SizeError(StructuralError):
    """An exact routine would exceed its size cap; a sampled or bounded mode is available."""


class NoAdmissibleError(RecovError):
    """No model space in a nested family has a finite angle constant for the given measurements."""
