"""Exception hierarchy shared by the solvers, the estimate lab and the CLI."""


class DuetError(Exception):
    """Base class for every error raised by this package."""


class NonFiniteSymbol(DuetError, ValueError):
    pass


class EmptyTrajectory(DuetError, ValueError):
    pass


class OutOfSpan(DuetError, ValueError):
    pass


class NoContraction(DuetError, RuntimeError):
    """Picard iteration failed to converge on the requested interval.

    ``iterations`` and ``history`` (successive relative increments) are kept
    for diagnostics; callers normally respond by halving the interval.
    """

    def __init__(self, message, iterations=0, history=()):
        super().__init__(message)
        self.iterations = iterations
        self.history = list(history)


class NonzeroMeanVelocity(DuetError, ValueError):
    pass


class UnresolvedSoliton(DuetError, ValueError):
    pass


class ZeroBeta(DuetError, ValueError):
    pass


class DegenerateCouplings(DuetError, ValueError):
    pass


class StepUnderflow(DuetError, RuntimeError):
    """Step size fell below ``min_step``; ``log`` carries the partial run."""

    def __init__(self, message, log=None, state=None):
        super().__init__(message)
        self.log = log
        self.state = state


class EmptyLog(DuetError, ValueError):
    pass


class HypothesisViolated(DuetError, ValueError):
    pass


class PreconditionViolated(DuetError, ValueError):
    pass


class LatticeMismatch(DuetError, ValueError):
    pass


class SchemaError(DuetError, ValueError):
    """Invalid run configuration; ``path`` is the dotted key path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class CheckpointError(DuetError, IOError):
    pass


class BadMagic(CheckpointError):
    pass


class VersionMismatch(CheckpointError):
    pass


class DimsMismatch(CheckpointError):
    pass


class SystemMismatch(CheckpointError):
    pass
