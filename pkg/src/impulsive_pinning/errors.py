"""Exception types raised across the package."""


class PinningError(Exception):
    """Base class for all package errors."""


class GraphError(PinningError, ValueError):
    """Malformed graph input (negative weights, self-loops, bad shape)."""


class NoRootError(PinningError):
    """The graph has no spanning tree, so no single node can pin it."""


class SingularSolveError(PinningError):
    """Null-vector elimination left a residual above tolerance."""


class DegenerateGapError(PinningError):
    """More than one eigenvalue of the root-block form sits at zero."""


class ConvergenceError(PinningError):
    """An iterative eigen-solver failed to converge."""


class NotInRootError(PinningError):
    """The pinned vertex carries zero left-null weight."""


class DomainError(PinningError, ValueError):
    """A certificate formula was evaluated outside its domain."""


class ZeroMeanError(PinningError):
    """The weighted mean relative to the target is exactly zero."""


class StepSizeError(PinningError, ValueError):
    """Non-positive sampling interval."""


class DivergenceError(PinningError):
    """State magnitude exceeded the divergence guard."""


class MismatchError(PinningError):
    """A trajectory was checked against a different graph."""
