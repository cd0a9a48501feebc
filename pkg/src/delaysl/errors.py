"""Exception hierarchy shared by all solver stages."""


class DelaySLError(Exception):
    """Base class for every error raised by this package."""


class GridError(DelaySLError, ValueError):
    """Malformed grid, off-grid anchor or out-of-interval evaluation."""


class ValidationError(DelaySLError, ValueError):
    """Input data (delay, potential, spectrum, config) fails its contract."""


class NonConvergence(DelaySLError):
    def __init__(self, n, j, iterations=50):
        self.n = n
        self.j = j
        super().__init__(f"Newton iteration for eigenvalue n={n} (j={j}) did not converge "
                         f"in {iterations} iterations")


class RootCollision(DelaySLError):
    def __init__(self, n, m, j):
        self.n, self.m, self.j = n, m, j
        super().__init__(f"eigenvalues n={n} and n={m} (j={j}) converged to the same root")


class BoundaryTooClose(DelaySLError):
    """A characteristic-function zero lies on (or too near) the counting contour."""


class AllRowsDiscarded(DelaySLError):
    """Every asymptotic row was rejected by the |cos| threshold."""


class IllConditioned(DelaySLError):
    """Least-squares system is too badly conditioned to trust."""


class DomainViolation(DelaySLError):
    """Reconstruction intervals do not nest; the delay is outside [2pi/5, pi/2)."""


class StageError(DelaySLError):
    """Wraps a failure inside :func:`delaysl.inverse.solve_inverse` with its stage label."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
