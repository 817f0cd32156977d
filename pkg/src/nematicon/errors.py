"""Exception types raised by the solvers."""


class NematiconError(Exception):
    """Base class for all solver errors."""


class BracketError(NematiconError):
    """Both endpoints of a shooting bracket classify identically."""


class NewtonDivergence(NematiconError):
    """A Newton iteration hit its iteration cap without converging."""


class SingularSystem(NematiconError):
    """A linear boundary-value system is singular (unreachable for b > 0)."""


class PicardStall(NematiconError):
    """The Picard iteration delta grew for three consecutive sweeps.

    Carries the last iterate so sweeps can record partial results.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NonMonotoneScan(NematiconError):
    """A shooting-parameter scan shows more than one class transition."""


class CflViolation(NematiconError):
    """Requested wave time step exceeds the explicit stability bound."""


class LinearSolveFailure(NematiconError):
    """A tridiagonal solve failed (unreachable for dt > 0)."""


class DomainTooSmall(NematiconError):
    """Grid does not extend past the inflated support region."""


class ZeroProfile(NematiconError):
    """Operation undefined on an identically-zero profile."""


class ConfigError(NematiconError):
    """Malformed run configuration; message names the key and line."""
