"""Exception types shared across the package.

The command line harness maps these onto process exit codes, so the
hierarchy matters: anything that is the caller's fault (bad arguments,
violated preconditions, inadmissible step sizes) derives from
ContractViolationError, while runtime numerical failures get their own
classes.
"""


class GeomintError(Exception):
    """Base class for all package-specific errors."""


class ContractViolationError(GeomintError):
    """An operation was called with arguments that violate its contract."""


class InadmissibleStepError(ContractViolationError):
    """A step size failed the non-resonance admissibility policy.

    Carries the offending ResonanceReport in the ``report`` attribute.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ResonantStepError(GeomintError):
    """A trigonometric step hit a filter singularity sinc(h*omega_j) = 0."""

    def __init__(self, message, block_index=None, h_omega=None):
        super().__init__(message)
        self.block_index = block_index
        self.h_omega = h_omega


class SolverDivergenceError(GeomintError):
    """An implicit solve failed to converge.

    Attributes record how far the solve got so callers can log the
    failure as an experimental outcome instead of a crash.
    """

    def __init__(self, message, iterations=None, residual=None, step_index=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.step_index = step_index


class RankDeficiencyError(GeomintError):
    """A low-rank factor lost column rank during a substep."""

    def __init__(self, message, substep=None):
        super().__init__(message)
        self.substep = substep


class SingularCoreError(GeomintError):
    """The core factor of a low-rank representation is exactly singular."""
