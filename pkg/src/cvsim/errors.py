"""Exception hierarchy for the simulator.

Every error raised by the library derives from CvsimError so callers can
catch physics failures separately from programming errors.
"""


class CvsimError(Exception):
    """Base class for all library errors."""


class ShapeMismatchError(CvsimError, ValueError):
    """An array has the wrong shape or an odd phase-space dimension."""


class NonSymmetricError(CvsimError, ValueError):
    """A covariance matrix is not symmetric within tolerance."""


class NonPhysicalError(CvsimError, ValueError):
    """A covariance matrix violates the uncertainty-relation positivity bound."""


class NonPhysicalBeamError(NonPhysicalError):
    """A requested light beam has var_x * var_p below the uncertainty limit."""


class NotSymplecticError(CvsimError, ValueError):
    """A matrix fails the symplectic identity check."""


class BadIndexError(CvsimError, IndexError):
    """A mode index is out of range, duplicated, or an index set is empty."""


class DegenerateQuadratureError(CvsimError, ValueError):
    """The measured quadrature has (numerically) zero variance."""


class BadGeometryError(CvsimError, ValueError):
    """A beam geometry is inconsistent (repeated ensembles, bad indices, ...)."""


class UnknownScheduleError(CvsimError, KeyError):
    """An angle-schedule name is not one of the built-in schedules."""


class BadPartitionError(CvsimError, ValueError):
    """Mode index sets do not form the required partition."""


class NotThreeModesError(CvsimError, ValueError):
    """A tripartite operation was applied to a state that is not 3-mode."""


class NoConvergenceError(CvsimError, RuntimeError):
    """The separability feasibility solver could not reach a verdict."""
