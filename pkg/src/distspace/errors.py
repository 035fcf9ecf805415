"""Exception types raised across the package."""


class DistspaceError(Exception):
    """Base class for all errors raised by distspace."""


class GridError(DistspaceError, ValueError):
    """Invalid grid parameters, or a grid too large for the dof budget."""


class GridMismatchError(DistspaceError, ValueError):
    """Operands live on different grids."""


class OutOfBoxError(DistspaceError, ValueError):
    """A point (or a support ball) leaves the grid box."""


class SupportError(DistspaceError, ValueError):
    """A grid function violates its compact-support contract."""


class NonAtomicError(DistspaceError, ValueError):
    """An operation that needs a unit delta got something else."""


class ProbeError(DistspaceError, ValueError):
    """Empty or degenerate probe family."""


class IntegrabilityError(DistspaceError, ValueError):
    """A coefficient field is not square- or absolutely integrable on the grid."""


class CholeskyError(DistspaceError, ArithmeticError):
    """Covariance factorization failed even after jitter."""

    def __init__(self, message, min_eigenvalue):
        super().__init__(f"{message} (min eigenvalue {min_eigenvalue:.3e})")
        self.min_eigenvalue = min_eigenvalue


class HermitianError(DistspaceError, ValueError):
    """A Gram matrix that should be Hermitian is not."""


class StepError(DistspaceError, ValueError):
    """Finite-difference step too small (or too many directions) to be resolvable."""


class SymmetryError(DistspaceError, ValueError):
    """A two-point function required to be symmetric is not."""


class WindowError(DistspaceError, ValueError):
    """The flat region of a coordinate window does not cover the probed supports."""


class DegreeError(DistspaceError, ValueError):
    """A Borchers-algebra degree exceeds the truncation cap."""
