"""Exception hierarchy shared by all modules.

Three top-level categories map onto CLI exit codes: bad input data
(ValidationError, exit 3), numerical failure (SolverError, exit 4),
and file trouble (ArtifactIOError, exit 5).
"""


class SteklovError(Exception):
    """Base class for all package errors."""


class ValidationError(SteklovError):
    """Input data violates a documented precondition or invariant."""


class SolverError(SteklovError):
    """A numerical routine failed to produce a trustworthy result."""


class ArtifactIOError(SteklovError):
    """Reading or writing an artifact file failed."""


# --- graph construction -------------------------------------------------

class DegreeMismatch(ValidationError):
    pass


class DuplicateEdge(ValidationError):
    pass


class SelfLoop(ValidationError):
    pass


class OddTotalDegree(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotConnected(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass


class SamplingExhausted(ValidationError):
    """Rejection sampling hit its attempt budget without an accept."""


# --- meshes --------------------------------------------------------------

class MeshInvariantViolated(ValidationError):
    """A constructed mesh failed validation; diagnostics in args."""


class NonIntegerGenus(ValidationError):
    pass


class NonIntegerResult(ValidationError):
    pass


class UnknownLoop(ValidationError):
    pass


class OrientationConflict(ValidationError):
    """Internal consistency failure while gluing; indicates a bug."""


class DegenerateTriangle(ValidationError):
    """Triangle inequality margin too small for stable cotangents."""


# --- solvers -------------------------------------------------------------

class SingularInterior(SolverError):
    """Interior stiffness block not invertible (no Steklov boundary
    reaches some component)."""


class ConvergenceFailure(SolverError):
    """Eigensolver residual above tolerance; attained residual in args."""


class ZeroBoundaryNorm(ValidationError):
    pass


# --- experiments ---------------------------------------------------------

class InsufficientRecords(ValidationError):
    pass


class RunInvariantViolated(ValidationError):
    """A growth-run record failed one of its in-run invariants."""
