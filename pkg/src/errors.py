"""Exception hierarchy for beam-sbp.

Library code raises these; the CLI catches ``BeamSbpError`` and turns it into an
error row plus a non-zero exit code.
"""


class BeamSbpError(Exception):
    """Base class for all beam-sbp errors."""


class InvalidDomainError(BeamSbpError):
    """Grid end points are not ordered (x_r <= x_l)."""


class TooFewPointsError(BeamSbpError):
    """A grid needs at least two points."""


class GridTooSmallError(BeamSbpError):
    """The grid cannot hold two non-overlapping boundary closures."""


class UnsupportedOrderError(BeamSbpError):
    """No operator data exists for the requested interior order."""


class OperatorDataError(BeamSbpError):
    """Coefficient data is malformed or fails its consistency checks."""


class BisectionFailureError(BeamSbpError):
    """No positive feasible alpha inside the bisection bracket."""


class InfeasibleAlphasError(BeamSbpError):
    """The (alpha_II, alpha_III) pair leaves N-tilde indefinite."""


class RankDeficientConstraintsError(BeamSbpError):
    """The constraint rows of a projection are (numerically) dependent."""


class IncompatibleSpecError(BeamSbpError):
    """Enforcement method and condition set do not fit together."""


class NonConvergenceError(BeamSbpError):
    """An iterative eigenvalue estimate or root search did not converge."""


class InstabilityDetectedError(BeamSbpError):
    """The time integration blew up."""


class LengthMismatchError(BeamSbpError):
    """Two sampled vectors that should be paired differ in length."""


class ConfigError(BeamSbpError):
    """A configuration file or flag value is malformed."""
