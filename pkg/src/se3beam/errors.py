"""Exception hierarchy shared by all se3beam modules."""


class Se3BeamError(Exception):
    """Base class for every error raised by se3beam."""


class NotInAlgebra(Se3BeamError, ValueError):
    """A 4x4 matrix does not have the se(3) block structure."""


class NearSingular(Se3BeamError, ValueError):
    """The logarithm was requested too close to its branch cut (angle ~ pi)."""


class SingularMetric(Se3BeamError, ValueError):
    """An inertia/stiffness operator is not symmetric positive definite."""


class GridTooCoarse(Se3BeamError, ValueError):
    pass


class CflViolated(Se3BeamError, ValueError):
    pass


class NonFiniteState(Se3BeamError, FloatingPointError):
    pass


class InsufficientHistory(Se3BeamError, ValueError):
    """A residual needs more stored time slices than were given."""


class ConfigError(Se3BeamError, ValueError):
    pass


class FormatError(Se3BeamError, ValueError):
    pass
