"""Structure-preserving simulation of the geometrically exact beam on SE(3)."""

__version__ = "0.1.0"

from . import beam, connection, covariant, integrators, liegroup, rigidbody  # noqa: E402
from .beam import BeamParams, BeamState  # noqa: E402
from .connection import Metric6  # noqa: E402
from .liegroup import Pose  # noqa: E402
from .rigidbody import RigidState  # noqa: E402

__all__ = [
    "BeamParams",
    "BeamState",
    "Metric6",
    "Pose",
    "RigidState",
    "beam",
    "connection",
    "covariant",
    "integrators",
    "liegroup",
    "rigidbody",
]
