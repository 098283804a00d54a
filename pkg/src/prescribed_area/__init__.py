"""Numerical certificates for sharp area bounds of minimal submanifolds through a
prescribed point of a geodesic ball in hyperbolic space, Euclidean space and the sphere."""

__version__ = "0.1.0"

from ._accel import BACKEND
from .geometry import SpaceForm, AxisChart, KPlane, GeometryError, SingularPointError, FootPointError
from .profiles import ProfileContext, BallData
from .field import FieldConfig, DivBreakdown, CertReport
from .surfaces import SampledSubmanifold, MonotonicityReport
from .sphere_geodesics import ChordProblem
from .domains import DomainProfile, WedgeResult

__all__ = [
    "BACKEND",
    "SpaceForm",
    "AxisChart",
    "KPlane",
    "GeometryError",
    "SingularPointError",
    "FootPointError",
    "ProfileContext",
    "BallData",
    "FieldConfig",
    "DivBreakdown",
    "CertReport",
    "SampledSubmanifold",
    "MonotonicityReport",
    "ChordProblem",
    "DomainProfile",
    "WedgeResult",
]
