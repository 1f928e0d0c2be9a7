"""Numerical toolkit for Carleson measures, curve regularity and conformal maps of the disk."""
from .carleson import CarlesonReport, boundary_norm, sector_norm, vanishing_diagnosis
from .conformal import ConformalMap, FitError, fit, koebe_validate
from .curves import CurveSpec, generate
from .geometry import (
    AtomicMeasure,
    Disk,
    GeometryError,
    ResolutionError,
    SampledCurve,
    discretize_arclength,
    restrict,
)
from .metrics import ahlfors_constant, chord_arc_constant, moebius_regularity, smoothness_profile
from .transport import TransportError, norm_ratio, pull_back, push_forward

__version__ = "0.1.0"
