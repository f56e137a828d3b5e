"""Elevation-only shade construction for tori, with an analytic oracle."""
from .construction import (
    CANONICAL,
    ConstructionTrace,
    InterpretationVariant,
    ShadePath,
    TorusElevationSpec,
    derive_radii,
    run_construction,
    trace_shade_path,
    validate_trace,
)
from .oracle import Torus3, oracle_shade, true_angle

__version__ = "0.1.0"
