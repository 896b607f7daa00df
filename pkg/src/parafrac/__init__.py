"""Fractal analysis of parabolic orbits: directed areas of epsilon-neighborhoods and
recovery of the formal invariants (k, a1, a) from them."""
from __future__ import annotations

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticFit,
    ScaleBasis,
    closed_form_K1,
    closed_form_Kk1,
    estimate_box_dimension,
    fit_directed_area,
    gamma,
    imaginary_residual_factor,
    minkowski_constant,
    phi_k,
)
from .dynamics import (
    AttractingDirection,
    Orbit,
    StopRule,
    attracting_directions,
    default_initial_point,
    iterate_orbit,
    select_sector,
)
from .geometry import (
    NeighborhoodMeasurement,
    OrbitMeasurer,
    crescent_area,
    crescent_centroid,
    critical_index,
    directed_area,
    finite_set_measurement,
    nucleus_area,
)
from .oracle import OracleEstimate, mc_union_measure
from .powerseries import (
    FormalInvariants,
    Germ,
    TruncatedSeries,
    comp_inverse,
    compose,
    conjugate,
    extended_normal_form,
    residual_index,
)
from .recovery import (
    AnalysisReport,
    EpsGrid,
    FractalProperties,
    InvarianceReport,
    analyze,
    recover_a,
    recover_a1,
    recover_k,
    verify_invariance,
)

__all__ = [name for name in dir() if not name.startswith("_")]
