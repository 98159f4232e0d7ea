"""Invariant-measure spatial averages over confocal caustics of the elliptic
billiard, cross-checked three ways: closed forms, adaptive quadrature, and
time averages / discrete invariants of simulated orbits.
"""
from .billiard_dynamics import (
    OrbitSample,
    RotationEstimate,
    find_caustic_for_period,
    iterate_orbit,
    next_tangency,
    prev_tangency,
    rotation_number,
    time_average,
)
from .conic_geometry import (
    BilliardTable,
    CausticSpec,
    Chord,
    caustic_axes,
    chord_endpoints,
    chord_length,
    curvature23,
    interior_cosine,
    joachimsthal,
    measure_density,
    outer_cosine,
)
from .elliptic_integrals import complete_k, complete_pi
from .errors import DomainError, NumericalError
from .invariant_suite import (
    InvariantReport,
    PeriodicOrbit,
    build_periodic_orbit,
    evaluate_invariants,
)
from .spatial_averages import (
    AverageResult,
    log_geomean_outer,
    mean_cosine,
    mean_curvature23,
    mean_sidelength,
    normalization,
)

__all__ = [
    "AverageResult",
    "BilliardTable",
    "CausticSpec",
    "Chord",
    "DomainError",
    "InvariantReport",
    "NumericalError",
    "OrbitSample",
    "PeriodicOrbit",
    "RotationEstimate",
    "build_periodic_orbit",
    "caustic_axes",
    "chord_endpoints",
    "chord_length",
    "complete_k",
    "complete_pi",
    "curvature23",
    "evaluate_invariants",
    "find_caustic_for_period",
    "interior_cosine",
    "iterate_orbit",
    "joachimsthal",
    "log_geomean_outer",
    "mean_cosine",
    "mean_curvature23",
    "mean_sidelength",
    "measure_density",
    "next_tangency",
    "normalization",
    "outer_cosine",
    "prev_tangency",
    "rotation_number",
    "time_average",
]
