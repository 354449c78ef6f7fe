"""Truncations, eigenphases, spectral measures and free-case band structure."""
from .free import FreeMeasure, band_functions, free_dos, free_moment, free_symbol
from .measure import (
    MomentEstimate,
    SpectralMeasure,
    dos_moments,
    eigenphases,
    integrated_dos,
    ks_distance,
    pool,
    pooled_measure,
)
from .secular import (
    BoundaryVectors,
    SecularPolynomial,
    boundary_vectors,
    match_phases,
    secular_polynomial,
    secular_roots,
)
from .support import ArcUnion, SupportReport, coverage, predicted_support, support_check
from .truncation import TruncatedBlock, boundary_rank, trace_defect, truncate, zeroed_sites

__all__ = [
    "ArcUnion",
    "BoundaryVectors",
    "FreeMeasure",
    "MomentEstimate",
    "SecularPolynomial",
    "SpectralMeasure",
    "SupportReport",
    "TruncatedBlock",
    "band_functions",
    "boundary_rank",
    "boundary_vectors",
    "coverage",
    "dos_moments",
    "eigenphases",
    "free_dos",
    "free_moment",
    "free_symbol",
    "integrated_dos",
    "ks_distance",
    "match_phases",
    "pool",
    "pooled_measure",
    "predicted_support",
    "secular_polynomial",
    "secular_roots",
    "support_check",
    "trace_defect",
    "truncate",
    "zeroed_sites",
]
