"""Random unitary five-diagonal operators: spectra, Lyapunov exponents and path sums."""

__version__ = "0.1.0"

from .errors import BandUnitaryError, ConfigurationError, DomainError, NumericError, UsageError
from .laurent import LaurentMatrix, LaurentPoly
from .model import (
    BandUnitary,
    Coefficients,
    DistributionSpec,
    PhaseField,
    PhaseModel,
    apply,
    build_free,
    build_u,
    factorize,
    phase_char_fn,
    sample_eta_iid,
    sample_phases,
)
from .transfer import (
    Cocycle,
    TransferMatrix,
    cocycle_extend,
    lyapunov_estimate,
    lyapunov_free,
    transfer_matrix,
)
from . import combinatorics, spectrum, thouless

__all__ = [
    "BandUnitary",
    "BandUnitaryError",
    "Cocycle",
    "Coefficients",
    "ConfigurationError",
    "DistributionSpec",
    "DomainError",
    "LaurentMatrix",
    "LaurentPoly",
    "NumericError",
    "PhaseField",
    "PhaseModel",
    "TransferMatrix",
    "UsageError",
    "apply",
    "build_free",
    "build_u",
    "cocycle_extend",
    "combinatorics",
    "factorize",
    "lyapunov_estimate",
    "lyapunov_free",
    "phase_char_fn",
    "sample_eta_iid",
    "sample_phases",
    "spectrum",
    "thouless",
    "transfer_matrix",
]
