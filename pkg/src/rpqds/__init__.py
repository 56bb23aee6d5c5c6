"""Random-pairing quantum digital signatures: rates, bounds, simulation."""

__version__ = "0.1.0"

from .channels import ScfParams, SnsParams, SystemParams
from .errors import (
    ConvergenceError,
    DomainError,
    InfeasibleError,
    NoDataError,
    RpqdsError,
)
from .finite import FiniteParams, finite_rate_pipeline
from .optimize import SearchSpace, optimize, scan_distance
from .pairing import (
    ChannelObservables,
    PairedStats,
    binary_entropy,
    inv_binary_entropy,
    pair_observables,
    secure_fraction,
)
from .security import RateResult, SecurityReport, asymptotic_pipeline

__all__ = [
    "__version__",
    "ChannelObservables",
    "ConvergenceError",
    "DomainError",
    "FiniteParams",
    "InfeasibleError",
    "NoDataError",
    "PairedStats",
    "RateResult",
    "RpqdsError",
    "ScfParams",
    "SearchSpace",
    "SecurityReport",
    "SnsParams",
    "SystemParams",
    "asymptotic_pipeline",
    "binary_entropy",
    "finite_rate_pipeline",
    "inv_binary_entropy",
    "optimize",
    "pair_observables",
    "scan_distance",
    "secure_fraction",
]
