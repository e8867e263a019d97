"""Quantum Fisher information of a finite anisotropic XY chain at weak and strong bath coupling."""

from __future__ import annotations

from .autodiff import Jet2
from .errors import (
    DegenerateEnergyError,
    DomainError,
    NumericError,
    ParameterError,
    ResourceError,
    SingularityError,
    UndefinedRatioError,
    XyqfiError,
)
from .model import ChainParams, ModeTable, momentum_sets
from .polaron import BathParams, RenormalizedParams, decay_factor, decay_factor_quadrature, renormalize
from .qfi import (
    QfiBreakdown,
    SubdivisionResult,
    kl_divergence_check,
    microscopic_subdivision,
    phase_boundary_h,
    phenomenological_qfi,
    qfi_total,
    quantum_contribution,
    ratio_ppa,
    subdivision_regression,
    tilde_classical,
)
from .specfun import SignedLog, polygamma
from .thermo import PartitionTerms, free_entropy_jet, log_partition, partition_terms

__version__ = "0.1.0"
