"""Trace-norm and cb-norm estimation, isometry certification and two-outcome channel games."""

from .channels import LinearMapRep, from_kraus, transpose_map, identity_map, wh_channels
from .errors import (CertificationRefused, DomainError, ExtractionError, FactorizationError,
                     SolverError)
from .norms import (NormEstimate, diamond_norm_sdp, diamond_norm_seesaw, induced_trace_norm,
                    multiplicity_norm)
from .reports import CertificationReport

__version__ = "0.1.0"

__all__ = [
    "LinearMapRep", "from_kraus", "transpose_map", "identity_map", "wh_channels",
    "CertificationRefused", "DomainError", "ExtractionError", "FactorizationError", "SolverError",
    "NormEstimate", "diamond_norm_sdp", "diamond_norm_seesaw", "induced_trace_norm",
    "multiplicity_norm", "CertificationReport",
]
