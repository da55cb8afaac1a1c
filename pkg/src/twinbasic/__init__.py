"""Twin-basic (p,q) numbers, shifted factorials and hypergeometric series."""

from .numkernel import (
    DivergenceError,
    DomainError,
    PoleError,
    SeriesValue,
    ToleranceSpec,
    TruncationPolicy,
    TwinBasicError,
    approx_equal,
    precision,
)
from .pqcore import (
    BasePair,
    ParamDoublet,
    gbin_expand,
    poch_ratio_infinite,
    pq_binomial,
    pq_exponential,
    pq_factorial,
    pq_pochhammer,
    twin_basic_number,
)
from .series import (
    Phi,
    Psi11,
    SeriesSpec,
    StructuralError,
    bibasic,
    embed_phi_to_Phi,
    eval_Phi,
    eval_Psi11,
    eval_bibasic,
    eval_phi_classical,
    evaluate,
    phi,
    project_Phi_to_phi,
    psi11,
)
from .identities import hermite_pq, list_identities, run_suite, verify_identity

__all__ = [
    "BasePair", "DivergenceError", "DomainError", "ParamDoublet", "Phi", "PoleError", "Psi11",
    "SeriesSpec", "SeriesValue", "StructuralError", "ToleranceSpec", "TruncationPolicy", "TwinBasicError",
    "approx_equal", "bibasic", "embed_phi_to_Phi", "eval_Phi", "eval_Psi11", "eval_bibasic",
    "eval_phi_classical", "evaluate", "gbin_expand", "hermite_pq", "list_identities", "phi",
    "poch_ratio_infinite", "pq_binomial", "pq_exponential", "pq_factorial", "pq_pochhammer", "precision",
    "project_Phi_to_phi", "psi11", "run_suite", "twin_basic_number", "verify_identity",
]
