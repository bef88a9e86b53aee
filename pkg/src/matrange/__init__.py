"""Joint q-matricial ranges of Hermitian matrix tuples.

Membership oracles backed by Choi-matrix feasibility, norm-criterion
witnesses, simplex dilations, constructive block compressions, and a finite
block-repetition model of the essential matricial range.
"""

from .choi import (
    ChoiMatrix,
    MembershipVerdict,
    apply_choi,
    apply_choi_tuple,
    choi_identity,
    choi_of_isometry,
    choi_of_kraus,
    choi_of_map,
    choi_trace_map,
    cstar_combine,
    kraus_decomposition,
    membership,
    random_member,
    random_ucp_choi,
)
from .core import (
    HermTuple,
    Isometry,
    NormTestTuple,
    herm_eig,
    hermitize,
    kron,
    pencil_norm,
    psd_project,
    spectral_norm,
)
from .errors import (
    CertificateError,
    CompletenessError,
    DegenerateSimplexError,
    DimensionMismatchError,
    MatrangeError,
    NotInSimplexError,
    SchemaError,
    SolverError,
    TruncationTooSmallError,
)
from .essential import (
    BlockRepetitionModel,
    PerturbationTuple,
    boundary_polyline,
    essential_membership,
    essential_pencil_norm,
    interior_test,
    preserving_perturbation,
    support_margin,
)
from .lambdapq import lambda_ess_check, lambda_realize, lambda_search
from .simplex import (
    Povm,
    Simplex,
    barycentric_povm,
    naimark_dilate,
    simplex_norm_bound,
    simplex_preservation_check,
)
from .spatial import (
    BlockCompression,
    CompressionSample,
    block_compress,
    compress,
    realize_member,
    sample_compressions,
)
from .witness import check_inequality, search_witness, vertex_pencil_norm

__version__ = "0.1.0"

__all__ = [
    "BlockCompression",
    "BlockRepetitionModel",
    "CertificateError",
    "ChoiMatrix",
    "CompletenessError",
    "CompressionSample",
    "DegenerateSimplexError",
    "DimensionMismatchError",
    "HermTuple",
    "Isometry",
    "MatrangeError",
    "MembershipVerdict",
    "NormTestTuple",
    "NotInSimplexError",
    "PerturbationTuple",
    "Povm",
    "SchemaError",
    "Simplex",
    "SolverError",
    "TruncationTooSmallError",
    "apply_choi",
    "apply_choi_tuple",
    "barycentric_povm",
    "block_compress",
    "boundary_polyline",
    "check_inequality",
    "choi_identity",
    "choi_of_isometry",
    "choi_of_kraus",
    "choi_of_map",
    "choi_trace_map",
    "compress",
    "cstar_combine",
    "essential_membership",
    "essential_pencil_norm",
    "herm_eig",
    "hermitize",
    "interior_test",
    "kraus_decomposition",
    "kron",
    "lambda_ess_check",
    "lambda_realize",
    "lambda_search",
    "membership",
    "naimark_dilate",
    "pencil_norm",
    "preserving_perturbation",
    "psd_project",
    "random_member",
    "random_ucp_choi",
    "realize_member",
    "sample_compressions",
    "search_witness",
    "simplex_norm_bound",
    "simplex_preservation_check",
    "spectral_norm",
    "support_margin",
    "vertex_pencil_norm",
]
