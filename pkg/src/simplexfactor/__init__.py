"""Factorization of compositional tables on the probability simplex.

Five interchangeable representations of the same low-rank structure: an
unconstrained nonnegative pair, a row-stochastic budget pair, and a
latent-class triple for the joint table, with exact conversions between
them, several estimators (EM, constrained least squares, volume-penalized
NMF, successive projection, simplex expansion, tempered EM), uniqueness
diagnostics, and ternary plotting.
"""

__version__ = "0.1.0"

from .datasets import Dataset, dataset_names, load_csv, load_dataset, time_budget_reference
from .ema import EmmaConfig, emma_fit, emma_stage1, expand_simplex_once
from .errors import (
    DegenerateBasisError,
    DegenerateFitError,
    InfeasibleTransformError,
    NegativeEntryError,
    ParseError,
    RaggedRowError,
    RankDeficientSelectionError,
    RankOutOfRangeError,
    SimplexFactorError,
    UnsupportedKError,
    ZeroClassMassError,
    ZeroColumnError,
    ZeroMatrixError,
    ZeroRowError,
)
from .fileformat import LoadedFactorization, read_factorization, write_factorization
from .geometry import (
    TernaryPoint,
    average_contribution,
    cone_membership,
    hull_membership,
    rescaled_basis,
    rescaled_basis_matrix,
    rows_as_ternary,
    simplex_volume_sq,
)
from .identifiability import (
    IdentReport,
    SscVerdict,
    TransferReport,
    check_separability,
    check_ssc,
    demonstrate_uniqueness_transfer,
    identifiability_report,
    k2_corner_parameters,
    k2_extremes,
)
from .lba import (
    ExtremeSearchConfig,
    LbaConfig,
    chi_square_spread,
    extreme_solution,
    fit_lba_cwls,
    fit_lba_em,
)
from .linalg import (
    fuzzy_cmeans,
    nonneg_ls,
    project_to_simplex,
    row_normalize,
    simplex_ls,
    svd_truncate,
    total_normalize,
    weighted_simplex_projection,
)
from .matrices import CompositionMatrix, JointProbMatrix, Matrix, RowMassVector
from .models import (
    BudgetFactorization,
    EquivalenceWitness,
    LcaFactorization,
    NmfFactorization,
    TransformMatrix,
    apply_transform,
    budget_as_nmf,
    equivalent,
    lba_to_lca,
    lba_to_nmf,
    lca_to_lba,
    nmf_to_lba,
)
from .nmf import NmfConfig, fit_frobenius, fit_minvol, fit_separable
from .plsa import PlsaConfig, fit_plsa, tempered_estep
from .results import FitResult, per_column_r2
from .ternary_svg import emit_ternary_svg, ternary_svg_string

__all__ = [
    "__version__",
    "Dataset", "dataset_names", "load_csv", "load_dataset", "time_budget_reference",
    "EmmaConfig", "emma_fit", "emma_stage1", "expand_simplex_once",
    "SimplexFactorError", "ZeroRowError", "ZeroColumnError", "ZeroMatrixError",
    "NegativeEntryError", "RankOutOfRangeError", "DegenerateBasisError",
    "ZeroClassMassError", "InfeasibleTransformError", "RankDeficientSelectionError",
    "DegenerateFitError", "UnsupportedKError", "ParseError", "RaggedRowError",
    "LoadedFactorization", "read_factorization", "write_factorization",
    "TernaryPoint", "average_contribution", "cone_membership", "hull_membership",
    "rescaled_basis", "rescaled_basis_matrix", "rows_as_ternary", "simplex_volume_sq",
    "IdentReport", "SscVerdict", "TransferReport", "check_separability", "check_ssc",
    "demonstrate_uniqueness_transfer", "identifiability_report",
    "k2_corner_parameters", "k2_extremes",
    "ExtremeSearchConfig", "LbaConfig", "chi_square_spread", "extreme_solution",
    "fit_lba_cwls", "fit_lba_em",
    "fuzzy_cmeans", "nonneg_ls", "project_to_simplex", "row_normalize",
    "simplex_ls", "svd_truncate", "total_normalize", "weighted_simplex_projection",
    "CompositionMatrix", "JointProbMatrix", "Matrix", "RowMassVector",
    "BudgetFactorization", "EquivalenceWitness", "LcaFactorization",
    "NmfFactorization", "TransformMatrix", "apply_transform", "budget_as_nmf",
    "equivalent", "lba_to_lca", "lba_to_nmf", "lca_to_lba", "nmf_to_lba",
    "NmfConfig", "fit_frobenius", "fit_minvol", "fit_separable",
    "PlsaConfig", "fit_plsa", "tempered_estep",
    "FitResult", "per_column_r2",
    "emit_ternary_svg", "ternary_svg_string",
]
