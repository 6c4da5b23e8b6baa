"""genokit: compressed-genotype statistical genetics toolkit.

Packed biallelic genotype storage with PLINK I/O and decompression-free
kernels, matrix-completion genotype imputation, iterative-hard-thresholding
sparse GWAS, pedigree and SNP-based kinship estimation, and variance
component models fitted by MM algorithms with score and likelihood ratio
tests.
"""

__version__ = "0.1.0"

from .empkin import compare_kinship, grm, grm_variance_approx, ld_matrix, mom_kinship, robust_grm
from .mcimpute import (
    CompletionFactors,
    ObservationMask,
    WindowPlan,
    als_complete,
    completion_loss,
    impute_pipeline,
    randomized_svd,
    select_rank,
    svd_impute,
)
from .pedkin import (
    IdentityCoefficients,
    KinshipMatrix,
    PedMember,
    Pedigree,
    gene_drop,
    theoretical_kinship,
)
from .snpcore import (
    PackedGenotypeMatrix,
    SnpInfo,
    SnpSummaries,
    SubjectInfo,
    decompress,
    filter_matrix,
    packed_gemv,
    principal_components,
    read_plink,
    summarize,
    write_plink,
)
from .sparsegwas import IhtConfig, SparseFit, cross_validate_k, iht_fit, project_sparse
from .vcmodel import (
    VcEstimate,
    VcModel,
    heritability,
    loglik,
    lrt,
    mm_fit,
    penalized_fit,
    score_test,
    spectral_fit,
)

__all__ = [
    "PackedGenotypeMatrix", "SnpInfo", "SubjectInfo", "SnpSummaries",
    "read_plink", "write_plink", "summarize", "filter_matrix", "decompress",
    "packed_gemv", "principal_components",
    "Pedigree", "PedMember", "KinshipMatrix", "IdentityCoefficients",
    "theoretical_kinship", "gene_drop",
    "grm", "robust_grm", "mom_kinship", "grm_variance_approx", "ld_matrix",
    "compare_kinship",
    "ObservationMask", "CompletionFactors", "WindowPlan", "completion_loss",
    "svd_impute", "als_complete", "randomized_svd", "select_rank", "impute_pipeline",
    "IhtConfig", "SparseFit", "project_sparse", "iht_fit", "cross_validate_k",
    "VcModel", "VcEstimate", "loglik", "mm_fit", "spectral_fit", "heritability",
    "score_test", "lrt", "penalized_fit",
]
