"""Partial least squares regression for mixed functional and scalar predictors."""

from .basis import BasisSpec, GramPair, gram, make_basis, project_curve, project_curves
from .benchmarks import run_geometry_validation, run_method_benchmark
from .hybrid import (
    HybridDataset,
    HybridElement,
    PenaltyConfig,
    Standardization,
    apply_standardization,
    compute_omega,
    inner_product,
    inner_product_rough,
    standardize,
)
from .io import (
    project_bundle,
    read_dataset_bundle,
    read_ground_truth,
    read_model,
    write_dataset_bundle,
    write_ground_truth,
    write_model,
    write_score_table,
)
from .model_selection import CvPlan, cross_validate, fold_assignments, scaled_rmse
from .pcr import PcrModel, PooledPCR, cross_modality_correlations, fit_pcr, predict_pcr
from .pls import HybridPLS, diagnostics, extract_components, fit_direction
from .simulate import (
    SCENARIOS,
    GroundTruth,
    ScenarioSpec,
    beta_error,
    generate,
    replication_seeds,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSpec",
    "CvPlan",
    "GramPair",
    "GroundTruth",
    "HybridDataset",
    "HybridElement",
    "HybridPLS",
    "PcrModel",
    "PenaltyConfig",
    "PooledPCR",
    "SCENARIOS",
    "ScenarioSpec",
    "Standardization",
    "apply_standardization",
    "beta_error",
    "cross_modality_correlations",
    "cross_validate",
    "diagnostics",
    "extract_components",
    "fit_direction",
    "fit_pcr",
    "fold_assignments",
    "compute_omega",
    "generate",
    "gram",
    "inner_product",
    "inner_product_rough",
    "make_basis",
    "predict_pcr",
    "project_bundle",
    "project_curve",
    "project_curves",
    "read_dataset_bundle",
    "read_ground_truth",
    "read_model",
    "replication_seeds",
    "run_geometry_validation",
    "run_method_benchmark",
    "scaled_rmse",
    "standardize",
    "write_dataset_bundle",
    "write_ground_truth",
    "write_model",
    "write_score_table",
    "__version__",
]
