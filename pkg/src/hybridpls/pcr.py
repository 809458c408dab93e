"""Baseline: per-source principal components pooled into one OLS fit.

Each functional predictor gets its own functional PCA, computed in the
coefficient domain under the basis metric: the eigenvectors of
B^(1/2) S B^(1/2) (S the coefficient second moment) mapped back through
B^(-1/2), so that each component phi satisfies phi' B phi = 1 and the scores
Theta B phi equal the L2 scores of the reconstructed curves. The scalar block
gets ordinary PCA. The top L scores per source are pooled side by side and
regressed on the response by least squares with an intercept.

Unlike the PLS estimator, nothing here looks at the response when building
components; that is the point of the comparison.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from sklearn.base import BaseEstimator, RegressorMixin

from .basis import gram as basis_gram
from .errors import (
    ConfigError,
    EmptyInput,
    IndexOutOfRange,
    RankDeficientScores,
    ShapeMismatch,
)
from .hybrid import (
    HybridDataset,
    apply_standardization,
    as_dataset,
    standardize,
)

__all__ = [
    "PcrModel",
    "PooledPCR",
    "fit_pcr",
    "predict_pcr",
    "cross_modality_correlations",
]


def _abs_corr(a, b):
    a = a - a.mean()
    b = b - b.mean()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return abs(float(a @ b) / (na * nb))


def _fix_signs(vectors):
    """Make each column's largest-magnitude entry positive, for stable output."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


@dataclass(eq=False)
class PcrModel:
    """Fitted pooled-PCA regression.

    eigenvectors     one (M, L) array per functional predictor, columns
                     B-orthonormal, eigenvalues descending
    scalar_rotation  (p, L) orthonormal columns (absent sources are empty)
    coefficients     OLS weights over the pooled score columns
    intercept        OLS intercept (0 for a centered design)
    transform        standardization to apply to raw inputs, or None when the
                     model was fit directly in standardized coordinates
    """

    eigenvectors: tuple
    eigenvalues: tuple
    scalar_rotation: np.ndarray
    scalar_eigenvalues: np.ndarray
    coefficients: np.ndarray
    intercept: float
    n_components: int
    gram: object
    transform: object = field(default=None)

    @property
    def n_sources(self):
        return len(self.eigenvectors) + (1 if self.scalar_rotation.size else 0)

    def source_scores(self, dataset):
        """Per-source (n, L) score blocks for a standardized dataset."""
        if dataset.K != len(self.eigenvectors):
            raise ShapeMismatch(
                f"model holds {len(self.eigenvectors)} functional sources, "
                f"dataset has {dataset.K}"
            )
        blocks = [
            theta @ (self.gram.B @ phi)
            for theta, phi in zip(dataset.theta, self.eigenvectors)
        ]
        if self.scalar_rotation.size:
            if dataset.p != self.scalar_rotation.shape[0]:
                raise ShapeMismatch(
                    f"model expects {self.scalar_rotation.shape[0]} scalar "
                    f"columns, dataset has {dataset.p}"
                )
            blocks.append(dataset.scalars @ self.scalar_rotation)
        return blocks

    def pooled_scores(self, dataset):
        """All source blocks side by side, (n, n_sources * L)."""
        return np.hstack(self.source_scores(dataset))


def fit_pcr(dataset, gram, n_components, transform=None, check_rank=True):
    """Fit the pooled-PCA regression on a standardized dataset.

    n_components is the per-source count L; it is capped by the basis size,
    the scalar dimension (when scalars are present), and n - 1. Raises
    RankDeficientScores when the pooled design is singular, unless
    check_rank=False (useful when only the scores are of interest).
    """
    if dataset.y is None:
        raise EmptyInput("fitting needs a response")
    L = n_components
    if not isinstance(L, (int, np.integer)) or L < 1:
        raise ConfigError(f"n_components must be a positive int, got {L!r}")
    cap = min(dataset.M, dataset.n - 1)
    if dataset.p:
        cap = min(cap, dataset.p)
    if L > cap:
        raise ConfigError(
            f"n_components = {L} exceeds min(M, p, n-1) = {cap} for this dataset"
        )

    vals_B, Q = np.linalg.eigh(gram.B)
    root = Q @ np.diag(np.sqrt(vals_B)) @ Q.T
    root_inv = Q @ np.diag(1.0 / np.sqrt(vals_B)) @ Q.T

    eigenvectors, eigenvalues = [], []
    for theta in dataset.theta:
        S = theta.T @ theta / dataset.n
        C = root @ S @ root
        vals, vecs = np.linalg.eigh((C + C.T) / 2.0)
        top = vecs[:, : -L - 1 : -1]
        eigenvectors.append(_fix_signs(root_inv @ top))
        eigenvalues.append(vals[: -L - 1 : -1])

    if dataset.p:
        Sz = dataset.scalars.T @ dataset.scalars / dataset.n
        vals_z, vecs_z = np.linalg.eigh((Sz + Sz.T) / 2.0)
        scalar_rotation = _fix_signs(vecs_z[:, : -L - 1 : -1])
        scalar_eigenvalues = vals_z[: -L - 1 : -1]
    else:
        scalar_rotation = np.zeros((0, L))
        scalar_eigenvalues = np.zeros(0)

    model = PcrModel(
        eigenvectors=tuple(eigenvectors),
        eigenvalues=tuple(eigenvalues),
        scalar_rotation=scalar_rotation,
        scalar_eigenvalues=scalar_eigenvalues,
        coefficients=np.zeros(0),
        intercept=0.0,
        n_components=L,
        gram=gram,
        transform=transform,
    )
    design = model.pooled_scores(dataset)
    X = np.column_stack([np.ones(dataset.n), design])
    coef, _, rank, _ = np.linalg.lstsq(X, dataset.y, rcond=None)
    if check_rank and rank < X.shape[1]:
        raise RankDeficientScores(
            f"pooled score design has rank {rank} < {X.shape[1]}; "
            "sources are collinear at this component count"
        )
    model.intercept = float(coef[0])
    model.coefficients = coef[1:]
    return model


def predict_pcr(model, new_samples):
    """Predicted responses; applies the stored standardization if present."""
    ds = as_dataset(new_samples)
    base = 0.0
    if model.transform is not None:
        ds = apply_standardization(model.transform, ds)
        base = model.transform.y_center
    return base + model.intercept + model.pooled_scores(ds) @ model.coefficients


def cross_modality_correlations(model, dataset, component=None):
    """|cor| between score vectors of different sources, per component index.

    Returns an (L, n_pairs) array whose columns follow
    itertools.combinations over sources in pooled order (functional blocks
    first, scalars last). Pass `component` (1-based) for a single row;
    an index past the fitted count raises IndexOutOfRange.
    """
    blocks = model.source_scores(dataset)
    L = model.n_components
    pairs = list(itertools.combinations(range(len(blocks)), 2))
    out = np.zeros((L, len(pairs)))
    for l in range(L):
        for col, (a, b) in enumerate(pairs):
            out[l, col] = _abs_corr(blocks[a][:, l], blocks[b][:, l])
    if component is None:
        return out
    if not 1 <= component <= L:
        raise IndexOutOfRange(
            f"component {component} out of range 1..{L}"
        )
    return out[component - 1]


class PooledPCR(BaseEstimator, RegressorMixin):
    """Estimator wrapper: standardizes, fits, and predicts on raw data.

    Parameters: n_components (per-source count) and basis (BasisSpec).
    Fitted attributes: `model_` (the PcrModel, carrying the standardization)
    and `gram_`.
    """

    def __init__(self, n_components=2, basis=None):
        self.n_components = n_components
        self.basis = basis

    def fit(self, X, y=None):
        if not isinstance(X, HybridDataset):
            raise ShapeMismatch("fit expects a HybridDataset")
        if y is not None:
            X = HybridDataset(theta=X.theta, scalars=X.scalars, y=y)
        if X.y is None:
            raise EmptyInput("fit needs a response: pass y or a dataset carrying one")
        if self.basis is None:
            raise ConfigError("PooledPCR requires a basis specification")
        gram = basis_gram(self.basis)
        std, transform = standardize(X, gram)
        self.model_ = fit_pcr(
            std, gram, self.n_components, transform=transform
        )
        self.gram_ = gram
        return self

    def predict(self, X):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "model_")
        return predict_pcr(self.model_, X)
