"""The finite hybrid space: elements, datasets, inner products, standardization.

An element pairs K coefficient vectors (curves expanded in a shared size-M
basis) with one length-p scalar vector. The plain inner product is

    <h1, h2> = sum_j g1_j' B g2_j + omega * u1' u2

and the roughness-sensitive variant adds per-block second-derivative penalties

    <h1, h2>_rough = sum_j g1_j' (B + lambda_j B2) g2_j + u1' u2.

The scalar block of the rough product carries no omega because standardization
already folds omega^(1/2) into the scalar columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DegenerateScalarBlock,
    EmptyInput,
    ShapeMismatch,
    ZeroVariancePredictor,
)

__all__ = [
    "HybridElement",
    "HybridDataset",
    "PenaltyConfig",
    "Standardization",
    "as_dataset",
    "destandardize_coefficient",
    "inner_product",
    "inner_product_rough",
    "compute_omega",
    "standardize",
    "apply_standardization",
]


@dataclass(frozen=True, eq=False)
class HybridElement:
    """One point of the hybrid space: K functional coefficient blocks + scalars."""

    coefs: tuple
    scalars: np.ndarray

    def __post_init__(self):
        coefs = tuple(np.asarray(c, dtype=float) for c in self.coefs)
        if not coefs:
            raise ShapeMismatch("need at least one functional block")
        M = coefs[0].shape
        if any(c.ndim != 1 for c in coefs) or any(c.shape != M for c in coefs):
            raise ShapeMismatch(
                f"functional blocks must be 1-d and share a length, got {[c.shape for c in coefs]}"
            )
        scalars = np.asarray(self.scalars, dtype=float)
        if scalars.ndim != 1:
            raise ShapeMismatch(f"scalar part must be 1-d, got shape {scalars.shape}")
        object.__setattr__(self, "coefs", coefs)
        object.__setattr__(self, "scalars", scalars)

    @property
    def K(self):
        return len(self.coefs)

    @property
    def M(self):
        return self.coefs[0].size

    @property
    def p(self):
        return self.scalars.size

    def __add__(self, other):
        _check_pair(self, other)
        return HybridElement(
            coefs=tuple(a + b for a, b in zip(self.coefs, other.coefs)),
            scalars=self.scalars + other.scalars,
        )

    def __sub__(self, other):
        _check_pair(self, other)
        return HybridElement(
            coefs=tuple(a - b for a, b in zip(self.coefs, other.coefs)),
            scalars=self.scalars - other.scalars,
        )

    def __mul__(self, alpha):
        alpha = float(alpha)
        return HybridElement(
            coefs=tuple(alpha * c for c in self.coefs), scalars=alpha * self.scalars
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    @staticmethod
    def zero(K, M, p):
        return HybridElement(
            coefs=tuple(np.zeros(M) for _ in range(K)), scalars=np.zeros(p)
        )


@dataclass(frozen=True)
class PenaltyConfig:
    """Per-functional-predictor roughness multipliers, all finite and >= 0."""

    lambdas: tuple

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lambdas)
        if not lam:
            raise ConfigError("penalty needs at least one lambda")
        if any(not np.isfinite(v) or v < 0 for v in lam):
            raise ConfigError(f"lambdas must be finite and >= 0, got {lam}")
        object.__setattr__(self, "lambdas", lam)

    @staticmethod
    def broadcast(value, K):
        """Turn a scalar or a length-K sequence into a PenaltyConfig."""
        if np.isscalar(value):
            return PenaltyConfig(lambdas=(float(value),) * K)
        lam = tuple(float(v) for v in value)
        if len(lam) != K:
            raise ConfigError(f"expected {K} lambdas, got {len(lam)}")
        return PenaltyConfig(lambdas=lam)


@dataclass(frozen=True, eq=False)
class HybridDataset:
    """n samples as K coefficient matrices (n x M), scalars (n x p), optional y."""

    theta: tuple
    scalars: np.ndarray
    y: object = None

    def __post_init__(self):
        theta = tuple(np.asarray(t, dtype=float) for t in self.theta)
        if not theta:
            raise ShapeMismatch("need at least one functional block")
        n = theta[0].shape[0]
        if any(t.ndim != 2 for t in theta) or any(t.shape[0] != n for t in theta):
            raise ShapeMismatch(
                f"coefficient blocks must be 2-d with equal row counts, got {[t.shape for t in theta]}"
            )
        M = theta[0].shape[1]
        if any(t.shape[1] != M for t in theta):
            raise ShapeMismatch(
                f"coefficient blocks must share the basis size, got {[t.shape for t in theta]}"
            )
        scalars = np.asarray(self.scalars, dtype=float)
        if scalars.ndim != 2 or scalars.shape[0] != n:
            raise ShapeMismatch(
                f"scalar block must be 2-d with {n} rows, got shape {scalars.shape}"
            )
        y = self.y
        if y is not None:
            y = np.asarray(y, dtype=float)
            if y.shape != (n,):
                raise ShapeMismatch(f"y must have shape ({n},), got {y.shape}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "scalars", scalars)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.theta[0].shape[0]

    @property
    def K(self):
        return len(self.theta)

    @property
    def M(self):
        return self.theta[0].shape[1]

    @property
    def p(self):
        return self.scalars.shape[1]

    def row(self, i):
        """The i-th sample as a HybridElement (response not included)."""
        return HybridElement(
            coefs=tuple(t[i] for t in self.theta), scalars=self.scalars[i]
        )

    def take(self, idx):
        """Row subset as a new dataset."""
        return HybridDataset(
            theta=tuple(t[idx] for t in self.theta),
            scalars=self.scalars[idx],
            y=None if self.y is None else self.y[idx],
        )


def destandardize_coefficient(transform, element):
    """Map a coefficient element fitted on standardized data to raw scale.

    Fitted predictions read y_center + sum_j <(theta_j - c_j)/s_j, g_j>_B
    + sum_j sqrt(omega) (z_j - m_j)/sigma_j * u_j, so the raw-scale
    coefficients are g_j / s_j and sqrt(omega) u_j / sigma_j.
    """
    if element.K != len(transform.func_centers) or element.p != transform.scalar_center.size:
        raise ShapeMismatch("element does not match the stored transform")
    coefs = tuple(g / s for g, s in zip(element.coefs, transform.func_scales))
    scalars = element.scalars
    if element.p:
        scalars = np.sqrt(transform.omega) * scalars / transform.scalar_scale
    return HybridElement(coefs=coefs, scalars=scalars)


def as_dataset(X):
    """Coerce a HybridDataset, a HybridElement, or a sequence of elements
    into a HybridDataset (responses, if any, are preserved only for the
    dataset case)."""
    if isinstance(X, HybridDataset):
        return X
    if isinstance(X, HybridElement):
        X = [X]
    elements = list(X)
    if not elements:
        raise EmptyInput("need at least one sample")
    if not all(isinstance(e, HybridElement) for e in elements):
        raise ShapeMismatch(
            "expected a HybridDataset, a HybridElement, or a sequence of elements"
        )
    K = elements[0].K
    return HybridDataset(
        theta=tuple(np.vstack([e.coefs[j] for e in elements]) for j in range(K)),
        scalars=np.vstack([e.scalars for e in elements]),
    )


def _check_pair(h1, h2):
    if h1.K != h2.K or h1.M != h2.M or h1.p != h2.p:
        raise ShapeMismatch(
            f"elements disagree: (K,M,p)=({h1.K},{h1.M},{h1.p}) vs ({h2.K},{h2.M},{h2.p})"
        )


def _check_gram(gram, M):
    if gram.B.shape != (M, M):
        raise ShapeMismatch(
            f"Gram matrix is {gram.B.shape}, element blocks have length {M}"
        )


def inner_product(h1, h2, gram, omega=1.0):
    """Hybrid inner product sum_j g1_j' B g2_j + omega * u1' u2."""
    _check_pair(h1, h2)
    _check_gram(gram, h1.M)
    total = sum(float(a @ gram.B @ b) for a, b in zip(h1.coefs, h2.coefs))
    return total + omega * float(h1.scalars @ h2.scalars)


def inner_product_rough(h1, h2, gram, penalty):
    """Roughness-sensitive product sum_j g1_j' (B + lambda_j B2) g2_j + u1' u2."""
    _check_pair(h1, h2)
    _check_gram(gram, h1.M)
    if len(penalty.lambdas) != h1.K:
        raise ShapeMismatch(
            f"penalty has {len(penalty.lambdas)} lambdas for {h1.K} functional blocks"
        )
    total = float(h1.scalars @ h2.scalars)
    for lam, a, b in zip(penalty.lambdas, h1.coefs, h2.coefs):
        total += float(a @ gram.B @ b) + lam * float(a @ gram.B2 @ b)
    return total


def _functional_energy(theta, B):
    """sum_i theta_i' B theta_i for one (n x M) block."""
    return float(np.einsum("im,mn,in->", theta, B, theta))


def compute_omega(dataset, gram, _tol=1e-20):
    """Modality-balancing weight: total functional energy / total scalar energy."""
    _check_gram(gram, dataset.M)
    func = sum(_functional_energy(t, gram.B) for t in dataset.theta)
    scal = float(np.sum(dataset.scalars**2))
    if scal <= _tol * max(func, 1.0):
        raise DegenerateScalarBlock(
            "scalar block has zero energy; omega is undefined"
        )
    return func / scal


@dataclass(frozen=True)
class Standardization:
    """Fitted centering/scaling, reapplied verbatim to new samples."""

    func_centers: tuple
    func_scales: np.ndarray
    scalar_center: np.ndarray
    scalar_scale: np.ndarray
    omega: float
    y_center: float


def standardize(raw, gram):
    """Center and scale a dataset; returns (standardized dataset, transform).

    Functional predictors get their coefficientwise mean removed and are scaled
    to unit mean integrated variance, (1/n) sum_i ||X_ik||^2 = 1. Scalar
    columns are centered and scaled to unit variance (divisor n), y is centered
    only; finally the scalar block is multiplied by omega^(1/2) so both
    modalities carry equal total energy.
    """
    n = raw.n
    if n < 2:
        raise EmptyInput(f"standardization needs n >= 2, got n = {n}")
    _check_gram(gram, raw.M)

    centers, scales, theta_std = [], [], []
    for k, theta in enumerate(raw.theta):
        center = theta.mean(axis=0)
        centered = theta - center
        var = _functional_energy(centered, gram.B) / n
        ref = _functional_energy(theta, gram.B) / n
        if var <= 1e-20 * max(ref, 1.0):
            raise ZeroVariancePredictor(
                f"functional predictor {k + 1} is constant across samples"
            )
        centers.append(center)
        scales.append(np.sqrt(var))
        theta_std.append(centered / scales[-1])

    z_center = raw.scalars.mean(axis=0) if raw.p else np.zeros(0)
    z_centered = raw.scalars - z_center
    z_var = (z_centered**2).mean(axis=0) if raw.p else np.zeros(0)
    z_ref = (raw.scalars**2).mean(axis=0) if raw.p else np.zeros(0)
    bad = np.nonzero(z_var <= 1e-20 * np.maximum(z_ref, 1.0))[0]
    if bad.size:
        raise ZeroVariancePredictor(f"scalar column {bad[0]} is constant across samples")
    z_scale = np.sqrt(z_var)
    z_std = z_centered / z_scale if raw.p else z_centered

    y = raw.y
    y_center = 0.0
    if y is not None:
        y_center = float(y.mean())
        y = y - y_center

    interim = HybridDataset(theta=tuple(theta_std), scalars=z_std, y=y)
    omega = compute_omega(interim, gram) if raw.p else 1.0
    out = HybridDataset(
        theta=interim.theta, scalars=np.sqrt(omega) * z_std, y=y
    )
    transform = Standardization(
        func_centers=tuple(centers),
        func_scales=np.array(scales),
        scalar_center=z_center,
        scalar_scale=z_scale,
        omega=omega,
        y_center=y_center,
    )
    return out, transform


def apply_standardization(transform, sample):
    """Apply a stored transform to a HybridElement or a HybridDataset.

    Predictor blocks get the training centers/scales and the omega^(1/2)
    scalar factor; a dataset's response, if any, is passed through untouched
    (predictions re-add the stored response center instead).
    """
    K = len(transform.func_centers)
    root_omega = np.sqrt(transform.omega)
    if isinstance(sample, HybridDataset):
        if sample.K != K or sample.M != transform.func_centers[0].size:
            raise ShapeMismatch("dataset does not match the stored transform")
        if sample.p != transform.scalar_center.size:
            raise ShapeMismatch(
                f"expected {transform.scalar_center.size} scalar columns, got {sample.p}"
            )
        theta = tuple(
            (t - c) / s
            for t, c, s in zip(sample.theta, transform.func_centers, transform.func_scales)
        )
        z = sample.scalars
        if sample.p:
            z = root_omega * (z - transform.scalar_center) / transform.scalar_scale
        return HybridDataset(theta=theta, scalars=z, y=sample.y)
    if sample.K != K or sample.M != transform.func_centers[0].size:
        raise ShapeMismatch("element does not match the stored transform")
    if sample.p != transform.scalar_center.size:
        raise ShapeMismatch(
            f"expected {transform.scalar_center.size} scalar entries, got {sample.p}"
        )
    coefs = tuple(
        (g - c) / s
        for g, c, s in zip(sample.coefs, transform.func_centers, transform.func_scales)
    )
    z = sample.scalars
    if sample.p:
        z = root_omega * (z - transform.scalar_center) / transform.scalar_scale
    return HybridElement(coefs=coefs, scalars=z)
