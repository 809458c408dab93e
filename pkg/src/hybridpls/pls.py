"""Partial least squares on the hybrid space.

Each component solves

    maximize  (y' rho)^2 / n^2   over directions xi
    subject to  sum_j g_j' (B + lambda_j B2) g_j + u'u = 1,

where rho_i = <W_i, xi> are the sample scores. The maximizer has a closed
form: with u_j = B Theta_j' y, v = Z' y and C_j = B + lambda_j B2,

    q      = sum_j u_j' C_j^{-1} u_j + v'v,
    g_j    = C_j^{-1} u_j / sqrt(q),      u = v / sqrt(q),

so no eigensolver and no n x n or KM x KM matrix is ever formed. The scaling
by sqrt(q) makes the constraint exact and gives y' rho = sqrt(q) > 0, which
fixes the sign for free.

After each extraction the dataset is residualized on the score vector
(ordinary least squares, column by column), and the next component is drawn
from the residuals. Directions live in residual coordinates; `recover_iotas`
converts them to equivalent directions against the original data so that
scores for unseen samples are plain inner products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from sklearn.base import BaseEstimator, RegressorMixin

from .basis import gram as basis_gram
from .errors import (
    ConfigError,
    DegenerateResponse,
    EmptyInput,
    ShapeMismatch,
    ZeroScoreVector,
)
from .hybrid import (
    HybridDataset,
    HybridElement,
    PenaltyConfig,
    _functional_energy,
    apply_standardization,
    as_dataset,
    destandardize_coefficient,
    inner_product,
    inner_product_rough,
    standardize,
)

__all__ = [
    "PlsComponent",
    "GeometryReport",
    "HybridPLS",
    "fit_direction",
    "compute_scores",
    "residualize",
    "extract_components",
    "recover_iotas",
    "diagnostics",
]

# Relative floor below which a quantity is treated as exactly zero. Both
# degeneracy checks scale it by the natural magnitude of the quantity they
# guard, so they are invariant under rescaling the data.
_DEGENERACY_RTOL = 1e-14


def _mean_energy(dataset, gram):
    """(1/n) sum_i ||W_i||_H^2 with omega = 1 (data is assumed pre-scaled)."""
    total = sum(_functional_energy(t, gram.B) for t in dataset.theta)
    total += float(np.sum(dataset.scalars**2))
    return total / dataset.n


def _check_direction(dataset, direction, gram):
    if (
        direction.K != dataset.K
        or direction.M != dataset.M
        or direction.p != dataset.p
    ):
        raise ShapeMismatch(
            f"direction has (K,M,p)=({direction.K},{direction.M},{direction.p}), "
            f"dataset has ({dataset.K},{dataset.M},{dataset.p})"
        )
    if gram.B.shape[0] != dataset.M:
        raise ShapeMismatch(
            f"Gram matrix is {gram.B.shape}, coefficient blocks have {dataset.M} columns"
        )


@dataclass(frozen=True, eq=False)
class PlsComponent:
    """One extracted component, in residual coordinates.

    direction   the unit-constraint direction xi
    loading     the regression of the predictors on the score vector
    slope       the regression of the response on the score vector
    scores      the training score vector rho at extraction time
    normalizer  the scale factor q of the closed form
    """

    direction: HybridElement
    loading: HybridElement
    slope: float
    scores: np.ndarray
    normalizer: float


def fit_direction(dataset, gram, penalty, solvers=None, q_floor=None):
    """Closed-form dominant direction; returns (direction, q).

    `solvers` may carry one Cholesky factorization of B + lambda_j B2 per
    functional predictor (as returned by scipy.linalg.cho_factor) to amortize
    the factorizations across iterations. `q_floor` is the degeneracy
    threshold for q; the extraction loop pins it to the scale of the data it
    started from, a standalone call derives it from the dataset at hand.

    Raises DegenerateResponse when q falls at or below the floor, i.e. the
    response carries no signal the predictors can pick up.

    The normalizer is the computed quadratic form sum_j w_j'(B + lambda_j B2)
    w_j + v'v rather than sum_j u_j'w_j + v'v: the two agree up to the
    conditioning of the solve, but dividing by the former makes the unit
    constraint hold to machine precision no matter how ill-conditioned
    B + lambda_j B2 is. The form itself is accumulated in extended precision:
    B2 entries reach 1e4 for fine bases, and plain double rounding of the
    form is what bounds how exactly the returned direction satisfies the
    constraint. Where the platform has no wider type this degrades to plain
    double.
    """
    if dataset.y is None:
        raise EmptyInput("direction extraction needs a response")
    if len(penalty.lambdas) != dataset.K:
        raise ShapeMismatch(
            f"penalty has {len(penalty.lambdas)} lambdas for {dataset.K} functional blocks"
        )
    if gram.B.shape[0] != dataset.M:
        raise ShapeMismatch(
            f"Gram matrix is {gram.B.shape}, coefficient blocks have {dataset.M} columns"
        )
    if solvers is None:
        solvers = [
            scipy.linalg.cho_factor(gram.B + lam * gram.B2)
            for lam in penalty.lambdas
        ]
    y = dataset.y
    n = dataset.n

    solved_blocks = []
    q_acc = np.longdouble(0.0)
    for theta, solver, lam in zip(dataset.theta, solvers, penalty.lambdas):
        u = gram.B @ (theta.T @ y)
        w = scipy.linalg.cho_solve(solver, u)
        solved_blocks.append(w)
        w_wide = w.astype(np.longdouble)
        q_acc += w_wide @ (gram.B.astype(np.longdouble) @ w_wide)
        q_acc += lam * (w_wide @ (gram.B2.astype(np.longdouble) @ w_wide))
    v = dataset.scalars.T @ y
    v_wide = v.astype(np.longdouble)
    q_acc += v_wide @ v_wide
    q = float(q_acc)

    if q_floor is None:
        # q is bounded by (total energy) * (total squared response)
        q_floor = (
            _DEGENERACY_RTOL
            * n
            * _mean_energy(dataset, gram)
            * float(y @ y)
        )
    if q <= q_floor:
        raise DegenerateResponse(
            f"no extractable signal: q = {q:.3e} <= tolerance {q_floor:.3e}"
        )
    root = np.sqrt(q)
    return (
        HybridElement(
            coefs=tuple(w / root for w in solved_blocks), scalars=v / root
        ),
        q,
    )


def compute_scores(dataset, direction, gram):
    """Score vector rho, rho_i = <W_i, direction> with omega = 1."""
    _check_direction(dataset, direction, gram)
    rho = dataset.scalars @ direction.scalars
    for theta, g in zip(dataset.theta, direction.coefs):
        rho = rho + theta @ (gram.B @ g)
    return rho


def residualize(dataset, scores, score_floor=None):
    """Regress every predictor column and the response out on the scores.

    Returns (residual dataset, loading element, response slope). Raises
    ZeroScoreVector when ||scores||^2 falls at or below `score_floor`, which
    signals that the extractable rank is exhausted. The extraction loop pins
    the floor to the scale of the data it started from; a standalone call
    falls back to the raw coefficient energy of the dataset at hand.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.shape != (dataset.n,):
        raise ShapeMismatch(
            f"scores must have shape ({dataset.n},), got {scores.shape}"
        )
    rho2 = float(scores @ scores)
    if score_floor is None:
        score_floor = _DEGENERACY_RTOL * (
            sum(float(np.sum(t**2)) for t in dataset.theta)
            + float(np.sum(dataset.scalars**2))
        )
    if rho2 <= score_floor:
        raise ZeroScoreVector(
            f"score vector is numerically zero: ||rho||^2 = {rho2:.3e} <= {score_floor:.3e}"
        )

    pis = tuple(t.T @ scores / rho2 for t in dataset.theta)
    chi = dataset.scalars.T @ scores / rho2
    theta_next = tuple(
        t - np.outer(scores, pi) for t, pi in zip(dataset.theta, pis)
    )
    scalars_next = dataset.scalars - np.outer(scores, chi)

    slope = 0.0
    y_next = None
    if dataset.y is not None:
        slope = float(dataset.y @ scores) / rho2
        y_next = dataset.y - slope * scores

    out = HybridDataset(theta=theta_next, scalars=scalars_next, y=y_next)
    loading = HybridElement(coefs=pis, scalars=chi)
    return out, loading, slope


def extract_components(dataset, gram, penalty, n_components, keep_history=False):
    """Run the extract/residualize loop for up to n_components rounds.

    Returns (components, history, truncated). `history` is None unless
    keep_history is set, in which case history[l] is the dataset state the
    (l+1)-th component was extracted from, one entry per extracted component.
    Exhaustion before the requested count is not an error: the loop stops and
    reports truncated=True. A response with no signal at all (first round)
    does raise.
    """
    if n_components < 1:
        raise ConfigError(f"n_components must be >= 1, got {n_components}")
    solvers = [
        scipy.linalg.cho_factor(gram.B + lam * gram.B2) for lam in penalty.lambdas
    ]
    # degeneracy floors are pinned to the initial state of the fit: the
    # deflated residues a rank-exhausted dataset leaves behind would look
    # like valid signal at their own (vanishing) scale
    total_energy = dataset.n * _mean_energy(dataset, gram)
    y = dataset.y if dataset.y is not None else np.zeros(dataset.n)
    q_floor = _DEGENERACY_RTOL * total_energy * float(y @ y)
    score_floor = _DEGENERACY_RTOL * total_energy
    components = []
    history = [] if keep_history else None
    current = dataset
    truncated = False
    for round_ in range(n_components):
        try:
            direction, q = fit_direction(
                current, gram, penalty, solvers=solvers, q_floor=q_floor
            )
        except DegenerateResponse:
            if round_ == 0:
                raise
            truncated = True
            break
        scores = compute_scores(current, direction, gram)
        try:
            residual, loading, slope = residualize(
                current, scores, score_floor=score_floor
            )
        except ZeroScoreVector:
            if round_ == 0:
                raise
            truncated = True
            break
        if keep_history:
            history.append(current)
        components.append(
            PlsComponent(
                direction=direction,
                loading=loading,
                slope=slope,
                scores=scores,
                normalizer=q,
            )
        )
        current = residual
    return components, history, truncated


def recover_iotas(components, gram):
    """Re-express the directions against the original (un-deflated) data.

    iota_1 = xi_1 and iota_l = xi_l - sum_{u<l} <delta_u, xi_l> iota_u, where
    delta_u is the u-th loading. Scoring a new sample against iota_l under
    the plain inner product reproduces what the deflation pipeline would
    produce, so prediction never has to replay the residualization.
    """
    iotas = []
    for comp in components:
        iota = comp.direction
        for prev_comp, prev_iota in zip(components, iotas):
            c = inner_product(prev_comp.loading, comp.direction, gram, omega=1.0)
            iota = iota - c * prev_iota
        iotas.append(iota)
    return iotas


@dataclass(frozen=True, eq=False)
class GeometryReport:
    """Orthogonality diagnostics over all component pairs k < l (1-based keys).

    residual_scores[(k, l)]      l2 norm of the k-th direction's scores on the
                                 dataset state the l-th component saw
    direction_products[(k, l)]   |<xi_k, xi_l>| under the roughness product
    score_correlations[(k, l)]   |cor(rho_k, rho_l)|
    response_correlations[l-1]   |cor(y at fit start, rho_l)|
    """

    residual_scores: dict
    direction_products: dict
    score_correlations: dict
    response_correlations: np.ndarray
    max_residual_score: float
    max_direction_product: float
    max_score_correlation: float


def _abs_corr(a, b):
    a = a - a.mean()
    b = b - b.mean()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return abs(float(a @ b) / (na * nb))


def diagnostics(model, history=None):
    """Pairwise orthogonality report for a fitted model with >= 2 components.

    Needs the per-round dataset states; fit with keep_history=True or pass
    them explicitly.
    """
    components = model.components_
    if len(components) < 2:
        raise ConfigError(
            f"diagnostics need at least 2 components, model has {len(components)}"
        )
    if history is None:
        history = model.history_
    if history is None:
        raise ConfigError(
            "no dataset history available; refit with keep_history=True"
        )
    gram, penalty = model.gram_, model.penalty_
    residual_scores, direction_products, score_correlations = {}, {}, {}
    for l in range(1, len(components)):
        for k in range(l):
            key = (k + 1, l + 1)
            leftovers = compute_scores(
                history[l], components[k].direction, gram
            )
            residual_scores[key] = float(np.linalg.norm(leftovers))
            direction_products[key] = abs(
                inner_product_rough(
                    components[k].direction, components[l].direction, gram, penalty
                )
            )
            score_correlations[key] = _abs_corr(
                components[k].scores, components[l].scores
            )
    response_correlations = np.array(
        [_abs_corr(model.y0_, comp.scores) for comp in components]
    )
    return GeometryReport(
        residual_scores=residual_scores,
        direction_products=direction_products,
        score_correlations=score_correlations,
        response_correlations=response_correlations,
        max_residual_score=max(residual_scores.values()),
        max_direction_product=max(direction_products.values()),
        max_score_correlation=max(score_correlations.values()),
    )


class HybridPLS(BaseEstimator, RegressorMixin):
    """Partial least squares regression for mixed functional/scalar predictors.

    Parameters
    ----------
    n_components : requested number of components (the fit may truncate
        earlier if the data runs out of rank; see `truncated_`).
    lambdas : roughness penalty, a scalar applied to every functional
        predictor or one value per predictor.
    basis : BasisSpec the coefficient blocks are expressed in.
    keep_history : retain the per-round dataset states, enabling
        `diagnostics` at the cost of L copies of the data.

    Fitted attributes use the trailing-underscore convention: `components_`,
    `iotas_`, `beta_` (the regression element on standardized scale),
    `scores_` (n x L training scores), `transform_` (the standardization),
    `gram_`, `penalty_`, `y0_` (centered response at fit start), `y_rss_`
    (residual sum of squares after 0, 1, ..., L components), `truncated_`,
    `n_components_`, and `history_` (None unless keep_history).
    """

    def __init__(self, n_components=2, lambdas=0.0, basis=None, keep_history=False):
        self.n_components = n_components
        self.lambdas = lambdas
        self.basis = basis
        self.keep_history = keep_history

    def fit(self, X, y=None):
        if not isinstance(X, HybridDataset):
            raise ShapeMismatch("fit expects a HybridDataset")
        if y is not None:
            X = HybridDataset(theta=X.theta, scalars=X.scalars, y=y)
        if X.y is None:
            raise EmptyInput("fit needs a response: pass y or a dataset carrying one")
        if self.basis is None:
            raise ConfigError("HybridPLS requires a basis specification")
        n_components = self.n_components
        if not isinstance(n_components, (int, np.integer)) or n_components < 1:
            raise ConfigError(f"n_components must be a positive int, got {n_components!r}")

        gram = basis_gram(self.basis)
        if gram.B.shape[0] != X.M:
            raise ShapeMismatch(
                f"basis has {gram.B.shape[0]} functions, coefficient blocks have {X.M} columns"
            )
        penalty = PenaltyConfig.broadcast(self.lambdas, X.K)
        std, transform = standardize(X, gram)
        components, history, truncated = extract_components(
            std, gram, penalty, n_components, keep_history=self.keep_history
        )
        iotas = recover_iotas(components, gram)
        beta = HybridElement.zero(std.K, std.M, std.p)
        for comp, iota in zip(components, iotas):
            beta = beta + comp.slope * iota

        rss = [float(std.y @ std.y)]
        for comp in components:
            rss.append(rss[-1] - comp.slope**2 * float(comp.scores @ comp.scores))

        self.gram_ = gram
        self.penalty_ = penalty
        self.transform_ = transform
        self.components_ = components
        self.iotas_ = iotas
        self.beta_ = beta
        self.beta_raw_ = destandardize_coefficient(transform, beta)
        self.scores_ = np.column_stack([c.scores for c in components])
        self.y0_ = std.y
        self.y_rss_ = np.array(rss)
        self.truncated_ = truncated
        self.n_components_ = len(components)
        self.history_ = history
        return self

    def predict(self, X):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "beta_")
        std = apply_standardization(self.transform_, as_dataset(X))
        return (
            compute_scores(std, self.beta_, self.gram_) + self.transform_.y_center
        )

    def transform(self, X):
        """Component scores for new samples, one column per component."""
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "iotas_")
        std = apply_standardization(self.transform_, as_dataset(X))
        return np.column_stack(
            [compute_scores(std, iota, self.gram_) for iota in self.iotas_]
        )
