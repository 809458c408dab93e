"""Synthetic scenario generators with known ground truth.

Four named scenarios exercise distinct failure modes of mixed
functional-plus-scalar regression:

``geometry``
    Two latent factors with a 100:1 scale gap drive two functional
    predictors (pure sine waves) and a 50-column scalar block; the response
    loads heavily on the small factor. Useful for checking that extracted
    directions stay orthogonal when regularization is varied.
``beta_estimation``
    A linear model whose true coefficient functions (a modulated wave and a
    Gaussian bump) are known exactly, for measuring estimation error.
``nuisance``
    A dominant variance component constructed to be exactly uncorrelated
    with the response, plus a small predictive factor.
``cross_modal``
    Scalar predictors that copy the leading basis coefficients of the first
    functional predictor, inducing strong between-source correlation.

Every generator is a pure function of ``(spec, seed)``; replications run in
parallel with per-replication seeds from :func:`replication_seeds`.
"""

from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSpec, gram, make_basis, project_curve, project_curves
from .errors import ConfigError, ShapeMismatch, UnknownScenario, ZeroTruthNorm
from .hybrid import HybridDataset, HybridElement

__all__ = [
    "SCENARIOS",
    "ScenarioSpec",
    "GroundTruth",
    "default_basis",
    "generate",
    "beta_error",
    "replication_seeds",
]

SCENARIOS = ("geometry", "beta_estimation", "nuisance", "cross_modal")

# observation grid for scenarios that sample curves before projecting
_GRID = np.linspace(0.0, 1.0, 101)
# finer grid used to express analytic coefficient functions in the basis
_SHAPE_GRID = np.linspace(0.0, 1.0, 1001)


def default_basis(scenario):
    """The cubic B-spline basis each scenario was designed around."""
    if scenario not in SCENARIOS:
        raise UnknownScenario(
            f"unknown scenario {scenario!r}; choose one of {', '.join(SCENARIOS)}"
        )
    return make_basis("bspline", 3, 15 if scenario == "geometry" else 20)


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything needed to reproduce one synthetic dataset."""

    scenario: str
    n: int
    seed: int = 0
    basis: BasisSpec | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise UnknownScenario(
                f"unknown scenario {self.scenario!r}; "
                f"choose one of {', '.join(SCENARIOS)}"
            )
        if self.n < 4:
            raise ConfigError(f"need n >= 4 samples, got n = {self.n}")

    def resolved_basis(self):
        return self.basis if self.basis is not None else default_basis(self.scenario)


@dataclass(frozen=True)
class GroundTruth:
    """What the generator knows that an estimator must recover.

    ``beta`` holds the true coefficient element (raw scale) for scenarios
    whose response is a linear model of the predictors, and is None for the
    latent-factor scenarios. ``latents`` maps factor names to their
    per-sample draws. ``noise_sd`` is the response noise scale actually used.
    """

    beta: HybridElement | None
    latents: dict = field(default_factory=dict)
    noise_sd: float = 0.0


def _project_shape(basis, values):
    return project_curve(basis, np.column_stack([_SHAPE_GRID, values]))


def _require_width(basis, needed, scenario):
    if basis.num_basis < needed:
        raise ConfigError(
            f"scenario {scenario!r} reads the first {needed} basis coefficients; "
            f"basis has only {basis.num_basis}"
        )


def _mixture_coefficients(rng, n, M):
    # second block = 0.6 * fresh noise + 0.4 * first block, columnwise
    theta1 = rng.standard_normal((n, M))
    theta2 = 0.6 * rng.standard_normal((n, M)) + 0.4 * theta1
    return theta1, theta2


def _linear_response(rng, theta_blocks, scalars, B, beta):
    signal = scalars @ beta.scalars
    for theta, coef in zip(theta_blocks, beta.coefs):
        signal = signal + theta @ (B @ coef)
    noise_sd = 0.05 * float(np.std(signal))
    y = signal + noise_sd * rng.standard_normal(signal.size)
    return y, noise_sd


def _generate_geometry(spec, rng):
    basis = spec.resolved_basis()
    n = spec.n
    U = rng.normal(0.0, 10.0, n)
    V = rng.normal(0.0, 0.1, n)
    X1 = np.outer(U, np.sin(2.0 * np.pi * _GRID))
    X2 = np.outer(V, np.sin(10.0 * np.pi * _GRID))
    X2 = X2 + rng.normal(0.0, 0.01, (n, _GRID.size))
    theta1 = project_curves(basis, _GRID, X1)
    theta2 = project_curves(basis, _GRID, X2)
    A = rng.uniform(-1.0, 1.0, (50, 2))
    Z = np.column_stack([U, V]) @ A.T + rng.standard_normal((n, 50))
    y = 0.5 * U + 10.0 * V + rng.standard_normal(n)
    dataset = HybridDataset(theta=(theta1, theta2), scalars=Z, y=y)
    return dataset, GroundTruth(beta=None, latents={"U": U, "V": V}, noise_sd=1.0)


def _generate_beta_estimation(spec, rng):
    basis = spec.resolved_basis()
    _require_width(basis, 2, spec.scenario)
    n, M = spec.n, basis.num_basis
    theta1, theta2 = _mixture_coefficients(rng, n, M)
    Z = theta1[:, :2] + 0.5 * rng.standard_normal((n, 2))
    beta = HybridElement(
        coefs=(
            _project_shape(basis, 2.0 * _SHAPE_GRID * np.sin(3.0 * np.pi * _SHAPE_GRID)),
            _project_shape(basis, 2.0 * np.exp(-10.0 * (_SHAPE_GRID - 0.5) ** 2)),
        ),
        scalars=np.array([1.5, -1.0]),
    )
    y, noise_sd = _linear_response(rng, (theta1, theta2), Z, gram(basis).B, beta)
    dataset = HybridDataset(theta=(theta1, theta2), scalars=Z, y=y)
    return dataset, GroundTruth(beta=beta, latents={}, noise_sd=noise_sd)


def _generate_nuisance(spec, rng):
    basis = spec.resolved_basis()
    n = spec.n
    U = rng.standard_normal(n)
    noise_sd = 0.05 * float(np.std(2.0 * U))
    y = 2.0 * U + noise_sd * rng.standard_normal(n)
    # the dominant factor is an exact in-sample OLS residual against y,
    # scaled up so it carries most of the predictor variance yet none of
    # the predictive information
    draw = rng.standard_normal(n)
    design = np.column_stack([np.ones(n), y])
    coef, *_ = np.linalg.lstsq(design, draw, rcond=None)
    V = 5.0 * (draw - design @ coef)
    X1 = np.outer(V, np.sin(4.0 * np.pi * _GRID)) + np.outer(
        U, np.sin(2.0 * np.pi * _GRID)
    )
    X1 = X1 + rng.normal(0.0, 0.1, (n, _GRID.size))
    X2 = np.outer(V, np.cos(4.0 * np.pi * _GRID)) + np.outer(
        U, np.cos(2.0 * np.pi * _GRID)
    )
    X2 = X2 + rng.normal(0.0, 0.1, (n, _GRID.size))
    theta1 = project_curves(basis, _GRID, X1)
    theta2 = project_curves(basis, _GRID, X2)
    Z = np.column_stack([V, V, V, V, U]) + rng.normal(0.0, 0.1, (n, 5))
    dataset = HybridDataset(theta=(theta1, theta2), scalars=Z, y=y)
    return dataset, GroundTruth(
        beta=None, latents={"U": U, "V": V}, noise_sd=noise_sd
    )


def _generate_cross_modal(spec, rng):
    basis = spec.resolved_basis()
    _require_width(basis, 6, spec.scenario)
    n, M = spec.n, basis.num_basis
    theta1, theta2 = _mixture_coefficients(rng, n, M)
    Z = theta1[:, :6] + 0.5 * rng.standard_normal((n, 6))
    beta = HybridElement(
        coefs=(
            _project_shape(basis, 2.0 * _SHAPE_GRID * np.sin(3.0 * np.pi * _SHAPE_GRID)),
            _project_shape(basis, 2.0 * np.exp(-10.0 * (_SHAPE_GRID - 0.5) ** 2)),
        ),
        scalars=np.array([0.3, -0.2, 0.3, -0.2, 0.3, -0.2]),
    )
    y, noise_sd = _linear_response(rng, (theta1, theta2), Z, gram(basis).B, beta)
    dataset = HybridDataset(theta=(theta1, theta2), scalars=Z, y=y)
    return dataset, GroundTruth(beta=beta, latents={}, noise_sd=noise_sd)


_GENERATORS = {
    "geometry": _generate_geometry,
    "beta_estimation": _generate_beta_estimation,
    "nuisance": _generate_nuisance,
    "cross_modal": _generate_cross_modal,
}


def generate(spec):
    """Draw one dataset from the named scenario.

    Returns ``(dataset, truth)``; the same spec (including seed) always
    produces bit-identical output.
    """
    rng = np.random.default_rng(spec.seed)
    return _GENERATORS[spec.scenario](spec, rng)


def beta_error(estimated, truth, gram_pair):
    """Relative coefficient-recovery errors on the raw scale.

    Per functional block the error is a norm ratio under the basis Gram
    quadratic form, ``sqrt((g-h)' B (g-h) / h' B h)``; the scalar block uses
    the plain Euclidean ratio. Returns ``(array of K functional errors,
    scalar error)``.
    """
    if truth.beta is None:
        raise ConfigError("scenario carries no coefficient ground truth")
    ref = truth.beta
    if estimated.K != ref.K or estimated.M != ref.M or estimated.p != ref.p:
        raise ShapeMismatch(
            f"estimate has blocks {(estimated.K, estimated.M, estimated.p)}, "
            f"truth has {(ref.K, ref.M, ref.p)}"
        )
    func_errors = []
    for k, (g_hat, g) in enumerate(zip(estimated.coefs, ref.coefs)):
        denom = float(g @ (gram_pair.B @ g))
        if denom <= 0.0:
            raise ZeroTruthNorm(f"true coefficient function {k + 1} has zero norm")
        diff = g_hat - g
        func_errors.append(np.sqrt(float(diff @ (gram_pair.B @ diff)) / denom))
    scalar_error = 0.0
    if ref.p:
        denom = float(np.linalg.norm(ref.scalars))
        if denom <= 0.0:
            raise ZeroTruthNorm("true scalar coefficient vector has zero norm")
        scalar_error = float(np.linalg.norm(estimated.scalars - ref.scalars)) / denom
    return np.array(func_errors), scalar_error


def replication_seeds(seed, reps):
    """Independent per-replication seeds derived from one master seed."""
    if reps < 1:
        raise ConfigError(f"need at least one replication, got {reps}")
    return np.random.SeedSequence(int(seed)).generate_state(int(reps), dtype=np.uint64)
