"""K-fold cross-validation over the roughness-penalty grid and component count.

The search space is the Cartesian product of the candidate penalty values per
functional predictor times the component counts 1..max_components. Each fold
standardizes on its own training split (no statistic of a held-out row ever
enters a fit), fits once at the maximum component count, and prices every
smaller count from the same fit via the nested structure of the coefficient:
beta after L components is the L-term prefix of the slope/direction expansion.

Exact ties happen (penalties that do not bite, truncated fits) and are broken
deterministically: larger penalty vector by lexicographic comparison first,
then fewer components.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DegenerateScale,
    EmptyInput,
    FoldTooSmall,
    ShapeMismatch,
)
from .hybrid import PenaltyConfig, apply_standardization, standardize
from .pls import compute_scores, extract_components, recover_iotas

__all__ = [
    "CvPlan",
    "CvRecord",
    "MeanScore",
    "cross_validate",
    "fold_assignments",
    "mean_scores",
    "rmse",
    "scaled_rmse",
    "range_scaled_rmse",
]


def _as_vectors(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.ndim != 1 or y_true.shape != y_pred.shape:
        raise ShapeMismatch(
            f"need equal-length vectors, got {y_true.shape} and {y_pred.shape}"
        )
    if y_true.size == 0:
        raise EmptyInput("scoring needs at least one observation")
    return y_true, y_pred


def rmse(y_true, y_pred):
    """Root mean squared prediction error."""
    y_true, y_pred = _as_vectors(y_true, y_pred)
    return float(np.sqrt(np.mean((y_true - y_pred) ** 2)))


def scaled_rmse(y_true, y_pred):
    """RMSE divided by the sample standard deviation (ddof=1) of y_true."""
    y_true, y_pred = _as_vectors(y_true, y_pred)
    if y_true.size < 2:
        raise DegenerateScale("scaled RMSE needs at least two observations")
    sd = float(np.std(y_true, ddof=1))
    if sd == 0.0:
        raise DegenerateScale("y_true has zero standard deviation")
    return rmse(y_true, y_pred) / sd


def range_scaled_rmse(y_true, y_pred):
    """RMSE divided by the range of y_true."""
    y_true, y_pred = _as_vectors(y_true, y_pred)
    span = float(y_true.max() - y_true.min())
    if span == 0.0:
        raise DegenerateScale("y_true has zero range")
    return rmse(y_true, y_pred) / span


def fold_assignments(n, folds, seed):
    """Deterministic fold id per row: a seeded permutation cut into
    contiguous chunks whose sizes differ by at most one."""
    if folds < 1:
        raise ConfigError(f"folds must be >= 1, got {folds}")
    if folds > n:
        raise FoldTooSmall(f"cannot cut {n} rows into {folds} folds")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    assign = np.empty(n, dtype=int)
    for f, chunk in enumerate(np.array_split(perm, folds)):
        assign[chunk] = f
    return assign


@dataclass(frozen=True)
class CvPlan:
    """folds >= 2, a nonempty per-predictor candidate grid, max_components
    >= 1, and the seed that fixes the fold assignment."""

    folds: int
    lambda_grid: tuple
    max_components: int
    seed: int

    def __post_init__(self):
        if not isinstance(self.folds, (int, np.integer)) or self.folds < 2:
            raise ConfigError(f"folds must be an int >= 2, got {self.folds!r}")
        grid = tuple(float(v) for v in self.lambda_grid)
        if not grid:
            raise ConfigError("lambda_grid must be nonempty")
        if any(not np.isfinite(v) or v < 0 for v in grid):
            raise ConfigError(f"lambda_grid values must be finite and >= 0, got {grid}")
        if (
            not isinstance(self.max_components, (int, np.integer))
            or self.max_components < 1
        ):
            raise ConfigError(
                f"max_components must be an int >= 1, got {self.max_components!r}"
            )
        object.__setattr__(self, "lambda_grid", grid)
        object.__setattr__(self, "folds", int(self.folds))
        object.__setattr__(self, "max_components", int(self.max_components))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class CvRecord:
    """One held-out evaluation: fold x penalty cell x component count.

    `truncated` marks counts past what the training fit could extract; the
    score then repeats the deepest available fit rather than going missing.
    """

    fold: int
    lambdas: tuple
    n_components: int
    rmse: float
    truncated: bool


@dataclass(frozen=True)
class MeanScore:
    """Across-fold mean for one (penalty cell, component count)."""

    lambdas: tuple
    n_components: int
    rmse: float
    truncated: bool


def mean_scores(table):
    """Collapse a score table over folds, in (lambdas, L) order."""
    groups = {}
    for rec in table:
        groups.setdefault((rec.lambdas, rec.n_components), []).append(rec)
    out = []
    for (lambdas, L) in sorted(groups):
        recs = groups[(lambdas, L)]
        out.append(
            MeanScore(
                lambdas=lambdas,
                n_components=L,
                rmse=float(np.mean([r.rmse for r in recs])),
                truncated=any(r.truncated for r in recs),
            )
        )
    return out


def cross_validate(dataset, gram, plan, hook=None):
    """Grid search by K-fold CV; returns (best penalty, best L, score table).

    The dataset must be raw (unstandardized): each fold standardizes on its
    training split alone. `hook(fold, lambdas, n_components, predictions,
    y_test)` is called once per table record, for instrumentation.

    Selection minimizes the across-fold mean RMSE; exact ties go to the
    lexicographically larger penalty vector, then to fewer components.
    """
    if dataset.y is None:
        raise EmptyInput("cross-validation needs a response")
    assign = fold_assignments(dataset.n, plan.folds, plan.seed)
    for f in range(plan.folds):
        train_size = int(np.sum(assign != f))
        if train_size < 2:
            raise FoldTooSmall(
                f"fold {f} leaves a training split of {train_size} rows, need >= 2"
            )

    # per-fold state is penalty-independent, so compute it once
    splits = []
    for f in range(plan.folds):
        train = dataset.take(assign != f)
        test = dataset.take(assign == f)
        std, transform = standardize(train, gram)
        std_test = apply_standardization(transform, test)
        splits.append((std, std_test, transform, test.y))

    records = []
    sums = {}
    for f, (std, std_test, transform, y_test) in enumerate(splits):
        for cell in itertools.product(plan.lambda_grid, repeat=dataset.K):
            penalty = PenaltyConfig(lambdas=cell)
            comps, _, _ = extract_components(
                std, gram, penalty, plan.max_components
            )
            iotas = recover_iotas(comps, gram)
            score_mat = np.column_stack(
                [compute_scores(std_test, iota, gram) for iota in iotas]
            )
            slopes = np.array([c.slope for c in comps])
            available = len(comps)
            for L in range(1, plan.max_components + 1):
                use = min(L, available)
                pred = transform.y_center + score_mat[:, :use] @ slopes[:use]
                score = rmse(y_test, pred)
                rec = CvRecord(
                    fold=f,
                    lambdas=cell,
                    n_components=L,
                    rmse=score,
                    truncated=L > available,
                )
                records.append(rec)
                sums.setdefault((cell, L), []).append(score)
                if hook is not None:
                    hook(f, cell, L, pred, y_test)

    def selection_key(item):
        (cell, L), scores = item
        return (
            float(np.mean(scores)),
            tuple(-lam for lam in cell),
            L,
        )

    (best_cell, best_L), _ = min(sums.items(), key=selection_key)
    return PenaltyConfig(lambdas=best_cell), best_L, records
