"""Cross-validation over the penalty grid and component count."""

import numpy as np
import numpy.testing as npt
import pytest

from hybridpls.basis import gram, make_basis
from hybridpls.errors import (
    ConfigError,
    DegenerateScale,
    EmptyInput,
    FoldTooSmall,
    ShapeMismatch,
)
from hybridpls.hybrid import HybridDataset
from hybridpls.model_selection import (
    CvPlan,
    cross_validate,
    fold_assignments,
    mean_scores,
    range_scaled_rmse,
    rmse,
    scaled_rmse,
)


def make_dataset(rng, n=40, K=2, M=6, p=3):
    theta = tuple(rng.standard_normal((n, M)) for _ in range(K))
    Z = rng.standard_normal((n, p))
    y = theta[0][:, 0] + 0.5 * Z[:, 0] + 0.2 * rng.standard_normal(n)
    return HybridDataset(theta=theta, scalars=Z, y=y)


# ---------------------------------------------------------------------------
# scoring functions
# ---------------------------------------------------------------------------


def test_rmse_exact_fit_is_zero():
    y = np.array([1.0, -2.0, 3.0])
    assert rmse(y, y) == 0.0


def test_rmse_hand_arithmetic():
    assert rmse(np.array([0.0, 2.0]), np.array([1.0, 1.0])) == pytest.approx(1.0)


def test_rmse_rejects_mismatch_and_empty():
    with pytest.raises(ShapeMismatch):
        rmse(np.zeros(3), np.zeros(4))
    with pytest.raises(EmptyInput):
        rmse(np.zeros(0), np.zeros(0))


def test_scaled_rmse_divides_by_sample_sd():
    rng = np.random.default_rng(0)
    y = rng.standard_normal(20)
    pred = y + 0.5
    want = rmse(y, pred) / np.std(y, ddof=1)
    assert scaled_rmse(y, pred) == pytest.approx(want)


def test_scaled_rmse_degenerate_scale():
    with pytest.raises(DegenerateScale):
        scaled_rmse(np.full(5, 2.0), np.zeros(5))
    with pytest.raises(DegenerateScale):
        scaled_rmse(np.array([1.0]), np.array([1.0]))


def test_range_scaled_rmse():
    y = np.array([0.0, 4.0])
    # errors (-1, 3): rmse = sqrt(5), range = 4
    assert range_scaled_rmse(y, np.array([1.0, 1.0])) == pytest.approx(
        np.sqrt(5.0) / 4.0
    )
    with pytest.raises(DegenerateScale):
        range_scaled_rmse(np.full(3, 1.0), np.zeros(3))


# ---------------------------------------------------------------------------
# fold assignment
# ---------------------------------------------------------------------------


def test_fold_assignments_deterministic_and_balanced():
    a = fold_assignments(23, 5, seed=99)
    b = fold_assignments(23, 5, seed=99)
    npt.assert_array_equal(a, b)
    sizes = np.bincount(a, minlength=5)
    assert sizes.min() >= 1
    assert sizes.max() - sizes.min() <= 1
    c = fold_assignments(23, 5, seed=100)
    assert not np.array_equal(a, c)


def test_fold_assignments_rejects_more_folds_than_rows():
    with pytest.raises(FoldTooSmall):
        fold_assignments(3, 4, seed=0)


# ---------------------------------------------------------------------------
# plan validation
# ---------------------------------------------------------------------------


def test_cv_plan_validation():
    with pytest.raises(ConfigError):
        CvPlan(folds=1, lambda_grid=(0.1,), max_components=2, seed=0)
    with pytest.raises(ConfigError):
        CvPlan(folds=5, lambda_grid=(), max_components=2, seed=0)
    with pytest.raises(ConfigError):
        CvPlan(folds=5, lambda_grid=(0.1,), max_components=0, seed=0)
    with pytest.raises(ConfigError):
        CvPlan(folds=5, lambda_grid=(-1.0,), max_components=2, seed=0)


# ---------------------------------------------------------------------------
# cross_validate
# ---------------------------------------------------------------------------


def test_singleton_grid_returns_it():
    rng = np.random.default_rng(1)
    ds = make_dataset(rng)
    pair = gram(make_basis("bspline", 3, 6))
    plan = CvPlan(folds=4, lambda_grid=(0.1,), max_components=1, seed=7)
    best_penalty, best_L, table = cross_validate(ds, pair, plan)
    assert best_penalty.lambdas == (0.1, 0.1)
    assert best_L == 1
    assert len(table) == 4  # one cell, four folds


def test_rerun_same_seed_is_identical():
    rng = np.random.default_rng(2)
    ds = make_dataset(rng)
    pair = gram(make_basis("bspline", 3, 6))
    plan = CvPlan(folds=3, lambda_grid=(0.0, 0.1), max_components=2, seed=11)
    p1, L1, t1 = cross_validate(ds, pair, plan)
    p2, L2, t2 = cross_validate(ds, pair, plan)
    assert p1.lambdas == p2.lambdas and L1 == L2
    assert len(t1) == len(t2)
    for r1, r2 in zip(t1, t2):
        assert (r1.fold, r1.lambdas, r1.n_components) == (
            r2.fold,
            r2.lambdas,
            r2.n_components,
        )
        assert r1.rmse == r2.rmse  # bit-identical, not merely close


def test_table_is_total_over_the_grid():
    rng = np.random.default_rng(3)
    ds = make_dataset(rng, K=2)
    pair = gram(make_basis("bspline", 3, 6))
    plan = CvPlan(folds=3, lambda_grid=(0.0, 1.0), max_components=2, seed=5)
    _, _, table = cross_validate(ds, pair, plan)
    # 2 predictors -> 4 lambda cells, x 3 folds x 2 component counts
    assert len(table) == 4 * 3 * 2
    assert all(np.isfinite(r.rmse) for r in table)


def test_selection_minimizes_its_own_mean_column():
    rng = np.random.default_rng(4)
    ds = make_dataset(rng)
    pair = gram(make_basis("bspline", 3, 6))
    plan = CvPlan(folds=4, lambda_grid=(0.001, 0.1, 1.0), max_components=3, seed=13)
    best_penalty, best_L, table = cross_validate(ds, pair, plan)
    means = mean_scores(table)
    best_mean = min(m.rmse for m in means)
    chosen = [
        m
        for m in means
        if m.lambdas == best_penalty.lambdas and m.n_components == best_L
    ]
    assert len(chosen) == 1
    assert chosen[0].rmse == best_mean


def test_tie_breaks_prefer_larger_lambda_then_smaller_l():
    # degree-0 splines have a vanishing second derivative, so every lambda
    # yields bit-identical fits and the whole grid ties exactly
    rng = np.random.default_rng(5)
    n, M = 30, 6
    theta = (rng.standard_normal((n, M)),)
    y = theta[0][:, 0] + 0.1 * rng.standard_normal(n)
    ds = HybridDataset(theta=theta, scalars=rng.standard_normal((n, 2)), y=y)
    pair = gram(make_basis("bspline", 0, M))
    plan = CvPlan(folds=3, lambda_grid=(0.0, 1.0), max_components=1, seed=3)
    best_penalty, best_L, _ = cross_validate(ds, pair, plan)
    assert best_penalty.lambdas == (1.0,)
    assert best_L == 1


def test_truncated_cells_are_flagged_and_smaller_l_wins_ties():
    # exactly rank-one predictors exhaust after one component; the L = 2
    # cells tie with L = 1 exactly and carry the truncation flag
    rng = np.random.default_rng(6)
    n, M = 24, 5
    u = rng.standard_normal(n)
    base = rng.standard_normal(M)
    ds = HybridDataset(
        theta=(np.outer(u, base),),
        scalars=u[:, None],
        y=u + 0.05 * rng.standard_normal(n),
    )
    pair = gram(make_basis("bspline", 2, M))
    plan = CvPlan(folds=3, lambda_grid=(0.0,), max_components=2, seed=1)
    best_penalty, best_L, table = cross_validate(ds, pair, plan)
    assert best_L == 1
    flagged = [r for r in table if r.n_components == 2]
    assert flagged and all(r.truncated for r in flagged)
    unflagged = [r for r in table if r.n_components == 1]
    assert all(not r.truncated for r in unflagged)
    by_fold = {r.fold: r.rmse for r in unflagged}
    assert all(r.rmse == by_fold[r.fold] for r in flagged)


def test_fold_too_small_on_tiny_training_split():
    rng = np.random.default_rng(7)
    ds = make_dataset(rng, n=2)
    pair = gram(make_basis("bspline", 3, 6))
    plan = CvPlan(folds=2, lambda_grid=(0.1,), max_components=1, seed=0)
    with pytest.raises(FoldTooSmall):
        cross_validate(ds, pair, plan)


def test_no_leakage_into_the_training_fit():
    # corrupting fold 0's held-out responses must not move fold 0's
    # predictions one bit: its training split never sees those rows. (Other
    # folds' fits legitimately change, since the corrupted rows train them.)
    rng = np.random.default_rng(8)
    ds = make_dataset(rng, n=30)
    pair = gram(make_basis("bspline", 3, 6))
    plan = CvPlan(folds=3, lambda_grid=(0.1,), max_components=2, seed=21)

    captured = {}

    def capture(store):
        def hook(fold, lambdas, n_components, predictions, y_test):
            store[(fold, lambdas, n_components)] = (
                predictions.copy(),
                y_test.copy(),
            )

        return hook

    before = {}
    cross_validate(ds, pair, plan, hook=capture(before))

    assign = fold_assignments(ds.n, plan.folds, plan.seed)
    y2 = ds.y.copy()
    y2[assign == 0] += 37.0
    ds2 = HybridDataset(theta=ds.theta, scalars=ds.scalars, y=y2)
    after = {}
    cross_validate(ds2, pair, plan, hook=capture(after))

    assert before.keys() == after.keys()
    captured = [k for k in before if k[0] == 0]
    assert captured
    for key in captured:
        npt.assert_array_equal(before[key][0], after[key][0])
        assert not np.array_equal(before[key][1], after[key][1])
