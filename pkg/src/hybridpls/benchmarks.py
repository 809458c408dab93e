"""Seeded replication harnesses behind the validation and benchmark commands.

Both harnesses are plain functions returning records, so the test suite and
the CLI share one code path; the CLI only adds CSV rendering (also here, so
the byte-format promise is testable without a subprocess).
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .basis import gram
from .errors import ConfigError
from .hybrid import apply_standardization, standardize
from .io import _fmt, _write_csv
from .model_selection import CvPlan, cross_validate, scaled_rmse
from .pcr import cross_modality_correlations, fit_pcr
from .pls import HybridPLS, diagnostics
from .simulate import ScenarioSpec, default_basis, generate, replication_seeds

__all__ = [
    "REGIMES",
    "DEFAULT_LAMBDA_GRID",
    "GeometryRow",
    "GeometrySummary",
    "BenchmarkRow",
    "CorrelationRow",
    "run_geometry_validation",
    "run_method_benchmark",
    "write_geometry_csv",
    "write_benchmark_csv",
    "write_correlation_csv",
]

# named penalty regimes: weak/weak, weak/strong, strong/strong
REGIMES = (
    ("weak", (0.1, 0.1)),
    ("mixed", (0.1, 10.0)),
    ("strong", (10.0, 10.0)),
)

DEFAULT_LAMBDA_GRID = (0.001, 0.01, 0.1, 1.0)

_BENCHMARK_DEFAULT_N = {"nuisance": 400, "cross_modal": 200}


@dataclass(frozen=True)
class GeometryRow:
    """Orthogonality deviations of one replication under one regime."""

    regime: str
    replication: int
    max_residual_score: float
    max_direction_product: float
    max_score_correlation: float
    top_response_component: int

    @property
    def metrics(self):
        return (
            self.max_residual_score,
            self.max_direction_product,
            self.max_score_correlation,
        )


@dataclass(frozen=True)
class GeometrySummary:
    regime: str
    means: tuple
    std_errors: tuple


def run_geometry_validation(
    n=200, reps=100, seed=0, n_components=10, basis=None, regimes=REGIMES
):
    """Fit every regime on `reps` fresh datasets; returns (rows, summaries).

    Each row carries the three orthogonality deviation maxima of the fit's
    diagnostics plus the 1-based index of the component whose scores
    correlate most with the original response.
    """
    spec_basis = basis if basis is not None else default_basis("geometry")
    rows = []
    for rep, rep_seed in enumerate(replication_seeds(seed, reps)):
        dataset, _ = generate(
            ScenarioSpec(scenario="geometry", n=n, seed=int(rep_seed), basis=spec_basis)
        )
        for name, lambdas in regimes:
            est = HybridPLS(
                n_components=n_components,
                lambdas=tuple(lambdas),
                basis=spec_basis,
                keep_history=True,
            ).fit(dataset)
            report = diagnostics(est)
            rows.append(
                GeometryRow(
                    regime=name,
                    replication=rep,
                    max_residual_score=report.max_residual_score,
                    max_direction_product=report.max_direction_product,
                    max_score_correlation=report.max_score_correlation,
                    top_response_component=int(
                        np.argmax(report.response_correlations) + 1
                    ),
                )
            )
    summaries = []
    for name, _ in regimes:
        vals = np.array([r.metrics for r in rows if r.regime == name])
        summaries.append(
            GeometrySummary(
                regime=name,
                means=tuple(float(v) for v in vals.mean(axis=0)),
                std_errors=tuple(
                    float(v)
                    for v in vals.std(axis=0, ddof=1) / np.sqrt(vals.shape[0])
                )
                if vals.shape[0] > 1
                else (float("nan"),) * 3,
            )
        )
    return rows, summaries


@dataclass(frozen=True)
class BenchmarkRow:
    method: str
    components: int
    replication: int
    scaled_rmse: float


@dataclass(frozen=True)
class CorrelationRow:
    replication: int
    component: int
    source_pair: str
    correlation: float


def _pair_labels(n_functional, has_scalars):
    names = [f"functional_{k + 1}" for k in range(n_functional)]
    if has_scalars:
        names.append("scalars")
    return ["|".join(pair) for pair in itertools.combinations(names, 2)]


def run_method_benchmark(
    scenario,
    n=None,
    reps=100,
    seed=0,
    max_components=5,
    folds=5,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    basis=None,
):
    """Test-set scaled RMSE by component count, PLS vs pooled PCR.

    Per replication: draw the scenario, split first half train / second half
    test, pick the PLS penalty by K-fold CV on the training half (jointly
    over the grid and the component count), fit both methods at depth
    `max_components`, and score every prefix depth on the test half. PCR's
    per-source depth is capped by min(M, p, n_train - 1); requested depths
    past the cap reuse the deepest fit. Returns (benchmark rows,
    cross-modality correlation rows); the correlations are between the
    per-source training score columns of the PCR fit.
    """
    if scenario not in _BENCHMARK_DEFAULT_N:
        raise ConfigError(
            f"benchmarking is defined for {sorted(_BENCHMARK_DEFAULT_N)}, "
            f"got {scenario!r}"
        )
    if n is None:
        n = _BENCHMARK_DEFAULT_N[scenario]
    spec_basis = basis if basis is not None else default_basis(scenario)
    pair = gram(spec_basis)

    bench_rows, corr_rows = [], []
    for rep, rep_seed in enumerate(replication_seeds(seed, reps)):
        dataset, _ = generate(
            ScenarioSpec(scenario=scenario, n=n, seed=int(rep_seed), basis=spec_basis)
        )
        half = dataset.n // 2
        train = dataset.take(np.arange(half))
        test = dataset.take(np.arange(half, dataset.n))

        plan = CvPlan(
            folds=folds,
            lambda_grid=lambda_grid,
            max_components=max_components,
            seed=int(rep_seed),
        )
        penalty, _, _ = cross_validate(train, pair, plan)

        est = HybridPLS(
            n_components=max_components, lambdas=penalty.lambdas, basis=spec_basis
        ).fit(train)
        score_mat = est.transform(test)
        slopes = np.array([c.slope for c in est.components_])
        for L in range(1, max_components + 1):
            use = min(L, est.n_components_)
            pred = est.transform_.y_center + score_mat[:, :use] @ slopes[:use]
            bench_rows.append(
                BenchmarkRow(
                    method="hybrid_pls",
                    components=L,
                    replication=rep,
                    scaled_rmse=scaled_rmse(test.y, pred),
                )
            )

        std_train, transform = standardize(train, pair)
        depth = min(max_components, train.M, train.n - 1)
        if train.p:
            depth = min(depth, train.p)
        model = fit_pcr(std_train, pair, depth, transform=transform, check_rank=False)
        std_test = apply_standardization(transform, test)
        train_scores = model.pooled_scores(std_train)
        test_scores = model.pooled_scores(std_test)
        n_sources = model.n_sources
        ones_train = np.ones(std_train.n)
        for L in range(1, max_components + 1):
            use = min(L, depth)
            cols = [b * depth + l for b in range(n_sources) for l in range(use)]
            X = np.column_stack([ones_train, train_scores[:, cols]])
            coef, *_ = np.linalg.lstsq(X, std_train.y, rcond=None)
            pred = transform.y_center + coef[0] + test_scores[:, cols] @ coef[1:]
            bench_rows.append(
                BenchmarkRow(
                    method="pcr",
                    components=L,
                    replication=rep,
                    scaled_rmse=scaled_rmse(test.y, pred),
                )
            )

        labels = _pair_labels(train.K, bool(train.p))
        corr = cross_modality_correlations(model, std_train)
        for l in range(corr.shape[0]):
            for label, value in zip(labels, corr[l]):
                corr_rows.append(
                    CorrelationRow(
                        replication=rep,
                        component=l + 1,
                        source_pair=label,
                        correlation=float(value),
                    )
                )
    return bench_rows, corr_rows


# ---------------------------------------------------------------------------
# CSV rendering (shared between tests and the CLI)
# ---------------------------------------------------------------------------


def write_geometry_csv(path, rows, summaries):
    """Data rows per (regime, replication), then one mean (se) row per regime."""
    out = [
        [
            "regime",
            "replication",
            "max_residual_score",
            "max_direction_product",
            "max_score_correlation",
        ]
    ]
    for row in sorted(rows, key=lambda r: (r.regime, r.replication)):
        out.append([row.regime, str(row.replication)] + [_fmt(v) for v in row.metrics])
    for s in summaries:
        out.append(
            [s.regime, "mean_se"]
            + [f"{_fmt(m)} ({_fmt(e)})" for m, e in zip(s.means, s.std_errors)]
        )
    _write_csv(path, out)


def write_benchmark_csv(path, rows):
    out = [["method", "components", "replication", "scaled_rmse"]]
    for row in sorted(rows, key=lambda r: (r.method, r.components, r.replication)):
        out.append(
            [row.method, str(row.components), str(row.replication), _fmt(row.scaled_rmse)]
        )
    _write_csv(path, out)


def write_correlation_csv(path, rows):
    out = [["replication", "component", "source_pair", "correlation"]]
    for row in sorted(rows, key=lambda r: (r.replication, r.component, r.source_pair)):
        out.append(
            [str(row.replication), str(row.component), row.source_pair, _fmt(row.correlation)]
        )
    _write_csv(path, out)
