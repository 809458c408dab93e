"""Command-line front end.

Subcommands: fit, predict, simulate, validate-geometry, benchmark, cv.
Every command reads and writes plain files (CSV bundles, JSON models) and
is deterministic given its flags; rerunning with the same seed reproduces
each output byte for byte. Numbers are serialized with 17 significant
digits.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
degeneracy. Errors print one structured line to stderr.
"""

import argparse
import os
import sys

import numpy as np

from .basis import gram, make_basis
from .benchmarks import (
    run_geometry_validation,
    run_method_benchmark,
    write_benchmark_csv,
    write_correlation_csv,
    write_geometry_csv,
)
from .errors import ConfigError, DataError, HybridPlsError, UnknownScenario
from .io import (
    SCHEMA_VERSION,
    _fmt,
    _read_json,
    _write_csv,
    _write_json,
    basis_from_dict,
    project_bundle,
    read_dataset_bundle,
    read_model,
    write_dataset_bundle,
    write_ground_truth,
    write_model,
    write_score_table,
)
from .model_selection import CvPlan, cross_validate
from .pcr import predict_pcr
from .pls import HybridPLS
from .simulate import SCENARIOS, ScenarioSpec, generate

DEFAULT_GRID_TEXT = "0.001,0.01,0.1,1"

# canonical sample sizes used when --n is omitted
_DEFAULT_N = {
    "geometry": 200,
    "beta_estimation": 200,
    "nuisance": 400,
    "cross_modal": 200,
}


def _parse_grid(text):
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"lambda grid {text!r} is not a comma-separated "
                          "list of numbers") from None
    if not values:
        raise ConfigError(f"lambda grid {text!r} has no values")
    return values


def _lambda_values(flags):
    """Collect repeated --lambda flags; absent means unpenalized."""
    if not flags:
        return 0.0
    if len(flags) == 1:
        return float(flags[0])
    return tuple(float(v) for v in flags)


def _optional_basis(args):
    if args.basis_size is None:
        return None
    return make_basis("bspline", args.degree, args.basis_size)


def _projection_basis(args):
    return make_basis("bspline", args.degree, args.basis_size)


def cmd_fit(args):
    """Fit on a dataset bundle; writes model.json and fit_report.csv.

    The report has one row per extracted component: the slope on the
    component's scores, |cor(response, scores)| at extraction time, and the
    training RMSE after that many components.
    """
    spec = _projection_basis(args)
    dataset = project_bundle(read_dataset_bundle(args.input), spec)
    est = HybridPLS(
        n_components=args.components,
        lambdas=_lambda_values(args.lam),
        basis=spec,
    ).fit(dataset)
    os.makedirs(args.output, exist_ok=True)
    write_model(os.path.join(args.output, "model.json"), est)
    rows = [["component", "slope", "abs_corr_response", "train_rmse"]]
    for level, comp in enumerate(est.components_, start=1):
        cor = abs(float(np.corrcoef(est.y0_, comp.scores)[0, 1]))
        rows.append([
            str(level),
            _fmt(comp.slope),
            _fmt(cor),
            _fmt(float(np.sqrt(est.y_rss_[level] / dataset.n))),
        ])
    _write_csv(os.path.join(args.output, "fit_report.csv"), rows)
    return 0


def cmd_predict(args):
    """Predict a bundle with a stored model; writes predictions.csv."""
    model = read_model(args.model)
    if isinstance(model, HybridPLS):
        spec = model.basis
    else:
        spec = basis_from_dict(_read_json(args.model)["basis"])
    dataset = project_bundle(read_dataset_bundle(args.input), spec)
    if isinstance(model, HybridPLS):
        pred = model.predict(dataset)
    else:
        pred = predict_pcr(model, dataset)
    os.makedirs(args.output, exist_ok=True)
    rows = [["y_pred"]]
    rows.extend([_fmt(v)] for v in pred)
    _write_csv(os.path.join(args.output, "predictions.csv"), rows)
    return 0


def cmd_simulate(args):
    """Draw a synthetic dataset; writes the CSV bundle + ground_truth.json."""
    if args.scenario not in SCENARIOS:
        raise UnknownScenario(
            f"unknown scenario {args.scenario!r}, expected one of "
            f"{sorted(SCENARIOS)}"
        )
    n = args.n if args.n is not None else _DEFAULT_N[args.scenario]
    spec = ScenarioSpec(
        scenario=args.scenario, n=n, seed=args.seed, basis=_optional_basis(args)
    )
    dataset, truth = generate(spec)
    write_dataset_bundle(args.output, dataset, spec.resolved_basis())
    write_ground_truth(os.path.join(args.output, "ground_truth.json"), truth)
    return 0


def cmd_validate_geometry(args):
    """Orthogonality deviation table over regimes; writes one CSV."""
    rows, summaries = run_geometry_validation(
        n=args.n,
        reps=args.reps,
        seed=args.seed,
        n_components=args.components,
        basis=_optional_basis(args),
    )
    os.makedirs(args.output, exist_ok=True)
    write_geometry_csv(
        os.path.join(args.output, "geometry_validation.csv"), rows, summaries
    )
    return 0


def cmd_benchmark(args):
    """Scaled-RMSE-by-depth comparison; writes RMSE and correlation CSVs."""
    bench_rows, corr_rows = run_method_benchmark(
        args.scenario,
        n=args.n,
        reps=args.reps,
        seed=args.seed,
        max_components=args.components,
        folds=args.folds,
        lambda_grid=_parse_grid(args.lambda_grid),
        basis=_optional_basis(args),
    )
    os.makedirs(args.output, exist_ok=True)
    write_benchmark_csv(
        os.path.join(args.output, "benchmark_rmse.csv"), bench_rows
    )
    write_correlation_csv(
        os.path.join(args.output, "benchmark_correlations.csv"), corr_rows
    )
    return 0


def cmd_cv(args):
    """Cross-validate penalty and depth on a bundle; writes the score table
    plus the selected configuration."""
    spec = _projection_basis(args)
    dataset = project_bundle(read_dataset_bundle(args.input), spec)
    plan = CvPlan(
        folds=args.folds,
        lambda_grid=_parse_grid(args.lambda_grid),
        max_components=args.components,
        seed=args.seed,
    )
    penalty, best_level, records = cross_validate(dataset, gram(spec), plan)
    os.makedirs(args.output, exist_ok=True)
    write_score_table(os.path.join(args.output, "cv_scores.csv"), records)
    _write_json(
        os.path.join(args.output, "cv_selection.json"),
        {
            "schema_version": SCHEMA_VERSION,
            "lambdas": list(penalty.lambdas),
            "n_components": int(best_level),
        },
    )
    return 0


def _add_in_out(parser, needs_input=True):
    if needs_input:
        parser.add_argument("--in", dest="input", required=True,
                            metavar="DIR", help="dataset bundle directory")
    parser.add_argument("--out", dest="output", required=True, metavar="DIR",
                        help="output directory")


def _add_basis_flags(parser, size_default=None):
    parser.add_argument("--basis-size", type=int, default=size_default,
                        help="number of B-spline basis functions")
    parser.add_argument("--degree", type=int, default=3,
                        help="B-spline degree (default 3)")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hybridpls",
        description="Partial least squares for mixed functional and scalar "
                    "predictors: fit, predict, simulate, validate, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a model on a dataset bundle")
    _add_in_out(fit)
    _add_basis_flags(fit, size_default=20)
    fit.add_argument("--components", type=int, default=2, metavar="L")
    fit.add_argument("--lambda", dest="lam", action="append", type=float,
                     metavar="X",
                     help="roughness penalty; repeat for one value per "
                          "functional predictor")
    fit.set_defaults(func=cmd_fit)

    predict = sub.add_parser("predict", help="predict with a stored model")
    predict.add_argument("--model", required=True, metavar="FILE")
    _add_in_out(predict)
    predict.set_defaults(func=cmd_predict)

    simulate = sub.add_parser("simulate", help="write a synthetic dataset")
    simulate.add_argument("--scenario", required=True)
    simulate.add_argument("--n", type=int, default=None)
    simulate.add_argument("--seed", type=int, default=0)
    _add_basis_flags(simulate)
    _add_in_out(simulate, needs_input=False)
    simulate.set_defaults(func=cmd_simulate)

    geom = sub.add_parser("validate-geometry",
                          help="orthogonality deviations across penalty regimes")
    geom.add_argument("--n", type=int, default=200)
    geom.add_argument("--reps", type=int, default=100)
    geom.add_argument("--seed", type=int, default=0)
    geom.add_argument("--components", type=int, default=10, metavar="L")
    _add_basis_flags(geom)
    _add_in_out(geom, needs_input=False)
    geom.set_defaults(func=cmd_validate_geometry)

    bench = sub.add_parser("benchmark",
                           help="scaled test RMSE by component count, PLS vs PCR")
    bench.add_argument("--scenario", required=True)
    bench.add_argument("--n", type=int, default=None)
    bench.add_argument("--reps", type=int, default=100)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--components", type=int, default=5, metavar="L")
    bench.add_argument("--folds", type=int, default=5)
    bench.add_argument("--lambda-grid", default=DEFAULT_GRID_TEXT,
                       metavar="X,Y,..")
    _add_basis_flags(bench)
    _add_in_out(bench, needs_input=False)
    bench.set_defaults(func=cmd_benchmark)

    cv = sub.add_parser("cv", help="cross-validate penalties and depth")
    _add_in_out(cv)
    _add_basis_flags(cv, size_default=20)
    cv.add_argument("--components", type=int, default=5, metavar="L")
    cv.add_argument("--folds", type=int, default=5)
    cv.add_argument("--lambda-grid", default=DEFAULT_GRID_TEXT,
                    metavar="X,Y,..")
    cv.add_argument("--seed", type=int, default=0)
    cv.set_defaults(func=cmd_cv)

    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HybridPlsError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        if isinstance(exc, ConfigError):
            return 2
        if isinstance(exc, DataError):
            return 3
        return 4


if __name__ == "__main__":
    sys.exit(main())
