"""File formats: dataset bundles (CSV), models and ground truth (JSON), tables.

A dataset bundle is one directory holding
  functional_1.csv .. functional_K.csv   first row = observation grid in
                                          [0, 1], then one row per sample
  scalars.csv (optional)                  header row naming the columns; a
                                          column named "y" is the response
Every number is written with 17 significant digits, which round-trips IEEE
doubles exactly: reloading a model reproduces predictions bit for bit, and
rewriting any file is byte-identical. Ingestion failures raise IngestionError
carrying the file path and 1-based row/column coordinates.
"""

import csv
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .basis import gram, make_basis, evaluate, project_curves
from .errors import ConfigError, IngestionError, ShapeMismatch
from .hybrid import (
    HybridDataset,
    HybridElement,
    PenaltyConfig,
    Standardization,
    destandardize_coefficient,
)
from .pcr import PcrModel, PooledPCR
from .pls import HybridPLS, PlsComponent, recover_iotas

__all__ = [
    "RawBundle",
    "read_dataset_bundle",
    "write_dataset_bundle",
    "project_bundle",
    "read_model",
    "write_model",
    "read_ground_truth",
    "write_ground_truth",
    "basis_to_dict",
    "basis_from_dict",
    "write_score_table",
    "write_gram_csv",
]

SCHEMA_VERSION = 1

_DEFAULT_GRID = np.linspace(0.0, 1.0, 101)


# ---------------------------------------------------------------------------
# number formatting (shared by CSV and JSON writers)
# ---------------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"cannot serialize non-finite value {v!r}")
    if v == 0.0:
        return "0"
    return format(v, ".17g")


def _emit_json(obj, indent=0):
    pad = "  " * indent
    if obj is None or isinstance(obj, (bool, np.bool_, int, np.integer, float, np.floating)):
        return "null" if obj is None else _fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            return "[]"
        if all(
            it is None or isinstance(it, (bool, int, float, np.number)) for it in items
        ):
            return "[" + ", ".join(_emit_json(it) for it in items) + "]"
        inner = ",\n".join(
            "  " * (indent + 1) + _emit_json(it, indent + 1) for it in items
        )
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            "  " * (indent + 1) + json.dumps(str(k)) + ": " + _emit_json(v, indent + 1)
            for k, v in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    raise ConfigError(f"cannot serialize object of type {type(obj).__name__}")


def _write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(_emit_json(obj) + "\n")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise IngestionError("missing file", path=path) from None
    except json.JSONDecodeError as exc:
        raise IngestionError(f"not valid JSON: {exc.msg}", path=path, row=exc.lineno)


# ---------------------------------------------------------------------------
# low-level CSV
# ---------------------------------------------------------------------------


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)


def _read_rows(path):
    try:
        with open(path, newline="") as fh:
            return [row for row in csv.reader(fh) if row]
    except FileNotFoundError:
        raise IngestionError("missing dataset file", path=path) from None


def _parse_numeric_rows(path, rows, start_row, width):
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        file_row = start_row + i
        if len(row) != width:
            raise IngestionError(
                f"expected {width} columns, found {len(row)}", path=path, row=file_row
            )
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise IngestionError(
                    f"not a number: {cell!r}", path=path, row=file_row, column=j + 1
                ) from None
    return out


# ---------------------------------------------------------------------------
# dataset bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RawBundle:
    """Grid-sampled curves plus scalar columns, exactly as read from disk."""

    grids: tuple
    curves: tuple
    scalars: np.ndarray
    scalar_names: tuple
    y: object = None

    @property
    def n(self):
        return self.curves[0].shape[0]


def _read_functional_file(path):
    rows = _read_rows(path)
    if not rows:
        raise IngestionError("empty file", path=path)
    width = len(rows[0])
    grid = _parse_numeric_rows(path, rows[:1], 1, width)[0]
    if grid.size and (grid[0] < 0.0 or grid[-1] > 1.0):
        j = int(np.argmax((grid < 0.0) | (grid > 1.0))) + 1
        raise IngestionError(
            "grid times must lie in [0, 1]", path=path, row=1, column=j
        )
    if np.any(np.diff(grid) <= 0.0):
        j = int(np.argmax(np.diff(grid) <= 0.0)) + 2
        raise IngestionError(
            "grid times must be strictly increasing", path=path, row=1, column=j
        )
    if len(rows) < 2:
        raise IngestionError("no sample rows after the grid row", path=path)
    values = _parse_numeric_rows(path, rows[1:], 2, width)
    return grid, values


def _read_scalar_file(path):
    rows = _read_rows(path)
    if not rows:
        raise IngestionError("empty file", path=path)
    header = rows[0]
    if all(_is_number(cell) for cell in header):
        raise IngestionError(
            "scalars.csv needs a header row naming its columns", path=path, row=1
        )
    if len(set(header)) != len(header):
        raise IngestionError("duplicate column names", path=path, row=1)
    values = _parse_numeric_rows(path, rows[1:], 2, len(header))
    if "y" in header:
        j = header.index("y")
        y = values[:, j]
        keep = [c for c in range(len(header)) if c != j]
        return tuple(h for h in header if h != "y"), values[:, keep], y
    return tuple(header), values, None


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_dataset_bundle(directory):
    """Read functional_1.csv.. and scalars.csv from one directory."""
    grids, curves = [], []
    k = 1
    while True:
        path = os.path.join(directory, f"functional_{k}.csv")
        if not os.path.exists(path):
            break
        grid, values = _read_functional_file(path)
        grids.append(grid)
        curves.append(values)
        k += 1
    if not curves:
        raise IngestionError(
            "no functional predictor files found",
            path=os.path.join(directory, "functional_1.csv"),
        )
    n = curves[0].shape[0]
    for k, block in enumerate(curves[1:], start=2):
        if block.shape[0] != n:
            raise IngestionError(
                f"expected {n} samples, found {block.shape[0]}",
                path=os.path.join(directory, f"functional_{k}.csv"),
            )
    scalar_path = os.path.join(directory, "scalars.csv")
    names, scalars, y = (), np.zeros((n, 0)), None
    if os.path.exists(scalar_path):
        names, scalars, y = _read_scalar_file(scalar_path)
        if scalars.shape[0] != n:
            raise IngestionError(
                f"expected {n} samples, found {scalars.shape[0]}", path=scalar_path
            )
    return RawBundle(
        grids=tuple(grids), curves=tuple(curves), scalars=scalars,
        scalar_names=names, y=y,
    )


def project_bundle(bundle, basis):
    """Project every curve block onto the basis; returns a HybridDataset."""
    theta = tuple(
        project_curves(basis, grid, values)
        for grid, values in zip(bundle.grids, bundle.curves)
    )
    return HybridDataset(theta=theta, scalars=bundle.scalars, y=bundle.y)


def write_dataset_bundle(directory, dataset, basis, grid=None):
    """Render a coefficient dataset to curves on a grid and write the bundle."""
    if dataset.M != basis.num_basis:
        raise ShapeMismatch(
            f"dataset has {dataset.M} coefficients, basis has {basis.num_basis}"
        )
    grid = _DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    design = evaluate(basis, grid)
    os.makedirs(directory, exist_ok=True)
    for k, theta in enumerate(dataset.theta, start=1):
        rows = [[_fmt(t) for t in grid]]
        rows.extend([_fmt(v) for v in row] for row in theta @ design.T)
        _write_csv(os.path.join(directory, f"functional_{k}.csv"), rows)
    if dataset.p or dataset.y is not None:
        header = [f"z{j + 1}" for j in range(dataset.p)]
        columns = [dataset.scalars[:, j] for j in range(dataset.p)]
        if dataset.y is not None:
            header.append("y")
            columns.append(dataset.y)
        rows = [header]
        rows.extend(
            [_fmt(col[i]) for col in columns] for i in range(dataset.n)
        )
        _write_csv(os.path.join(directory, "scalars.csv"), rows)


# ---------------------------------------------------------------------------
# basis and element fragments
# ---------------------------------------------------------------------------


def basis_to_dict(spec):
    return {"kind": spec.kind, "degree": spec.degree, "num_basis": spec.num_basis}


def basis_from_dict(obj):
    try:
        return make_basis(obj["kind"], obj["degree"], obj["num_basis"])
    except (KeyError, TypeError):
        raise ConfigError(
            "basis object needs the fields kind, degree, num_basis"
        ) from None


def _element_to_dict(element):
    return {
        "coefs": [c.tolist() for c in element.coefs],
        "scalars": element.scalars.tolist(),
    }


def _element_from_dict(obj):
    return HybridElement(
        coefs=tuple(np.asarray(c, dtype=float) for c in obj["coefs"]),
        scalars=np.asarray(obj["scalars"], dtype=float),
    )


def _transform_to_dict(tf):
    return {
        "func_centers": [c.tolist() for c in tf.func_centers],
        "func_scales": np.asarray(tf.func_scales).tolist(),
        "scalar_center": tf.scalar_center.tolist(),
        "scalar_scale": tf.scalar_scale.tolist(),
        "omega": float(tf.omega),
        "y_center": float(tf.y_center),
    }


def _transform_from_dict(obj):
    return Standardization(
        func_centers=tuple(np.asarray(c, dtype=float) for c in obj["func_centers"]),
        func_scales=np.asarray(obj["func_scales"], dtype=float),
        scalar_center=np.asarray(obj["scalar_center"], dtype=float),
        scalar_scale=np.asarray(obj["scalar_scale"], dtype=float),
        omega=float(obj["omega"]),
        y_center=float(obj["y_center"]),
    )


# ---------------------------------------------------------------------------
# model JSON
# ---------------------------------------------------------------------------


def _pls_to_dict(est):
    return {
        "schema_version": SCHEMA_VERSION,
        "method": "hybrid_pls",
        "basis": basis_to_dict(est.basis),
        "penalty": list(est.penalty_.lambdas),
        "truncated": bool(est.truncated_),
        "transform": _transform_to_dict(est.transform_),
        "components": [
            {
                "direction": _element_to_dict(comp.direction),
                "loading": _element_to_dict(comp.loading),
                "slope": float(comp.slope),
            }
            for comp in est.components_
        ],
        "beta": _element_to_dict(est.beta_),
    }


def _pls_from_dict(obj):
    spec = basis_from_dict(obj["basis"])
    pair = gram(spec)
    lambdas = tuple(float(v) for v in obj["penalty"])
    components = [
        PlsComponent(
            direction=_element_from_dict(c["direction"]),
            loading=_element_from_dict(c["loading"]),
            slope=float(c["slope"]),
            scores=None,
            normalizer=None,
        )
        for c in obj["components"]
    ]
    est = HybridPLS(n_components=len(components), lambdas=lambdas, basis=spec)
    est.gram_ = pair
    est.penalty_ = PenaltyConfig(lambdas=lambdas)
    est.transform_ = _transform_from_dict(obj["transform"])
    est.components_ = components
    est.iotas_ = recover_iotas(components, pair)
    est.beta_ = _element_from_dict(obj["beta"])
    est.beta_raw_ = destandardize_coefficient(est.transform_, est.beta_)
    est.truncated_ = bool(obj.get("truncated", False))
    est.n_components_ = len(components)
    est.scores_ = None
    est.y0_ = None
    est.y_rss_ = None
    est.history_ = None
    return est


def _pcr_to_dict(model, basis):
    return {
        "schema_version": SCHEMA_VERSION,
        "method": "pcr",
        "basis": basis_to_dict(basis),
        "n_components": int(model.n_components),
        "eigenvectors": [v.tolist() for v in model.eigenvectors],
        "eigenvalues": [v.tolist() for v in model.eigenvalues],
        "scalar_rotation": model.scalar_rotation.tolist(),
        "scalar_eigenvalues": model.scalar_eigenvalues.tolist(),
        "coefficients": model.coefficients.tolist(),
        "intercept": float(model.intercept),
        "transform": None if model.transform is None else _transform_to_dict(model.transform),
    }


def _pcr_from_dict(obj):
    spec = basis_from_dict(obj["basis"])
    rotation = np.asarray(obj["scalar_rotation"], dtype=float)
    if rotation.size == 0:
        rotation = np.zeros((0, 0))
    return PcrModel(
        eigenvectors=tuple(np.asarray(v, dtype=float) for v in obj["eigenvectors"]),
        eigenvalues=tuple(np.asarray(v, dtype=float) for v in obj["eigenvalues"]),
        scalar_rotation=rotation,
        scalar_eigenvalues=np.asarray(obj["scalar_eigenvalues"], dtype=float),
        coefficients=np.asarray(obj["coefficients"], dtype=float),
        intercept=float(obj["intercept"]),
        n_components=int(obj["n_components"]),
        gram=gram(spec),
        transform=None
        if obj["transform"] is None
        else _transform_from_dict(obj["transform"]),
    )


def write_model(path, model, basis=None):
    """Serialize a fitted HybridPLS, PooledPCR, or PcrModel to JSON.

    A bare PcrModel does not know its basis, so `basis` is required for it;
    the estimators carry their own.
    """
    if isinstance(model, HybridPLS):
        _write_json(path, _pls_to_dict(model))
        return
    if isinstance(model, PooledPCR):
        _write_json(path, _pcr_to_dict(model.model_, model.basis))
        return
    if isinstance(model, PcrModel):
        if basis is None:
            raise ConfigError("writing a bare PcrModel needs its basis spec")
        _write_json(path, _pcr_to_dict(model, basis))
        return
    raise ConfigError(f"cannot serialize model of type {type(model).__name__}")


def read_model(path):
    """Load a model file; returns a fitted HybridPLS or a PcrModel."""
    obj = _read_json(path)
    method = obj.get("method") if isinstance(obj, dict) else None
    try:
        if method == "hybrid_pls":
            return _pls_from_dict(obj)
        if method == "pcr":
            return _pcr_from_dict(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise IngestionError(f"malformed model file: {exc}", path=path) from None
    raise IngestionError(f"unknown model method {method!r}", path=path)


# ---------------------------------------------------------------------------
# ground truth JSON
# ---------------------------------------------------------------------------


def write_ground_truth(path, truth):
    _write_json(
        path,
        {
            "schema_version": SCHEMA_VERSION,
            "beta": None if truth.beta is None else _element_to_dict(truth.beta),
            "latents": {k: np.asarray(v).tolist() for k, v in truth.latents.items()},
            "noise_sd": float(truth.noise_sd),
        },
    )


def read_ground_truth(path):
    from .simulate import GroundTruth

    obj = _read_json(path)
    try:
        beta = None if obj["beta"] is None else _element_from_dict(obj["beta"])
        latents = {
            k: np.asarray(v, dtype=float) for k, v in obj["latents"].items()
        }
        return GroundTruth(beta=beta, latents=latents, noise_sd=float(obj["noise_sd"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise IngestionError(f"malformed ground-truth file: {exc}", path=path) from None


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------


def write_score_table(path, records, num_predictors=None):
    """Cross-validation table: columns fold, lambda_1..lambda_K, L, rmse."""
    if num_predictors is None:
        if not records:
            raise ConfigError("empty score table and no predictor count given")
        num_predictors = len(records[0].lambdas)
    header = (
        ["fold"]
        + [f"lambda_{j + 1}" for j in range(num_predictors)]
        + ["L", "rmse"]
    )
    rows = [header]
    for rec in records:
        rows.append(
            [str(rec.fold)]
            + [_fmt(lam) for lam in rec.lambdas]
            + [str(rec.n_components), _fmt(rec.rmse)]
        )
    _write_csv(path, rows)


def write_gram_csv(directory, pair):
    """Debug export: gram_B.csv and gram_B2.csv as dense matrices."""
    os.makedirs(directory, exist_ok=True)
    for name, matrix in (("gram_B.csv", pair.B), ("gram_B2.csv", pair.B2)):
        rows = [[_fmt(v) for v in row] for row in matrix]
        _write_csv(os.path.join(directory, name), rows)
