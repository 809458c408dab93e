"""Function bases on [0, 1]: construction, evaluation, Gram matrices.

Two families are supported: clamped B-splines with uniformly spaced interior
knots, and the trigonometric system {1, sqrt(2) cos(2 pi t), sqrt(2) sin(2 pi t), ...}.
Gram matrices of the basis functions and of their second derivatives are
assembled exactly: per-knot-interval Gauss-Legendre quadrature for splines
(node count chosen so products of basis functions are integrated without
truncation error) and closed forms for the trigonometric system.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import BSpline

from .errors import DomainError, InvalidBasisConfig, RankDeficient

__all__ = [
    "BasisSpec",
    "GramPair",
    "make_basis",
    "knot_vector",
    "evaluate",
    "gram",
    "project_curve",
    "project_curves",
]

_KINDS = ("bspline", "fourier")


@dataclass(frozen=True)
class BasisSpec:
    """Immutable description of a size-M function basis on [0, 1].

    Parameters
    ----------
    kind : {"bspline", "fourier"}
        Basis family.
    degree : int
        Spline degree; stored as 0 for the trigonometric family.
    num_basis : int
        Number of basis functions M.
    """

    kind: str
    degree: int
    num_basis: int

    def evaluate(self, t, derivative_order=0):
        return evaluate(self, t, derivative_order)

    def gram(self):
        return gram(self)

    def to_json(self):
        return {"kind": self.kind, "degree": self.degree, "num_basis": self.num_basis}

    @staticmethod
    def from_json(obj):
        try:
            return make_basis(obj["kind"], int(obj["degree"]), int(obj["num_basis"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidBasisConfig(f"malformed basis description: {obj!r}") from exc


@dataclass(frozen=True, eq=False)
class GramPair:
    """Gram matrices B (function products) and B2 (second-derivative products)."""

    B: np.ndarray
    B2: np.ndarray


def make_basis(kind, degree, num_basis):
    """Validate parameters and return a :class:`BasisSpec`.

    For B-splines the interior knots are uniformly spaced on (0, 1) and the
    boundary knots are repeated with multiplicity ``degree + 1`` (clamped),
    giving ``num_basis = degree + 1 + n_interior``. For the trigonometric
    family ``degree`` is ignored.

    Raises
    ------
    InvalidBasisConfig
        If the family is unknown, ``num_basis < 1``, or a spline basis is
        smaller than ``degree + 1``.
    """
    if kind not in _KINDS:
        raise InvalidBasisConfig(f"unknown basis kind {kind!r}; expected one of {_KINDS}")
    if num_basis < 1:
        raise InvalidBasisConfig(f"num_basis must be >= 1, got {num_basis}")
    if kind == "bspline":
        if degree < 0:
            raise InvalidBasisConfig(f"degree must be >= 0, got {degree}")
        if num_basis < degree + 1:
            raise InvalidBasisConfig(
                f"bspline basis needs num_basis >= degree + 1, got {num_basis} < {degree + 1}"
            )
        return BasisSpec("bspline", int(degree), int(num_basis))
    return BasisSpec("fourier", 0, int(num_basis))


def knot_vector(spec):
    """Full clamped knot vector (length M + degree + 1) of a spline basis."""
    if spec.kind != "bspline":
        raise InvalidBasisConfig("knot_vector is only defined for bspline bases")
    n_interior = spec.num_basis - spec.degree - 1
    interior = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
    return np.concatenate(
        [np.zeros(spec.degree + 1), interior, np.ones(spec.degree + 1)]
    )


def _check_domain(ts):
    ts = np.asarray(ts, dtype=float)
    if ts.ndim > 1:
        raise DomainError(f"evaluation points must be scalar or 1-d, got shape {ts.shape}")
    flat = np.atleast_1d(ts)
    if not np.all(np.isfinite(flat)) or flat.size and (flat.min() < 0.0 or flat.max() > 1.0):
        raise DomainError("evaluation points must lie in [0, 1]")
    return ts


def _bspline_design(spec, ts, nu):
    M = spec.num_basis
    if nu > spec.degree:
        # derivatives beyond the polynomial degree vanish almost everywhere
        return np.zeros((ts.size, M))
    b = BSpline(knot_vector(spec), np.eye(M), spec.degree)
    if nu:
        b = b.derivative(nu)
    return b(ts)


def _fourier_design(spec, ts, nu):
    M = spec.num_basis
    out = np.zeros((ts.size, M))
    if nu == 0:
        out[:, 0] = 1.0
    root2 = np.sqrt(2.0)
    for m in range(1, M):
        freq = 2.0 * np.pi * ((m + 1) // 2)
        phase = freq * ts
        is_cos = m % 2 == 1
        if nu == 0:
            out[:, m] = root2 * (np.cos(phase) if is_cos else np.sin(phase))
        elif nu == 1:
            out[:, m] = root2 * freq * (-np.sin(phase) if is_cos else np.cos(phase))
        else:
            out[:, m] = -root2 * freq**2 * (np.cos(phase) if is_cos else np.sin(phase))
    return out


def evaluate(spec, t, derivative_order=0):
    """Evaluate all basis functions (or a derivative) at points in [0, 1].

    Parameters
    ----------
    spec : BasisSpec
    t : float or 1-d array
    derivative_order : {0, 1, 2}

    Returns
    -------
    ndarray
        Shape (M,) for scalar input, (len(t), M) otherwise.
    """
    if derivative_order not in (0, 1, 2):
        raise InvalidBasisConfig(f"derivative_order must be 0, 1 or 2, got {derivative_order}")
    ts = _check_domain(t)
    scalar = ts.ndim == 0
    flat = np.atleast_1d(ts)
    if spec.kind == "bspline":
        out = _bspline_design(spec, flat, derivative_order)
    else:
        out = _fourier_design(spec, flat, derivative_order)
    return out[0] if scalar else out


def _bspline_gram(spec, nodes_per_interval):
    """Assemble (B, B2) by composite Gauss-Legendre over knot intervals."""
    M = spec.num_basis
    breaks = np.unique(knot_vector(spec))
    glx, glw = leggauss(nodes_per_interval)
    B = np.zeros((M, M))
    B2 = np.zeros((M, M))
    for a, b in zip(breaks[:-1], breaks[1:]):
        xs = 0.5 * (a + b) + 0.5 * (b - a) * glx
        ws = 0.5 * (b - a) * glw
        E0 = _bspline_design(spec, xs, 0)
        B += E0.T @ (ws[:, None] * E0)
        E2 = _bspline_design(spec, xs, 2)
        B2 += E2.T @ (ws[:, None] * E2)
    return B, B2


def _fourier_gram(spec):
    M = spec.num_basis
    B = np.eye(M)
    diag = np.zeros(M)
    for m in range(1, M):
        diag[m] = (2.0 * np.pi * ((m + 1) // 2)) ** 4
    return B, np.diag(diag)


@lru_cache(maxsize=None)
def gram(spec):
    """Gram matrices of the basis and of its second derivatives.

    ``B[m, m'] = int_0^1 b_m b_m' dt`` and ``B2[m, m'] = int_0^1 b_m'' b_m'' dt``.
    B is symmetric positive definite; B2 is positive semidefinite (for clamped
    cubic splines its rank is M - 2, since second derivatives of the basis
    span only the piecewise linears), so B + lambda * B2 stays invertible for
    any lambda >= 0.
    """
    if spec.kind == "bspline":
        B, B2 = _bspline_gram(spec, spec.degree + 2)
    else:
        B, B2 = _fourier_gram(spec)
    B.flags.writeable = False
    B2.flags.writeable = False
    return GramPair(B=B, B2=B2)


def project_curve(spec, samples, ridge=0.0):
    """Least-squares basis coefficients of one discretely observed curve.

    Parameters
    ----------
    spec : BasisSpec
    samples : array-like, shape (T, 2)
        Rows of (t, x(t)) observations with t in [0, 1].
    ridge : float, optional
        Weight of the roughness penalty ``ridge * theta' B2 theta`` added to
        the squared error; use for designs with fewer points than M.

    Raises
    ------
    RankDeficient
        If ``ridge == 0`` and the design matrix has rank < M.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2:
        raise DomainError(f"samples must have shape (T, 2), got {samples.shape}")
    coefs = project_curves(spec, samples[:, 0], samples[None, :, 1], ridge)
    return coefs[0]


def project_curves(spec, t_grid, values, ridge=0.0):
    """Batch :func:`project_curve` for curves sharing one observation grid.

    ``values`` has shape (n, T); returns coefficients of shape (n, M).
    """
    ts = np.atleast_1d(_check_domain(t_grid))
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] != ts.size:
        raise DomainError(
            f"values must have shape (n, {ts.size}), got {values.shape}"
        )
    M = spec.num_basis
    D = evaluate(spec, ts)
    if ridge < 0:
        raise InvalidBasisConfig(f"ridge must be >= 0, got {ridge}")
    if ridge == 0.0:
        coefs, _, rank, _ = np.linalg.lstsq(D, values.T, rcond=None)
        if rank < M:
            raise RankDeficient(
                f"design matrix rank {rank} < {M}; supply more sample points or a ridge"
            )
        return coefs.T
    A = D.T @ D + ridge * gram(spec).B2
    try:
        c, low = np.linalg.cholesky(A), True
    except np.linalg.LinAlgError as exc:
        raise RankDeficient("penalized normal equations are singular") from exc
    y = np.linalg.solve(c, D.T @ values.T)
    return np.linalg.solve(c.T, y).T
