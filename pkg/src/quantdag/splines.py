"""Cubic B-spline designs, the second-difference penalty and the spectral
reparameterization that reduces each covariate's spline block to the few
directions carrying essentially all of its prior variability.

The reduced design is ``U @ sqrt(D)`` where ``U, D`` are the top eigenpairs of
``design @ pinv(penalty) @ design.T``, retained until their cumulative
eigenvalue fraction reaches ``var_threshold`` (0.995 by default).
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from .errors import DegenerateInputError, DimensionError

DEFAULT_NUM_BASIS = 20
DEFAULT_VAR_THRESHOLD = 0.995

# Relative padding of the knot span beyond the observed range, and the
# relative singular-value cutoff used by the generalized inverse.
_KNOT_PAD = 1e-6
_PINV_RCOND = 1e-10


@dataclass(frozen=True)
class SplineBasis:
    """Reparameterized spline design for one covariate.

    Attributes
    ----------
    covariate_index : position of the covariate this basis was built for.
    design_raw : (n, B) raw B-spline design matrix.
    design_reduced : (n, B*) reduced design U @ sqrt(D).
    eigvals : (B*,) retained eigenvalues, strictly positive, non-increasing.
    eigvecs : (n, B*) orthonormal eigenvectors of the smoothed covariance.
    reduced_dim : B*, the number of retained directions.
    knots : full (clamped) knot vector of the raw basis.
    """

    covariate_index: int
    design_raw: np.ndarray
    design_reduced: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    reduced_dim: int
    knots: np.ndarray


def knot_vector(x, num_basis=DEFAULT_NUM_BASIS, degree=3):
    """Clamped knot vector: equally spaced breakpoints over the padded range."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DimensionError("x must be a 1-d vector with at least 2 entries")
    if not np.all(np.isfinite(x)):
        raise ValueError("x contains non-finite values")
    if num_basis < degree + 1:
        raise DimensionError(f"num_basis must be >= degree+1, got {num_basis}")
    lo, hi = float(np.min(x)), float(np.max(x))
    if hi == lo:
        raise DegenerateInputError("constant covariate: spline range is empty")
    pad = _KNOT_PAD * (hi - lo)
    breaks = np.linspace(lo - pad, hi + pad, num_basis - degree + 1)
    return np.concatenate(
        [np.full(degree, breaks[0]), breaks, np.full(degree, breaks[-1])]
    )


def build_bspline_design(x, num_basis=DEFAULT_NUM_BASIS, degree=3):
    """Evaluate a clamped B-spline basis at each point of ``x``.

    Knots are ``num_basis - degree + 1`` equally spaced breakpoints spanning
    the observed range padded by 1e-6 of its width, with the two boundary
    knots repeated ``degree`` extra times. Rows sum to one (partition of
    unity) and each row has at most ``degree + 1`` nonzero entries.
    """
    knots = knot_vector(x, num_basis=num_basis, degree=degree)
    x = np.asarray(x, dtype=float)
    return BSpline.design_matrix(x, knots, degree).toarray()


def penalty_matrix(num_basis):
    """Second-order difference penalty ``D2.T @ D2`` (rank ``num_basis - 2``)."""
    if num_basis < 3:
        raise DimensionError("penalty needs at least 3 basis functions")
    d2 = np.diff(np.eye(num_basis), n=2, axis=0)
    return d2.T @ d2


def reparameterize(design_raw, penalty, var_threshold=DEFAULT_VAR_THRESHOLD,
                   covariate_index=0, knots=None):
    """Spectral reduction of one covariate's penalized spline block.

    Forms ``M = design @ pinv(penalty) @ design.T``, keeps the leading
    eigenpairs until their cumulative share of the positive spectrum reaches
    ``var_threshold``, and returns the resulting :class:`SplineBasis` with
    ``design_reduced = U @ sqrt(D)``.
    """
    if not 0.0 < var_threshold <= 1.0:
        raise ValueError("var_threshold must lie in (0, 1]")
    design_raw = np.asarray(design_raw, dtype=float)
    penalty = np.asarray(penalty, dtype=float)
    if design_raw.ndim != 2 or penalty.shape != (design_raw.shape[1],) * 2:
        raise DimensionError("design is n x B and penalty must be B x B")
    if not np.any(design_raw):
        raise DegenerateInputError("all-zero design matrix")

    sigma_pinv = np.linalg.pinv(penalty, rcond=_PINV_RCOND, hermitian=True)
    m = design_raw @ sigma_pinv @ design_raw.T
    m = 0.5 * (m + m.T)
    eigvals, eigvecs = np.linalg.eigh(m)
    order = np.argsort(eigvals)[::-1]
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]

    positive = eigvals > max(eigvals[0], 0.0) * 1e-12
    total = float(np.sum(eigvals[positive]))
    if total <= 0.0:
        raise DegenerateInputError("smoothed covariance has no positive spectrum")
    frac = np.cumsum(eigvals[positive]) / total
    reduced_dim = int(np.searchsorted(frac, var_threshold - 1e-12) + 1)
    reduced_dim = min(reduced_dim, int(np.sum(positive)))

    eigvals = eigvals[:reduced_dim].copy()
    eigvecs = eigvecs[:, :reduced_dim].copy()
    design_reduced = eigvecs * np.sqrt(eigvals)
    return SplineBasis(
        covariate_index=covariate_index,
        design_raw=design_raw,
        design_reduced=design_reduced,
        eigvals=eigvals,
        eigvecs=eigvecs,
        reduced_dim=reduced_dim,
        knots=np.asarray(knots) if knots is not None else np.array([]),
    )


def basis_for_covariate(x, covariate_index=0, num_basis=DEFAULT_NUM_BASIS,
                        degree=3, var_threshold=DEFAULT_VAR_THRESHOLD):
    """Convenience pipeline: raw design + penalty + reparameterization."""
    knots = knot_vector(x, num_basis=num_basis, degree=degree)
    design = build_bspline_design(x, num_basis=num_basis, degree=degree)
    penalty = penalty_matrix(num_basis)
    return reparameterize(design, penalty, var_threshold=var_threshold,
                          covariate_index=covariate_index, knots=knots)


def build_bases(X, num_basis=DEFAULT_NUM_BASIS, degree=3,
                var_threshold=DEFAULT_VAR_THRESHOLD):
    """One :class:`SplineBasis` per column of the covariate matrix ``X``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionError("X must be n x q")
    return [
        basis_for_covariate(X[:, k], covariate_index=k, num_basis=num_basis,
                            degree=degree, var_threshold=var_threshold)
        for k in range(X.shape[1])
    ]
