"""Discretize two-photon kernels and compute their Schmidt decomposition.

A kernel K(x, y) sampled on a quadrature grid becomes the matrix
M_ij = sqrt(w_i) K(x_i, x_j) sqrt(w_j); its singular vectors divided by
sqrt(w) are L2-orthonormal Schmidt modes and its squared singular values,
normalized, are the Schmidt weights.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _backend
from .errors import GridCoverageError, NumericalError
from .modes import Grid, HGBasis, ModeIndex, hg_mode_2d, schmidt_mode_table

DEFAULT_TRUNCATION_TOL = 1e-6
DEFAULT_POINTS_2D = 33
COVERAGE_MIN_NORM = 0.999
_SIGN_THRESHOLD = 1e-6


@dataclass(frozen=True)
class DiscretizedKernel:
    matrix: np.ndarray
    grid: Grid
    dims: int

    @property
    def weights(self):
        return self.grid.weights if self.dims == 1 else self.grid.weights_2d()

    def is_symmetric(self, tol=1e-12):
        m = self.matrix
        return bool(np.max(np.abs(m - m.T)) <= tol * max(np.max(np.abs(m)), 1e-300))


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Retained Schmidt weights and modes.

    ``eigenvalues`` are normalized over the full discrete spectrum, so the
    retained weights sum to ``1 - residual``.
    """

    eigenvalues: np.ndarray
    modes: np.ndarray
    partner_modes: np.ndarray
    grid: Grid
    dims: int
    residual: float

    @property
    def truncation_count(self):
        return self.eigenvalues.size

    @property
    def weights(self):
        return self.grid.weights if self.dims == 1 else self.grid.weights_2d()


def discretize_1d(kernel_fn, grid):
    """Weight-symmetrized matrix of a 1D kernel ``kernel_fn(x1, x2)``."""
    x1, x2 = np.meshgrid(grid.points, grid.points, indexing="ij")
    k = np.asarray(kernel_fn(x1, x2), dtype=float)
    return _symmetrize(k, grid.weights, grid, 1)


def discretize_2d(kernel_fn, grid):
    """Weight-symmetrized N^2 x N^2 matrix of ``kernel_fn(q1x, q1y, q2x, q2y)``.

    Flat index I = i_x * N + i_y, matching :meth:`Grid.weights_2d`.
    """
    qx, qy = np.meshgrid(grid.points, grid.points, indexing="ij")
    qx, qy = qx.ravel(), qy.ravel()
    k = np.asarray(kernel_fn(qx[:, None], qy[:, None], qx[None, :], qy[None, :]), dtype=float)
    return _symmetrize(k, grid.weights_2d(), grid, 2)


def _symmetrize(k, w, grid, dims):
    if not np.all(np.isfinite(k)):
        raise ValueError("kernel produced non-finite values on the grid")
    sw = np.sqrt(w)
    return DiscretizedKernel(sw[:, None] * k * sw[None, :], grid, dims)


def jacobi_svd(a, tol=None, max_sweeps=60):
    """Thin SVD by one-sided Jacobi rotations on a pivoted-QR preconditioned factor.

    ``A P = Q R`` is computed first; Jacobi then orthogonalizes the columns
    of R^T restricted to its numerical rank, which converges in a handful of
    sweeps and keeps small singular values accurate. Returns ``(U, s, Vh)``
    with ``s`` descending.
    """
    a = np.asarray(a, dtype=float)
    m, n = a.shape
    q, r, piv = scipy.linalg.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        raise NumericalError("cannot decompose an all-zero matrix")
    rank = int(np.count_nonzero(diag > np.finfo(float).eps * diag[0]))
    if tol is None:
        tol = np.finfo(float).eps * n
    cols, vt, sweeps = _backend.one_sided_jacobi(r[:rank, :], tol, max_sweeps)
    if sweeps < 0:
        raise NumericalError(f"Jacobi SVD did not converge within {max_sweeps} sweeps")
    s = np.linalg.norm(cols, axis=1)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    nz = s > 0
    u1 = np.zeros((rank, n))
    u1[nz] = cols[order][nz] / s[nz, None]
    u = q[:, :rank] @ vt[order].T
    vh = np.empty((rank, n))
    vh[:, piv] = u1
    return u, s, vh


def _svd(matrix, method):
    if method == "jacobi":
        return jacobi_svd(matrix)
    if method == "lapack":
        try:
            return np.linalg.svd(matrix, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"LAPACK SVD failed: {exc}") from exc
    raise ValueError(f"unknown SVD method {method!r}")


def decompose(dk, truncation_tol=DEFAULT_TRUNCATION_TOL, method="jacobi"):
    """Schmidt decomposition of a discretized kernel.

    Modes are kept until the cumulative weight reaches ``1 - truncation_tol``;
    the discarded weight is reported as ``residual``.
    """
    if not 0 < truncation_tol < 1:
        raise ValueError(f"truncation_tol must be in (0, 1), got {truncation_tol}")
    if not np.all(np.isfinite(dk.matrix)):
        raise ValueError("kernel matrix has non-finite entries")
    u, s, vh = _svd(dk.matrix, method)
    power = s * s
    total = power.sum()
    if total == 0:
        raise NumericalError("degenerate all-zero kernel")
    lam = power / total
    cumulative = np.cumsum(lam)
    count = int(min(np.searchsorted(cumulative, 1.0 - truncation_tol) + 1, lam.size))
    residual = float(max(lam[count:].sum(), 0.0))

    sw = np.sqrt(dk.weights)
    modes = u[:, :count].T / sw
    partners = vh[:count] / sw
    # deterministic sign: first significant sample of each mode is positive
    for k in range(count):
        idx = np.flatnonzero(np.abs(modes[k]) > _SIGN_THRESHOLD)
        if idx.size and modes[k, idx[0]] < 0:
            modes[k] *= -1
            partners[k] *= -1
    return SchmidtDecomposition(
        eigenvalues=lam[:count].copy(),
        modes=modes,
        partner_modes=partners,
        grid=dk.grid,
        dims=dk.dims,
        residual=residual,
    )


def _spectrum(d):
    if isinstance(d, SchmidtDecomposition):
        return d.eigenvalues
    return np.asarray(d, dtype=float)


def schmidt_number(d):
    """K = 1 / sum(lambda^2) over the retained weights, tail treated as zero."""
    lam = _spectrum(d)
    if lam.size == 0:
        raise ValueError("empty spectrum")
    return float(1.0 / np.sum(lam * lam))


def schmidt_number_bounds(d):
    """(lower, upper) bounds on K given the truncation residual.

    The discarded tail contributes between 0 and residual^2 to sum(lambda^2).
    """
    lam = _spectrum(d)
    if lam.size == 0:
        raise ValueError("empty spectrum")
    residual = d.residual if isinstance(d, SchmidtDecomposition) else max(0.0, 1.0 - lam.sum())
    sq = float(np.sum(lam * lam))
    return 1.0 / (sq + residual**2), 1.0 / sq


def _normalized(spec, tol):
    spec = np.asarray(spec, dtype=float).ravel()
    if np.any(spec < 0):
        raise ValueError("spectrum has negative entries")
    total = spec.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"spectrum sums to {total}, not 1 within {tol}")
    return spec / total


def fidelity(spec_a, spec_b, tol=1e-6):
    """Fidelity sum_k sqrt(a_k b_k) of two commuting diagonal states.

    Entries are paired by index; the shorter spectrum is zero-padded.
    """
    a = _normalized(spec_a, tol)
    b = _normalized(spec_b, tol)
    n = max(a.size, b.size)
    a = np.pad(a, (0, n - a.size))
    b = np.pad(b, (0, n - b.size))
    return float(min(np.sum(np.sqrt(a * b)), 1.0))


def sorted_product_spectrum(lam_x, lam_y=None):
    """Descending outer-product spectrum lambda_n * lambda_m."""
    lam_y = lam_x if lam_y is None else lam_y
    return np.sort(np.outer(lam_x, lam_y).ravel())[::-1]


def mode_rows(max_order, dims):
    if dims == 1:
        return [ModeIndex(n, 0) for n in range(max_order + 1)]
    return [ModeIndex(n, m) for n in range(max_order + 1) for m in range(max_order + 1)]


def analytic_mode_matrix(basis, rows, grid, dims):
    """Rows of sampled analytic Schmidt modes, with a coverage check."""
    if dims == 1:
        n_max = max(r.n for r in rows)
        table = schmidt_mode_table(basis, n_max, grid.points)
        sampled = table[[r.n for r in rows]]
        w = grid.weights
    else:
        sampled = np.array([hg_mode_2d(basis, r, grid) for r in rows])
        w = grid.weights_2d()
    norms = np.sqrt(np.sum(sampled * sampled * w, axis=1))
    bad = [tuple(r) for r, nrm in zip(rows, norms) if nrm < COVERAGE_MIN_NORM]
    if bad:
        raise GridCoverageError(f"grid does not support modes {bad} (norm < {COVERAGE_MIN_NORM})")
    return sampled


def mode_overlap_matrix(d, basis, max_order):
    """|<psi_n|u_k>|^2: rows are analytic HG modes, columns numerical modes.

    For 2D decompositions rows run over (n, m) with n, m <= max_order in
    lexicographic order (see :func:`mode_rows`).
    """
    rows = mode_rows(max_order, d.dims)
    psi = analytic_mode_matrix(basis, rows, d.grid, d.dims)
    amp = (psi * d.weights) @ d.modes.T
    return amp * amp
