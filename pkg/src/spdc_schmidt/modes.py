"""Hermite-Gaussian functions, scaled Schmidt modes and grid quadrature.

All coordinates are dimensionless transverse angles (angle / 1 mrad).
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

MAX_ORDER = 64
DEFAULT_EXTENT_WIDTHS = 8.0
DEFAULT_POINTS = 1025

_PI_QUARTER = np.pi ** -0.25


class ModeIndex(NamedTuple):
    """HG mode label: ``n`` along x, ``m`` along y."""

    n: int
    m: int = 0

    def validate(self):
        if self.n < 0 or self.m < 0:
            raise ValueError(f"mode indices must be non-negative, got {tuple(self)}")
        return self


@dataclass(frozen=True)
class Grid:
    """Symmetric 1D quadrature grid on [-extent, extent]."""

    points: np.ndarray
    weights: np.ndarray
    extent: float

    def __post_init__(self):
        if self.points.shape != self.weights.shape or self.points.ndim != 1:
            raise ValueError("points and weights must be 1D arrays of equal length")
        if np.any(np.diff(self.points) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if np.max(np.abs(self.points + self.points[::-1])) > 1e-12 * max(1.0, self.extent):
            raise ValueError("grid must be symmetric about 0")

    def __len__(self):
        return self.points.size

    @property
    def step(self):
        return float(self.points[1] - self.points[0])

    def weights_2d(self):
        """Tensor-product weights, flattened in C order (x index major)."""
        return np.outer(self.weights, self.weights).ravel()


@dataclass(frozen=True)
class HGBasis:
    """Schmidt-mode basis psi_n(k) = sqrt(scale) * phi_n(scale * k)."""

    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @classmethod
    def from_widths(cls, a, b):
        """Basis diagonalizing the double-Gaussian amplitude with widths a, b."""
        return cls(float(np.sqrt(2.0 / (a * b))))

    @property
    def norm_prefactor(self):
        return float(np.sqrt(self.scale))

    @property
    def width(self):
        """One mode-width in angle units (1/scale)."""
        return 1.0 / self.scale

    def default_grid(self, n_points=DEFAULT_POINTS, widths=DEFAULT_EXTENT_WIDTHS):
        return make_grid(widths * self.width, n_points)


def _check_order(n, max_order=MAX_ORDER):
    if n < 0:
        raise ValueError(f"mode order must be non-negative, got {n}")
    if n > max_order:
        raise ValueError(f"mode order {n} exceeds max order {max_order}")


def hermite_poly(n, x):
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h if h.ndim else float(h)


def hg_table(n_max, x, max_order=MAX_ORDER):
    """Rows phi_0..phi_{n_max} evaluated at ``x``.

    The normalized recurrence
    phi_{k+1} = sqrt(2/(k+1)) x phi_k - sqrt(k/(k+1)) phi_{k-1}
    never forms n! or 2^n, so it stays finite for every supported order.
    """
    _check_order(n_max, max_order)
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = _PI_QUARTER * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, n_max):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * x * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def hg_function(n, x, max_order=MAX_ORDER):
    """L2-normalized Hermite-Gaussian function phi_n(x)."""
    row = hg_table(n, x, max_order)[n]
    return row if row.ndim else float(row)


def schmidt_mode(basis, n, k, max_order=MAX_ORDER):
    """Scaled Schmidt mode psi_n(k), normalized in k."""
    s = basis.scale
    return basis.norm_prefactor * hg_function(n, s * np.asarray(k, dtype=float), max_order)


def schmidt_mode_table(basis, n_max, k, max_order=MAX_ORDER):
    return basis.norm_prefactor * hg_table(n_max, basis.scale * np.asarray(k, dtype=float), max_order)


def hg_mode_2d(basis, mode, grid):
    """psi_n(kx) psi_m(ky) sampled on the tensor grid, flattened x-major."""
    mode = ModeIndex(*mode).validate()
    fx = schmidt_mode(basis, mode.n, grid.points)
    fy = schmidt_mode(basis, mode.m, grid.points)
    return np.outer(fx, fy).ravel()


def make_grid(extent, n_points):
    """Uniform symmetric grid with trapezoid weights; ``n_points`` must be odd."""
    if not extent > 0:
        raise ValueError(f"extent must be positive, got {extent}")
    if n_points < 3 or n_points % 2 == 0:
        raise ValueError(f"n_points must be odd and >= 3, got {n_points}")
    half = (n_points - 1) // 2
    step = extent / half
    points = step * np.arange(-half, half + 1, dtype=float)
    weights = np.full(n_points, step)
    weights[0] = weights[-1] = 0.5 * step
    return Grid(points, weights, float(extent))


def inner_product(f, g, grid):
    """<f|g> = sum conj(f_i) g_i w_i, on a 1D grid or its tensor square."""
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape != g.shape:
        raise ValueError(f"length mismatch: {f.shape} vs {g.shape}")
    if f.size == len(grid):
        w = grid.weights
    elif f.size == len(grid) ** 2:
        w = grid.weights_2d()
    else:
        raise ValueError(f"vector length {f.size} does not match grid of {len(grid)} points")
    val = np.sum(np.conj(f.ravel()) * g.ravel() * w)
    return complex(val) if np.iscomplexobj(val) else float(val)


def grid_norm(f, grid):
    return float(np.sqrt(np.real(inner_product(f, f, grid))))
