"""Simulated projective measurements in the Hermite-Gaussian basis.

Arm 1 is the transmitted arm (SLM hologram), arm 2 the reflected arm. All
rates are relative; absolute count scales enter only through sampling.
"""
from dataclasses import dataclass

import numpy as np

from .errors import GridCoverageError
from .modes import MAX_ORDER, ModeIndex, hg_mode_2d, schmidt_mode, schmidt_mode_table
from .schmidt import COVERAGE_MIN_NORM, discretize_1d, discretize_2d


def _coverage(sampled, w, label):
    norms = np.sqrt(np.sum(sampled * sampled * w, axis=-1))
    if np.any(norms < COVERAGE_MIN_NORM):
        raise GridCoverageError(f"grid does not support {label} (norm {np.min(norms):.6f})")


def mode_list(max_order):
    """All (n, m) with n, m <= max_order, lexicographic."""
    return [ModeIndex(n, m) for n in range(max_order + 1) for m in range(max_order + 1)]


class KernelProjector:
    """Normalized kernel on a grid, projected onto pairs of HG modes.

    Separable kernels (those with an ``axis`` factor) are handled as
    products of 2D quadratures on the 1D grid; anything else is discretized
    directly on the tensor grid, so keep that grid coarse (~33 points).
    """

    def __init__(self, kernel_fn, basis, grid):
        self.basis = basis
        self.grid = grid
        self.separable = bool(getattr(kernel_fn, "separable", False))
        if self.separable:
            dk = discretize_1d(kernel_fn.axis, grid)
        else:
            dk = discretize_2d(kernel_fn, grid)
        self._dk = dk
        norm = np.linalg.norm(dk.matrix)
        if norm == 0:
            raise ValueError("kernel vanishes on the grid")
        # weight-symmetrized and L2-normalized; separable norm is per axis
        self._m = dk.matrix / norm

    def _axis_coefficients(self, n_max):
        table = schmidt_mode_table(self.basis, n_max, self.grid.points)
        _coverage(table, self.grid.weights, f"HG modes up to order {n_max}")
        sw = np.sqrt(self.grid.weights)
        t = table * sw
        return t @ self._m @ t.T

    def coefficients(self, modes1, modes2):
        """Matrix of <psi_a psi_b | Psi> for a in modes1 (arm 1), b in modes2."""
        modes1 = [ModeIndex(*m).validate() for m in modes1]
        modes2 = [ModeIndex(*m).validate() for m in modes2]
        if self.separable:
            n_max = max(max(max(m) for m in modes1), max(max(m) for m in modes2))
            c = self._axis_coefficients(n_max)
            return np.array([[c[a.n, b.n] * c[a.m, b.m] for b in modes2] for a in modes1])
        sw = np.sqrt(self.grid.weights_2d())
        t1 = self._sampled_2d(modes1) * sw
        t2 = self._sampled_2d(modes2) * sw
        return t1 @ self._m @ t2.T

    def _sampled_2d(self, modes):
        sampled = np.array([hg_mode_2d(self.basis, m, self.grid) for m in modes])
        _coverage(sampled, self.grid.weights_2d(), f"modes {[tuple(m) for m in modes]}")
        return sampled

    def conditional(self, herald, arm=1):
        """Unnormalized amplitude of the other photon after projecting ``arm`` on ``herald``.

        Returns an (N, N) array over (qx, qy) of the unheralded photon.
        """
        herald = ModeIndex(*herald).validate()
        g = self.grid
        sw = np.sqrt(g.weights)
        m = self._m if arm == 1 else self._m.T
        if self.separable:
            fx = schmidt_mode(self.basis, herald.n, g.points)
            fy = schmidt_mode(self.basis, herald.m, g.points)
            _coverage(np.array([fx, fy]), g.weights, f"herald {tuple(herald)}")
            # M = sqrt(w) K sqrt(w), so (f sqrt(w)) @ M / sqrt(w) = sum_i w_i f_i K_i.
            cx = (fx * sw) @ m / sw
            cy = (fy * sw) @ m / sw
            return np.outer(cx, cy)
        f = self._sampled_2d([herald])[0]
        sw2 = np.sqrt(g.weights_2d())
        return ((f * sw2) @ m / sw2).reshape(len(g), len(g))


def projection_coefficient(kernel_fn, basis, arm1, arm2, grid):
    """<psi_arm1 (photon 1) psi_arm2 (photon 2) | Psi> for the normalized kernel."""
    proj = KernelProjector(kernel_fn, basis, grid)
    return float(proj.coefficients([arm1], [arm2])[0, 0])


@dataclass(frozen=True)
class CoincidenceMatrix:
    """Coincidence rates |<psi_a psi_b|Psi>|^2, relative to the (00),(00) entry.

    ``entries[i, j]``: arm-1 mode ``modes[i]``, arm-2 mode ``modes[j]``.
    """

    entries: np.ndarray
    modes: list
    normalization: float

    @property
    def rates(self):
        """Absolute (un-rescaled) coincidence probabilities."""
        return self.entries * self.normalization

    def index(self, mode):
        return self.modes.index(ModeIndex(*mode))

    def fixed_arm2(self, mode):
        """Arm-1 rates with arm 2 fixed on ``mode`` (one fixed-mode panel)."""
        return self.entries[:, self.index(mode)]

    def max_offdiagonal_ratio(self):
        off = self.entries[~np.eye(len(self.modes), dtype=bool)]
        return float(off.max() / np.diag(self.entries).max())


def coincidence_matrix(kernel_fn, basis, max_order, grid, max_mode_order=None):
    cap = MAX_ORDER if max_mode_order is None else max_mode_order
    if max_order > cap:
        raise ValueError(f"max_order {max_order} exceeds mode cap {cap}")
    modes = mode_list(max_order)
    coeff = KernelProjector(kernel_fn, basis, grid).coefficients(modes, modes)
    rates = coeff * coeff
    norm = float(rates[0, 0])
    if norm == 0:
        raise ValueError("the (0,0),(0,0) coincidence rate vanishes; cannot normalize")
    return CoincidenceMatrix(rates / norm, modes, norm)


def singles_rate(d, mode, basis):
    """sum_k lambda_k |<psi_mode|u_k>|^2 from a 2D Schmidt decomposition."""
    if d.dims != 2:
        raise ValueError("singles_rate needs a 2D decomposition")
    psi = hg_mode_2d(basis, mode, d.grid)
    w = d.grid.weights_2d()
    _coverage(psi, w, f"mode {tuple(mode)}")
    overlaps = d.modes @ (psi * w)
    return float(np.sum(d.eigenvalues * overlaps * overlaps))


def singles_rate_separable(d, mode, basis):
    """Singles from a 1D decomposition of a separable kernel.

    The reduced state factorizes as rho_x (x) rho_y, so the 2D rate is the
    product of per-axis rates.
    """
    if d.dims != 1:
        raise ValueError("singles_rate_separable needs a 1D decomposition")
    mode = ModeIndex(*mode).validate()
    table = schmidt_mode_table(basis, max(mode), d.grid.points)
    _coverage(table[[mode.n, mode.m]], d.grid.weights, f"mode {tuple(mode)}")
    ov = table @ (d.modes * d.grid.weights).T
    per_axis = (ov * ov) @ d.eigenvalues
    return float(per_axis[mode.n] * per_axis[mode.m])


def visibility(rate_max, rate_min):
    """(max - min) / (max + min)."""
    if rate_min < 0 or rate_max < rate_min:
        raise ValueError(f"need rate_max >= rate_min >= 0, got {rate_max}, {rate_min}")
    if rate_max == 0:
        raise ValueError("visibility undefined for all-zero rates")
    return (rate_max - rate_min) / (rate_max + rate_min)


def suppression_visibility(rates, target_index):
    """Contrast between the target entry and the strongest other entry.

    Negative when some other mode outshines the target.
    """
    rates = np.asarray(rates, dtype=float)
    target = rates[target_index]
    other = np.max(np.delete(rates, target_index))
    if target + other == 0:
        raise ValueError("visibility undefined for all-zero rates")
    return float((target - other) / (target + other))


def fiber_mode(basis, x, k, mismatch=1.0):
    """Normalized Gaussian fiber mode centred at ``x``; width = psi_0 width * mismatch."""
    s = basis.scale / mismatch
    return np.sqrt(s) * np.pi**-0.25 * np.exp(-0.5 * (s * (np.asarray(k) - x)) ** 2)


def fiber_scan(mode, basis, x, grid, mismatch=1.0):
    """|<G_x|psi_n>|^2 for a fiber tip displaced by ``x``.

    ``mode`` is a 1D order n (an int or a ModeIndex, whose ``n`` is used).
    """
    n = mode.n if isinstance(mode, ModeIndex) else int(mode)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    psi = schmidt_mode(basis, n, grid.points)
    gx = fiber_mode(basis, xs[:, None], grid.points[None, :], mismatch)
    _coverage(psi, grid.weights, f"mode {n}")
    _coverage(gx, grid.weights, "displaced fiber mode")
    amp = gx @ (psi * grid.weights)
    rate = amp * amp
    return float(rate[0]) if np.ndim(x) == 0 else rate


def coincidence_scan(kernel_fn, herald, basis, xs, grid, scanned_arm=2, mismatch=1.0):
    """Coincidences vs fiber displacement with the other arm fixed on ``herald``.

    Uses the one-axis factor of a separable kernel; rates are
    |<psi_herald G_x|Psi>|^2 with G_x in ``scanned_arm``.
    """
    herald = herald.n if isinstance(herald, ModeIndex) else int(herald)
    axis = getattr(kernel_fn, "axis", kernel_fn)
    dk = discretize_1d(axis, grid)
    m = dk.matrix / np.linalg.norm(dk.matrix)
    if scanned_arm == 1:
        m = m.T
    elif scanned_arm != 2:
        raise ValueError(f"scanned_arm must be 1 or 2, got {scanned_arm}")
    sw = np.sqrt(grid.weights)
    psi = schmidt_mode(basis, herald, grid.points)
    gx = fiber_mode(basis, np.atleast_1d(xs)[:, None], grid.points[None, :], mismatch)
    _coverage(psi, grid.weights, f"mode {herald}")
    _coverage(gx, grid.weights, "displaced fiber mode")
    amp = ((psi * sw) @ m) @ (gx * sw).T
    return amp * amp


@dataclass(frozen=True)
class CountRecord:
    mode: tuple
    expected_rate: float
    sampled_counts: int
    acquisition: float
    seed: int
    background: float = 0.0


def sample_counts(expected_rate, scale, seed, background=0.0):
    """Poisson draw with mean expected_rate * scale + background."""
    if expected_rate < 0:
        raise ValueError(f"expected_rate must be >= 0, got {expected_rate}")
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    mean = expected_rate * scale + background
    return int(np.random.default_rng(seed).poisson(mean))


def derive_seed(seed, index):
    """Independent per-call seed from a base seed and an index."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def simulate_counts(rates, total_counts, seed, background=0.0, noiseless=False):
    """One CountRecord per mode; ``rates`` maps mode -> relative expected rate.

    The acquisition scale makes the expected signal counts sum to
    ``total_counts``. Each mode is sampled with its own derived seed.
    """
    items = list(rates.items())
    total_rate = sum(r for _, r in items)
    if total_rate <= 0:
        raise ValueError("expected rates sum to zero")
    scale = total_counts / total_rate
    records = []
    for i, (mode, rate) in enumerate(items):
        s = derive_seed(seed, i)
        if noiseless:
            counts = int(round(rate * scale + background))
        else:
            counts = sample_counts(rate, scale, s, background)
        records.append(CountRecord(tuple(mode), float(rate), counts, float(scale), s, float(background)))
    return records
