"""Ghost imaging of Schmidt modes: heralded conditional modes and slit scans.

The heralding photon is projected onto an HG mode; its partner passes a
slit in front of a bucket detector that integrates over everything the slit
transmits.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NumericalError
from .measurement import KernelProjector
from .modes import ModeIndex, hg_function

# 200 um slit <-> 0.35 mode widths; an arbitrary calibration, override per setup
DEFAULT_SLIT_UM = 200.0
DEFAULT_WIDTHS_PER_UM = 0.00175  # 0.35 widths / 200 um


def heralded_amplitude(kernel_fn, herald, basis, grid, projector=None):
    """Normalized conditional amplitude of photon 2, shape (N, N) over (qx, qy)."""
    proj = projector or KernelProjector(kernel_fn, basis, grid)
    amp = proj.conditional(herald, arm=1)
    norm2 = float(np.sum(amp * amp * np.outer(grid.weights, grid.weights)))
    if not norm2 > 1e-24:
        raise ValueError(f"herald {tuple(herald)} leaves a zero-norm conditional state")
    return amp / np.sqrt(norm2)


def marginal_intensity(amp, grid, axis=0):
    """Intensity along ``axis`` (0: x, 1: y) integrated over the other axis."""
    inten = np.abs(amp) ** 2
    return inten @ grid.weights if axis == 0 else grid.weights @ inten


@dataclass(frozen=True)
class SlitScanResult:
    positions: np.ndarray
    rates: np.ndarray
    slit_width: float
    herald_mode: ModeIndex | None = None

    def density(self):
        """Rates per unit slit width; pointwise intensity for a zero-width slit."""
        return self.rates if self.slit_width == 0 else self.rates / self.slit_width


def _cumulative(points, inten):
    seg = 0.5 * (inten[1:] + inten[:-1]) * np.diff(points)
    return np.concatenate(([0.0], np.cumsum(seg)))


def _primitive(points, inten, cum, x):
    """Integral from points[0] to x of the piecewise-linear interpolant."""
    x = np.clip(x, points[0], points[-1])
    k = np.clip(np.searchsorted(points, x, side="right") - 1, 0, points.size - 2)
    h = points[k + 1] - points[k]
    d = x - points[k]
    return cum[k] + inten[k] * d + (inten[k + 1] - inten[k]) * d * d / (2 * h)


def slit_scan(conditional_intensity, grid, slit_width, positions, herald=None):
    """Rate(x) = integral of the intensity over [x - w/2, x + w/2].

    The sampled intensity is integrated exactly as a piecewise-linear
    function (trapezoid sub-quadrature with interpolated slit edges). Slit
    portions beyond the grid see zero intensity. ``slit_width == 0`` returns
    the interpolated pointwise intensity.
    """
    inten = np.asarray(conditional_intensity, dtype=float)
    positions = np.asarray(positions, dtype=float)
    if inten.shape != grid.points.shape:
        raise ValueError("intensity must be sampled on the grid")
    if slit_width < 0:
        raise ValueError(f"slit_width must be >= 0, got {slit_width}")
    if positions.size > 1 and np.any(np.diff(positions) <= 0):
        raise ValueError("positions must be strictly increasing")
    if np.any(np.abs(positions) > grid.extent):
        raise ValueError("slit position outside the grid extent")
    pts = grid.points
    if slit_width == 0:
        rates = np.interp(positions, pts, inten)
    else:
        cum = _cumulative(pts, inten)
        hi = _primitive(pts, inten, cum, positions + 0.5 * slit_width)
        lo = _primitive(pts, inten, cum, positions - 0.5 * slit_width)
        rates = hi - lo
    herald = None if herald is None else ModeIndex(*herald)
    return SlitScanResult(positions, np.maximum(rates, 0.0), float(slit_width), herald)


def ghost_image(kernel_fn, herald, basis, grid, slit_width, positions, axis=0):
    """Coincidences between a heralding HG projection and a slit + bucket arm."""
    amp = heralded_amplitude(kernel_fn, herald, basis, grid)
    inten = marginal_intensity(amp, grid, axis)
    return slit_scan(inten, grid, slit_width, positions, herald)


class HGFit(NamedTuple):
    scale: float
    amplitude: float
    goodness: float


def _profile(n, x, scale):
    return hg_function(n, np.asarray(x) / scale) ** 2


def fit_hg_profile(scan, n, n_coarse=200, xatol=1e-10, maxiter=500):
    """Least-squares fit of A * phi_n(x / scale)^2 to the scan rates.

    For each trial scale the amplitude has a closed form; the scale comes
    from a log-spaced coarse search refined by bounded Brent minimization.
    ``goodness`` is the residual norm relative to the data norm (smaller is
    better).
    """
    x = np.asarray(scan.positions, dtype=float)
    y = np.asarray(scan.rates, dtype=float)
    if x.size < 5:
        raise ValueError("need at least 5 scan points to fit")
    y_norm = np.linalg.norm(y)
    if y_norm == 0:
        raise ValueError("cannot fit an all-zero scan")

    def solve(scale):
        g = _profile(n, x, scale)
        gg = g @ g
        amp = max((g @ y) / gg, 0.0) if gg > 0 else 0.0
        return amp, np.linalg.norm(y - amp * g)

    span = np.max(np.abs(x))
    step = np.min(np.diff(x)) if x.size > 1 else span
    trial = np.geomspace(step / 4, 2 * span, n_coarse)
    losses = np.array([solve(s)[1] for s in trial])
    best = int(np.argmin(losses))
    lo = np.log(trial[max(best - 1, 0)])
    hi = np.log(trial[min(best + 1, n_coarse - 1)])
    res = minimize_scalar(
        lambda ls: solve(np.exp(ls))[1],
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": xatol, "maxiter": maxiter},
    )
    if not res.success:
        raise NumericalError(f"HG profile fit did not converge: {res.message}")
    scale = float(np.exp(res.x))
    amp, resid = solve(scale)
    return HGFit(scale, float(amp), float(resid / y_norm))
