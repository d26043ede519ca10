"""Biphoton transverse-momentum amplitudes and their analytic Schmidt data.

Angles are in mrad (dimensionless). Amplitudes are returned un-normalized;
normalization happens on a concrete grid in :mod:`spdc_schmidt.schmidt`.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

MRAD = 1e-3

# Value quoted for a=5.8 mrad, b=20 mrad in the experiment this package models.
# Not reproducible from the Kx formula at those widths; surfaced as a discrepancy.
REPORTED_KX = 2.97


def default_sinc_coefficient(crystal_length, pump_wavelength):
    """c_sinc in mrad^-2 for collinear degenerate phase matching.

    With k_perp = k_s * theta and k_s = k_p / 2 the sinc argument
    L (k1 - k2)^2 / (4 k_p) becomes L k_p (theta1 - theta2)^2 / 16.
    """
    k_p = 2.0 * np.pi / pump_wavelength
    return crystal_length * k_p * MRAD**2 / 16.0


@dataclass(frozen=True)
class OpticalParams:
    """Pump divergence ``a`` and phase-matching width ``b`` in mrad,
    crystal length and pump wavelength in meters."""

    a: float
    b: float
    crystal_length: float = 2e-3
    pump_wavelength: float = 325e-9
    c_sinc: float | None = field(default=None)

    def __post_init__(self):
        for name in ("a", "b", "crystal_length", "pump_wavelength"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val}")
        if self.c_sinc is not None and not self.c_sinc > 0:
            raise ValueError(f"c_sinc must be positive, got {self.c_sinc}")

    @property
    def sinc_coefficient(self):
        if self.c_sinc is not None:
            return float(self.c_sinc)
        return default_sinc_coefficient(self.crystal_length, self.pump_wavelength)


def _sinc(x):
    return np.sinc(np.asarray(x) / np.pi)


def double_gaussian_amplitude(p, q1x, q1y, q2x, q2y):
    """exp(-|q1+q2|^2 / 2a^2) * exp(-|q1-q2|^2 / 2b^2)."""
    sx, sy = np.add(q1x, q2x), np.add(q1y, q2y)
    dx, dy = np.subtract(q1x, q2x), np.subtract(q1y, q2y)
    return np.exp(-(sx * sx + sy * sy) / (2 * p.a**2) - (dx * dx + dy * dy) / (2 * p.b**2))


def exact_amplitude(p, q1x, q1y, q2x, q2y):
    """Gaussian pump times sinc(c_sinc |q1-q2|^2)."""
    sx, sy = np.add(q1x, q2x), np.add(q1y, q2y)
    dx, dy = np.subtract(q1x, q2x), np.subtract(q1y, q2y)
    pump = np.exp(-(sx * sx + sy * sy) / (2 * p.a**2))
    return pump * _sinc(p.sinc_coefficient * (dx * dx + dy * dy))


class DoubleGaussianKernel:
    """Callable 2D kernel that also exposes its one-axis factor.

    The amplitude factorizes as axis(q1x, q2x) * axis(q1y, q2y), which lets
    4D quadratures run as products of 2D ones.
    """

    separable = True

    def __init__(self, params):
        self.params = params

    def __call__(self, q1x, q1y, q2x, q2y):
        return double_gaussian_amplitude(self.params, q1x, q1y, q2x, q2y)

    def axis(self, x1, x2):
        p = self.params
        s, d = np.add(x1, x2), np.subtract(x1, x2)
        return np.exp(-s * s / (2 * p.a**2) - d * d / (2 * p.b**2))

    def __repr__(self):
        return f"DoubleGaussianKernel(a={self.params.a}, b={self.params.b})"


class ExactKernel:
    """Gaussian-pump sinc amplitude; not cartesian-separable."""

    separable = False

    def __init__(self, params):
        self.params = params

    def __call__(self, q1x, q1y, q2x, q2y):
        return exact_amplitude(self.params, q1x, q1y, q2x, q2y)

    def __repr__(self):
        return f"ExactKernel(a={self.params.a}, c_sinc={self.params.sinc_coefficient:.6g})"


def analytic_eigenvalue(p, n):
    """lambda_n = 4ab (a-b)^{2n} / (a+b)^{2(n+1)}."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    a, b = p.a, p.b
    ratio = ((a - b) / (a + b)) ** 2
    return 4 * a * b / (a + b) ** 2 * ratio**n


def analytic_spectrum(p, n_max):
    """lambda_0..lambda_{n_max} as an array."""
    a, b = p.a, p.b
    ratio = ((a - b) / (a + b)) ** 2
    return 4 * a * b / (a + b) ** 2 * ratio ** np.arange(n_max + 1)


def analytic_spectrum_2d(p, n_max):
    """lambda_n lambda_m for n, m <= n_max, shape (n_max+1, n_max+1)."""
    lam = analytic_spectrum(p, n_max)
    return np.outer(lam, lam)


def schmidt_number_analytic(p):
    """Kx = Ky = (a^2 + b^2) / 2ab; the full 2D value is its square."""
    return (p.a**2 + p.b**2) / (2 * p.a * p.b)


@lru_cache(maxsize=1)
def _unit_sinc_width(tol=1e-12, maxiter=500):
    """Best-fit Gaussian width for sinc(u^2) on [0, sqrt(pi)]."""
    u0 = math.sqrt(math.pi)

    def loss(width):
        val, _ = quad(
            lambda u: (_sinc(u * u) - math.exp(-u * u / (2 * width * width))) ** 2,
            0.0,
            u0,
            epsabs=1e-15,
            epsrel=1e-13,
            limit=200,
        )
        return val

    res = minimize_scalar(
        loss,
        bounds=(1e-3 * u0, u0),
        method="bounded",
        options={"xatol": tol, "maxiter": maxiter},
    )
    if not res.success:
        raise RuntimeError(f"sinc width fit did not converge: {res.message}")
    return float(res.x)


def fit_gaussian_width_to_sinc(p):
    """Gaussian width b whose exp(-u^2/2b^2) best matches sinc(c_sinc u^2)
    in L2 over u in [0, first sinc zero].

    Substituting u -> u / sqrt(c) reduces every case to c = 1, so a single
    cached 1D minimization serves all parameter sets.
    """
    c = p.sinc_coefficient
    return _unit_sinc_width() / math.sqrt(c)


def sinc_coefficient_for_width(b):
    """Inverse of :func:`fit_gaussian_width_to_sinc`: c_sinc giving fitted width b."""
    return (_unit_sinc_width() / b) ** 2
