import math

import numpy as np
import pytest

from spdc_schmidt.kernel import (
    REPORTED_KX,
    DoubleGaussianKernel,
    ExactKernel,
    OpticalParams,
    analytic_eigenvalue,
    analytic_spectrum,
    analytic_spectrum_2d,
    default_sinc_coefficient,
    double_gaussian_amplitude,
    exact_amplitude,
    fit_gaussian_width_to_sinc,
    schmidt_number_analytic,
    sinc_coefficient_for_width,
)


def golden_section(f, lo, hi, tol=1e-10):
    """Plain golden-section search, independent of the package optimizer."""
    g = (math.sqrt(5) - 1) / 2
    c, d = hi - g * (hi - lo), lo + g * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - g * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + g * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def trapezoid_fit_width(c, n=20001):
    """Reference fit: trapezoid L2 loss on [0, sqrt(pi/c)] minimized by golden section."""
    u = np.linspace(0, math.sqrt(math.pi / c), n)
    target = np.sinc(c * u * u / np.pi)
    w = np.full(n, u[1] - u[0])
    w[[0, -1]] *= 0.5

    def loss(b):
        return float(np.sum(w * (target - np.exp(-u * u / (2 * b * b))) ** 2))

    return golden_section(loss, 1e-3 * u[-1], u[-1])


def test_params_validation():
    for bad in [(0, 1), (1, -1), (float("nan"), 1), (1, float("inf"))]:
        with pytest.raises(ValueError):
            OpticalParams(*bad)
    with pytest.raises(ValueError):
        OpticalParams(1, 1, c_sinc=0.0)


def test_double_gaussian_examples():
    p = OpticalParams(1.0, 3.0)
    assert double_gaussian_amplitude(p, 0, 0, 0, 0) == 1.0
    assert double_gaussian_amplitude(p, 1, 0, -1, 0) == pytest.approx(math.exp(-4 / 18), rel=1e-15)
    assert double_gaussian_amplitude(p, 1, 0, 1, 0) == pytest.approx(math.exp(-2), rel=1e-15)


def test_exact_amplitude_examples():
    p = OpticalParams(1.0, 3.0, c_sinc=1.0)
    assert exact_amplitude(p, 0, 0, 0, 0) == 1.0
    assert exact_amplitude(p, 1, 0, -1, 0) == pytest.approx(math.sin(4) / 4, rel=1e-14)
    assert exact_amplitude(p, 1, 0, -1, 0) == pytest.approx(-0.18920, abs=1e-5)
    # first zero of the sinc factor
    c = 0.37
    p = OpticalParams(1.0, 3.0, c_sinc=c)
    d = math.sqrt(math.pi / c)
    assert abs(exact_amplitude(p, d / 2, 0, -d / 2, 0)) < 1e-15


def test_default_sinc_coefficient():
    c = default_sinc_coefficient(2e-3, 325e-9)
    assert c == pytest.approx(2e-3 * 2 * math.pi / 325e-9 * 1e-6 / 16, rel=1e-14)
    assert c == pytest.approx(0.0024166, rel=1e-4)
    assert OpticalParams(5.8, 20).sinc_coefficient == c
    assert OpticalParams(5.8, 20, c_sinc=0.5).sinc_coefficient == 0.5


def test_analytic_eigenvalue_examples():
    assert analytic_eigenvalue(OpticalParams(2, 2), 0) == 1.0
    assert analytic_eigenvalue(OpticalParams(2, 2), 3) == 0.0
    p = OpticalParams(1, 3)
    assert analytic_eigenvalue(p, 0) == pytest.approx(0.75, abs=1e-15)
    assert analytic_eigenvalue(p, 1) == pytest.approx(0.1875, abs=1e-15)
    np.testing.assert_allclose(analytic_spectrum(p, 5), [analytic_eigenvalue(p, n) for n in range(6)], rtol=1e-14)
    with pytest.raises(ValueError):
        analytic_eigenvalue(p, -1)


def test_analytic_spectrum_2d_is_outer_product():
    p = OpticalParams(1, 3)
    lam2 = analytic_spectrum_2d(p, 4)
    assert lam2.shape == (5, 5)
    assert lam2[1, 0] == pytest.approx(0.140625)
    np.testing.assert_allclose(lam2, lam2.T)


def test_schmidt_number_analytic_examples():
    assert schmidt_number_analytic(OpticalParams(4, 4)) == 1.0
    assert schmidt_number_analytic(OpticalParams(1, 3)) == pytest.approx(5 / 3, rel=1e-15)
    assert schmidt_number_analytic(OpticalParams(5.8, 20)) == pytest.approx(1.8691, abs=1e-4)
    # the quoted value for these widths does not follow from the formula
    assert abs(schmidt_number_analytic(OpticalParams(5.8, 20)) - REPORTED_KX) > 1.0


@pytest.mark.parametrize("ratio", [1.0, 1.5, 2.0, 3.0, 5.0, 7.5, 10.0])
def test_normalization_and_k_identity(ratio):
    p = OpticalParams(1.0, ratio)
    lam = analytic_spectrum(p, 200)
    assert abs(lam.sum() - 1.0) < 1e-12
    assert abs(1.0 / np.sum(lam * lam) - schmidt_number_analytic(p)) < 1e-10


def test_exchange_symmetry(rng):
    q = rng.normal(scale=10.0, size=(100, 4))
    p = OpticalParams(5.8, 20)
    for fn in (double_gaussian_amplitude, exact_amplitude):
        v12 = fn(p, q[:, 0], q[:, 1], q[:, 2], q[:, 3])
        v21 = fn(p, q[:, 2], q[:, 3], q[:, 0], q[:, 1])
        assert np.array_equal(v12, v21)


def test_rotation_symmetry(rng):
    q = rng.normal(scale=10.0, size=(100, 4))
    theta = rng.uniform(0, 2 * np.pi, 100)
    c, s = np.cos(theta), np.sin(theta)
    r1x, r1y = c * q[:, 0] - s * q[:, 1], s * q[:, 0] + c * q[:, 1]
    r2x, r2y = c * q[:, 2] - s * q[:, 3], s * q[:, 2] + c * q[:, 3]
    p = OpticalParams(5.8, 20)
    for fn in (double_gaussian_amplitude, exact_amplitude):
        base = fn(p, q[:, 0], q[:, 1], q[:, 2], q[:, 3])
        rot = fn(p, r1x, r1y, r2x, r2y)
        np.testing.assert_allclose(rot, base, rtol=0, atol=1e-12)


def test_kernel_objects():
    p = OpticalParams(1.0, 3.0)
    dg = DoubleGaussianKernel(p)
    assert dg.separable and not ExactKernel(p).separable
    x = np.linspace(-2, 2, 7)
    np.testing.assert_allclose(dg(x, -x, 0.5 * x, x), dg.axis(x, 0.5 * x) * dg.axis(-x, x), rtol=1e-14)
    assert ExactKernel(p)(0.3, 0.1, -0.2, 0.4) == exact_amplitude(p, 0.3, 0.1, -0.2, 0.4)


def test_sinc_fit_against_independent_oracle():
    c = 2.0
    b = fit_gaussian_width_to_sinc(OpticalParams(1, 1, c_sinc=c))
    assert b == pytest.approx(trapezoid_fit_width(c), rel=1e-5)


@pytest.mark.parametrize("c", [1e-3, 0.0024166, 0.3, 1.0])
def test_sinc_fit_scaling_law(c):
    b1 = fit_gaussian_width_to_sinc(OpticalParams(1, 1, c_sinc=c))
    b2 = fit_gaussian_width_to_sinc(OpticalParams(1, 1, c_sinc=2 * c))
    assert b2 == pytest.approx(b1 / math.sqrt(2), rel=1e-4)
    assert 0 < b1 < math.sqrt(math.pi / c)


def test_sinc_fit_round_trip_to_twenty_mrad():
    c = sinc_coefficient_for_width(20.0)
    assert fit_gaussian_width_to_sinc(OpticalParams(5.8, 20, c_sinc=c)) == pytest.approx(20.0, rel=1e-3)


def test_fitted_width_at_default_crystal():
    b = fit_gaussian_width_to_sinc(OpticalParams(5.8, 20))
    assert b == pytest.approx(23.73, abs=0.01)
