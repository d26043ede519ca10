import math

import numpy as np
import pytest

from spdc_schmidt.errors import GridCoverageError
from spdc_schmidt.kernel import DoubleGaussianKernel, ExactKernel, OpticalParams, analytic_spectrum
from spdc_schmidt.measurement import (
    CountRecord,
    KernelProjector,
    coincidence_matrix,
    coincidence_scan,
    derive_seed,
    fiber_scan,
    mode_list,
    projection_coefficient,
    sample_counts,
    simulate_counts,
    singles_rate,
    singles_rate_separable,
    suppression_visibility,
    visibility,
)
from spdc_schmidt.modes import HGBasis, hg_mode_2d, make_grid
from spdc_schmidt.schmidt import decompose, discretize_1d, discretize_2d


@pytest.fixture(scope="module")
def dg13():
    p = OpticalParams(1.0, 3.0)
    return DoubleGaussianKernel(p), HGBasis.from_widths(1.0, 3.0)


@pytest.fixture(scope="module")
def d2d(dg13):
    kern, basis = dg13
    g = make_grid(8 * basis.width, 33)
    return decompose(discretize_2d(kern, g), 1e-10)


def brute_force_coefficients(kern, basis, grid, modes):
    """Direct 4D quadrature of psi_a(q1) psi_b(q2) Psi(q1, q2) on a tensor grid."""
    x = grid.points
    q1x, q1y, q2x, q2y = np.meshgrid(x, x, x, x, indexing="ij")
    psi = kern(q1x, q1y, q2x, q2y)
    w = grid.weights
    w4 = np.einsum("i,j,k,l->ijkl", w, w, w, w)
    psi = psi / np.sqrt(np.sum(w4 * psi * psi))
    sampled = [hg_mode_2d(basis, m, grid).reshape(len(x), len(x)) for m in modes]
    out = np.empty((len(modes), len(modes)))
    for i, fa in enumerate(sampled):
        partial = np.einsum("ij,ijkl->kl", fa * np.outer(w, w), psi)
        for j, fb in enumerate(sampled):
            out[i, j] = np.sum(partial * fb * np.outer(w, w))
    return out


def test_projection_coefficient_examples(dg13, grid13):
    kern, basis = dg13
    c00 = projection_coefficient(kern, basis, (0, 0), (0, 0), grid13)
    assert c00 == pytest.approx(0.75, abs=1e-8)
    assert c00**2 == pytest.approx(0.5625, abs=1e-8)
    assert abs(projection_coefficient(kern, basis, (1, 0), (0, 0), grid13)) < 1e-8
    c10 = projection_coefficient(kern, basis, (1, 0), (1, 0), grid13)
    assert c10**2 == pytest.approx(0.140625, abs=1e-8)


def test_separable_path_matches_tensor_grid(dg13):
    kern, basis = dg13
    g = make_grid(7 * basis.width, 25)
    modes = mode_list(2)
    sep = KernelProjector(kern, basis, g).coefficients(modes, modes)
    full = KernelProjector(lambda *q: kern(*q), basis, g).coefficients(modes, modes)
    np.testing.assert_allclose(sep, full, atol=1e-12)


def test_coincidence_matrix_single_sum(dg13, grid13):
    kern, basis = dg13
    cm = coincidence_matrix(kern, basis, 4, grid13)
    assert cm.entries.shape == (25, 25)
    assert np.all(cm.entries >= 0)
    assert cm.max_offdiagonal_ratio() < 1e-10
    assert cm.entries[0, 0] == 1.0
    assert cm.normalization == pytest.approx(0.5625, abs=1e-8)
    np.testing.assert_allclose(cm.entries, cm.entries.T, atol=1e-14)
    assert suppression_visibility(cm.fixed_arm2((0, 0)), cm.index((0, 0))) > 0.9
    col = cm.fixed_arm2((1, 0))
    assert int(np.argmax(col)) == cm.index((1, 0))


def test_coincidence_matrix_cap(dg13, grid13):
    kern, basis = dg13
    with pytest.raises(ValueError):
        coincidence_matrix(kern, basis, 5, grid13, max_mode_order=4)


def test_exact_kernel_coincidences_match_brute_force():
    p = OpticalParams(5.8, 20.0)
    basis = HGBasis.from_widths(5.8, 20.0)
    g = make_grid(6 * basis.width, 17)
    kern = ExactKernel(p)
    modes = mode_list(1)
    cm = coincidence_matrix(kern, basis, 1, g)
    ref = brute_force_coefficients(kern, basis, g, modes) ** 2
    np.testing.assert_allclose(cm.rates, ref, atol=1e-12)
    ratio = cm.max_offdiagonal_ratio()
    assert 0 < ratio < 0.1
    np.testing.assert_allclose(cm.entries, cm.entries.T, atol=1e-12)


def test_coverage_error(dg13):
    kern, basis = dg13
    g = make_grid(1.5 * basis.width, 101)
    with pytest.raises(GridCoverageError):
        coincidence_matrix(kern, basis, 4, g)


def test_singles_examples(d2d, dg13):
    _, basis = dg13
    assert singles_rate(d2d, (0, 0), basis) == pytest.approx(0.5625, abs=1e-5)
    assert singles_rate(d2d, (1, 0), basis) == pytest.approx(0.140625, abs=1e-5)
    # far beyond the retained spectrum (highest order this grid resolves)
    assert singles_rate(d2d, (12, 12), basis) < d2d.residual


def test_singles_completeness(d2d, dg13):
    _, basis = dg13
    cap = 12
    total = sum(singles_rate(d2d, (n, m), basis) for n in range(cap + 1) for m in range(cap + 1))
    lam = analytic_spectrum(OpticalParams(1.0, 3.0), cap)
    tail = 1.0 - lam.sum() ** 2  # weight of modes outside n, m <= cap
    assert abs(1.0 - total) <= d2d.residual + tail + 1e-10


def test_singles_equal_coincidence_row_sums(d2d, dg13):
    kern, basis = dg13
    cm = coincidence_matrix(kern, basis, 4, d2d.grid)
    for i, mode in enumerate(cm.modes):
        assert cm.rates[i].sum() == pytest.approx(singles_rate(d2d, mode, basis), abs=1e-9)


def test_singles_separable(dg13, grid13):
    kern, basis = dg13
    d1 = decompose(discretize_1d(kern.axis, grid13), 1e-12)
    assert singles_rate_separable(d1, (0, 0), basis) == pytest.approx(0.5625, abs=1e-8)
    assert singles_rate_separable(d1, (2, 1), basis) == pytest.approx(
        analytic_spectrum(OpticalParams(1, 3), 2)[2] * 0.1875, abs=1e-8
    )
    with pytest.raises(ValueError):
        singles_rate(d1, (0, 0), basis)


def test_visibility_examples():
    assert visibility(1, 0) == 1
    assert visibility(1, 1) == 0
    assert visibility(0.985, 0.015) == pytest.approx(0.97, abs=1e-12)
    for bad in [(0, 0), (1, 2), (1, -1)]:
        with pytest.raises(ValueError):
            visibility(*bad)
    assert suppression_visibility([0.1, 0.9, 0.1], 1) == pytest.approx(0.8)
    assert suppression_visibility([0.9, 0.1], 1) < 0


def fiber_closed_form(n, xt):
    return np.exp(-xt * xt / 2) * xt ** (2 * n) / (2**n * math.factorial(n))


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_fiber_scan_closed_form(dg13, grid13, n):
    _, basis = dg13
    x = np.linspace(-3, 3, 25) * basis.width
    np.testing.assert_allclose(fiber_scan(n, basis, x, grid13), fiber_closed_form(n, basis.scale * x), atol=1e-10)


def test_fiber_scan_examples(dg13, grid13):
    _, basis = dg13
    x = np.linspace(-4, 4, 801) * basis.width
    r0 = fiber_scan(0, basis, x, grid13)
    assert int(np.argmax(r0)) == 400
    assert fiber_scan(0, basis, 0.0, grid13) == pytest.approx(1.0, abs=1e-10)
    assert abs(fiber_scan(1, basis, 0.0, grid13)) < 1e-10
    r1 = fiber_scan(1, basis, x, grid13)
    i = int(np.argmax(r1[:400]))
    xs = -x[i]
    assert xs == pytest.approx(math.sqrt(2) * basis.width, rel=1e-2)
    assert abs(fiber_scan(1, basis, xs, grid13) - fiber_scan(1, basis, -xs, grid13)) < 1e-8
    # a mismatched fiber no longer peaks at unit coupling
    assert fiber_scan(0, basis, 0.0, grid13, mismatch=1.5) < 1.0


def test_scan_arm_symmetry(dg13, grid13):
    kern, basis = dg13
    xs = np.linspace(-3, 3, 31) * basis.width
    for herald in range(3):
        r1 = coincidence_scan(kern, herald, basis, xs, grid13, scanned_arm=1)
        r2 = coincidence_scan(kern, herald, basis, xs, grid13, scanned_arm=2)
        assert np.max(np.abs(r1 - r2)) < 1e-10
    with pytest.raises(ValueError):
        coincidence_scan(kern, 0, basis, xs, grid13, scanned_arm=3)


def test_coincidence_scan_heralded_profile(dg13, grid13):
    kern, basis = dg13
    xs = np.linspace(-3, 3, 31) * basis.width
    r = coincidence_scan(kern, 1, basis, xs, grid13)
    lam = analytic_spectrum(OpticalParams(1, 3), 1)
    # heralding psi_1 leaves psi_1 (weight lambda_1), so the scan is lambda_1 * fiber_scan
    np.testing.assert_allclose(r, lam[1] * fiber_scan(1, basis, xs, grid13), atol=1e-10)


def test_sample_counts_examples():
    assert sample_counts(0.0, 123.0, 7) == 0
    assert abs(sample_counts(1.0, 1e6, 11) - 1e6) <= 5000
    assert sample_counts(0.3, 1e4, 5) == sample_counts(0.3, 1e4, 5)
    with pytest.raises(ValueError):
        sample_counts(-1, 1, 0)
    with pytest.raises(ValueError):
        sample_counts(1, 0, 0)


def test_sample_counts_statistics():
    draws = np.array([sample_counts(0.5, 200.0, s) for s in range(2000)])
    assert abs(draws.mean() - 100) < 5 * math.sqrt(100 / 2000)
    assert abs(draws.var() / 100 - 1) < 0.15


def test_simulate_counts():
    rates = {(0, 0): 0.75, (1, 0): 0.25}
    recs = simulate_counts(rates, 1e4, seed=3)
    assert [r.mode for r in recs] == [(0, 0), (1, 0)]
    assert all(isinstance(r, CountRecord) and r.sampled_counts >= 0 for r in recs)
    assert recs == simulate_counts(rates, 1e4, seed=3)
    assert recs != simulate_counts(rates, 1e4, seed=4)
    assert recs[0].seed == derive_seed(3, 0) and recs[0].seed != recs[1].seed
    quiet = simulate_counts(rates, 1e4, seed=3, background=10, noiseless=True)
    assert [r.sampled_counts for r in quiet] == [7510, 2510]
    with pytest.raises(ValueError):
        simulate_counts({(0, 0): 0.0}, 10, 0)
