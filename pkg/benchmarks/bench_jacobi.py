"""Compare the compiled and numpy one-sided Jacobi kernels.

    python benchmarks/bench_jacobi.py            # quick cases
    python benchmarks/bench_jacobi.py --full     # adds the 33x33-per-axis exact kernel

Each case reports wall time per backend, sweep count, and the largest
relative deviation of the singular values from LAPACK.
"""
import argparse
import time

import numpy as np
import scipy.linalg

from spdc_schmidt import _jacobi_py, kernel, modes, schmidt

try:
    from spdc_schmidt import _jacobi
except ImportError:
    _jacobi = None


def cases(full):
    p = kernel.OpticalParams(1.0, 3.0)
    basis = modes.HGBasis.from_widths(1.0, 3.0)
    g = modes.make_grid(10 * basis.width, 513)
    yield "double-Gaussian 1D, N=513", schmidt.discretize_1d(kernel.DoubleGaussianKernel(p).axis, g).matrix
    yield "gaussian random 300x300", np.random.default_rng(0).normal(size=(300, 300))
    ex = kernel.OpticalParams(5.8, 20.0)
    eb = modes.HGBasis.from_widths(5.8, kernel.fit_gaussian_width_to_sinc(ex))
    for n in ([17, 25, 33] if full else [17, 21]):
        g2 = modes.make_grid(6 * eb.width, n)
        yield f"exact sinc 2D, {n}x{n} per axis", schmidt.discretize_2d(kernel.ExactKernel(ex), g2).matrix


def run(fn, r_factor, tol):
    t0 = time.perf_counter()
    cols, vt, sweeps = fn(r_factor, tol, 60)
    return time.perf_counter() - t0, np.sort(np.linalg.norm(cols, axis=1))[::-1], sweeps


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--full", action="store_true")
    args = ap.parse_args()
    backends = [("numpy", _jacobi_py.one_sided_jacobi)]
    if _jacobi is not None:
        backends.insert(0, ("cython", _jacobi.one_sided_jacobi))
    print(f"{'case':36s} {'backend':8s} {'size':>6s} {'time[s]':>9s} {'sweeps':>6s} {'max rel err':>12s}")
    for name, a in cases(args.full):
        _, r, _ = scipy.linalg.qr(a, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        rank = int(np.count_nonzero(diag > np.finfo(float).eps * diag[0]))
        ref = scipy.linalg.svd(a, compute_uv=False)[:rank]
        tol = np.finfo(float).eps * a.shape[1]
        for label, fn in backends:
            dt, s, sweeps = run(fn, r[:rank], tol)
            keep = ref > 1e-10 * ref[0]
            err = np.max(np.abs(s[keep] - ref[keep]) / ref[keep])
            print(f"{name:36s} {label:8s} {rank:6d} {dt:9.3f} {sweeps:6d} {err:12.2e}")


if __name__ == "__main__":
    main()
