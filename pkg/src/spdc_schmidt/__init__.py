"""Schmidt decomposition of SPDC biphoton transverse-momentum amplitudes.

Hermite-Gaussian Schmidt modes, SVD of discretized two-photon kernels, and
simulated mode-resolved measurements (coincidences, single-count
tomography, fiber scans, ghost imaging).
"""
from ._backend import BACKEND
from .errors import ConfigError, GridCoverageError, NumericalError
from .kernel import (
    DoubleGaussianKernel,
    ExactKernel,
    OpticalParams,
    analytic_eigenvalue,
    analytic_spectrum,
    double_gaussian_amplitude,
    exact_amplitude,
    fit_gaussian_width_to_sinc,
    schmidt_number_analytic,
)
from .modes import Grid, HGBasis, ModeIndex, hermite_poly, hg_function, inner_product, make_grid, schmidt_mode
from .schmidt import (
    DiscretizedKernel,
    SchmidtDecomposition,
    decompose,
    discretize_1d,
    discretize_2d,
    fidelity,
    jacobi_svd,
    mode_overlap_matrix,
    schmidt_number,
)

__version__ = "0.1.0"
