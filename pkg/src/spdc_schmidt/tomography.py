"""Diagonal single-photon tomography in the HG basis from single counts.

Single-count rates with the partner photon traced out are proportional to
the reduced density matrix diagonal <psi_nm|rho|psi_nm>, so normalized
background-subtracted counts estimate lambda_nm.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .kernel import analytic_spectrum
from .modes import ModeIndex
from .schmidt import fidelity

log = logging.getLogger(__name__)

CLIP_WARN_FRACTION = 0.01


@dataclass(frozen=True)
class SchmidtNumberEstimate:
    K: float
    sigma_K: float
    Kx: float
    sigma_Kx: float
    Ky: float
    sigma_Ky: float
    degenerate: bool = False


@dataclass
class TomographyResult:
    modes: list
    counts: np.ndarray
    background: float
    lambda_est: np.ndarray
    sigma: np.ndarray
    Kx: float
    Ky: float
    K: float
    sigma_Kx: float = float("nan")
    sigma_Ky: float = float("nan")
    sigma_K: float = float("nan")
    fidelity_vs_model: float | None = None
    clipped: int = 0
    clipped_weight: float = 0.0

    def lambda_map(self):
        return {m: float(v) for m, v in zip(self.modes, self.lambda_est)}

    def marginals(self):
        return _marginals(self.modes, self.lambda_est)

    def to_dict(self):
        return {
            "modes": [[m.n, m.m] for m in self.modes],
            "counts": [int(c) for c in self.counts],
            "background": self.background,
            "lambda_est": [float(v) for v in self.lambda_est],
            "sigma": [float(v) for v in self.sigma],
            "Kx": self.Kx,
            "Ky": self.Ky,
            "K": self.K,
            "sigma_Kx": self.sigma_Kx,
            "sigma_Ky": self.sigma_Ky,
            "sigma_K": self.sigma_K,
            "fidelity_vs_model": self.fidelity_vs_model,
            "clipped": self.clipped,
            "clipped_weight": self.clipped_weight,
        }


def _marginals(modes, lam):
    n_max = max(m.n for m in modes)
    m_max = max(m.m for m in modes)
    lx = np.zeros(n_max + 1)
    ly = np.zeros(m_max + 1)
    for mode, v in zip(modes, lam):
        lx[mode.n] += v
        ly[mode.m] += v
    return lx, ly


def _schmidt_numbers(modes, lam):
    lx, ly = _marginals(modes, lam)
    return 1.0 / np.sum(lx * lx), 1.0 / np.sum(ly * ly), 1.0 / np.sum(lam * lam)


def _normalize_counts(counts, background):
    signal = counts - background
    clipped = signal < 0
    signal = np.where(clipped, 0.0, signal)
    total = signal.sum()
    if total <= 0:
        raise ValueError("no signal: all counts are at or below background")
    return signal / total, signal, clipped


def estimate_eigenvalues(records, background=0.0, n_bootstrap=200, seed=0):
    """Normalized background-subtracted singles as eigenvalue estimates.

    Per-eigenvalue errors come from Poisson error propagation; Schmidt-number
    errors from a parametric bootstrap (skipped if ``n_bootstrap`` is 0).
    """
    if not records:
        raise ValueError("no count records")
    modes = [ModeIndex(*r.mode).validate() for r in records]
    if len(set(modes)) != len(modes):
        raise ValueError("duplicate mode in count records")
    counts = np.array([r.sampled_counts for r in records], dtype=float)
    lam, signal, clipped = _normalize_counts(counts, background)

    # d lam_i / d c_j = (delta_ij S - s_i) / S^2, var(c_j) = c_j
    total = signal.sum()
    var_other = counts.sum() - counts
    sigma = np.sqrt(counts * (total - signal) ** 2 + signal**2 * var_other) / total**2
    sigma = np.where(clipped, 0.0, sigma)

    clipped_weight = float(np.sum(background - counts[clipped]) / max(counts.sum(), 1.0))
    if clipped_weight > CLIP_WARN_FRACTION:
        log.warning("clipped %.2f%% of the weight to zero after background subtraction", 100 * clipped_weight)

    kx, ky, k = _schmidt_numbers(modes, lam)
    result = TomographyResult(
        modes=modes,
        counts=counts.astype(np.int64),
        background=float(background),
        lambda_est=lam,
        sigma=sigma,
        Kx=float(kx),
        Ky=float(ky),
        K=float(k),
        clipped=int(np.count_nonzero(clipped)),
        clipped_weight=clipped_weight,
    )
    if n_bootstrap:
        est = schmidt_number_with_error(result, n_bootstrap, seed)
        result.sigma_Kx, result.sigma_Ky, result.sigma_K = est.sigma_Kx, est.sigma_Ky, est.sigma_K
    return result


def schmidt_number_with_error(result, n_bootstrap, seed):
    """Point Schmidt numbers with parametric-bootstrap standard errors.

    Replica i resamples every count as Poisson(observed) with seed + i, so
    replicas are independent of evaluation order.
    """
    if n_bootstrap < 100:
        raise ValueError(f"n_bootstrap must be >= 100, got {n_bootstrap}")
    if np.count_nonzero(result.lambda_est > 0) <= 1:
        return SchmidtNumberEstimate(result.K, 0.0, result.Kx, 0.0, result.Ky, 0.0, degenerate=True)
    counts = result.counts.astype(float)
    reps = np.full((n_bootstrap, 3), np.nan)
    for i in range(n_bootstrap):
        rng = np.random.default_rng(seed + i)
        resampled = rng.poisson(counts).astype(float)
        try:
            lam, _, _ = _normalize_counts(resampled, result.background)
        except ValueError:
            continue
        reps[i] = _schmidt_numbers(result.modes, lam)
    sig = np.nanstd(reps, axis=0, ddof=1)
    return SchmidtNumberEstimate(
        result.K, float(sig[2]), result.Kx, float(sig[0]), result.Ky, float(sig[1])
    )


def model_spectrum(modes, params, max_order=None):
    """lambda_n * lambda_m from the double-Gaussian model over ``modes``,
    truncated to n, m <= max_order and renormalized."""
    modes = [ModeIndex(*m) for m in modes]
    top = max(max(m) for m in modes)
    lam = analytic_spectrum(params, top)
    keep = np.array([max_order is None or (m.n <= max_order and m.m <= max_order) for m in modes])
    vals = np.array([lam[m.n] * lam[m.m] for m in modes]) * keep
    return vals / vals.sum()


def model_fidelity(result, model_params, max_order=None):
    """Fidelity of the estimated diagonal against the model, paired by mode."""
    model = model_spectrum(result.modes, model_params, max_order)
    return fidelity(result.lambda_est, model)
