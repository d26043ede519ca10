"""Pure numpy fallback for the one-sided Jacobi sweeps.

Uses round-robin (tournament) ordering so each round rotates n/2 disjoint
row pairs at once with vectorized numpy operations.
"""
import numpy as np


def _tournament(r):
    """Round-robin schedule: list of (p, q) index arrays covering all pairs."""
    players = list(range(r))
    if r % 2:
        players.append(-1)
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        half = size // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        keep = (p >= 0) & (q >= 0)
        p, q = p[keep], q[keep]
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def one_sided_jacobi(cols, tol, max_sweeps):
    """Same contract as the compiled kernel."""
    cols = np.array(cols, dtype=np.float64, order="C")
    r = cols.shape[0]
    vt = np.eye(r)
    schedule = _tournament(r)
    for sweep in range(max_sweeps):
        rotated = 0
        for p, q in schedule:
            gp, gq = cols[p], cols[q]
            alpha = np.einsum("ij,ij->i", gp, gp)
            beta = np.einsum("ij,ij->i", gq, gq)
            gamma = np.einsum("ij,ij->i", gp, gq)
            active = (alpha > 0) & (beta > 0) & (np.abs(gamma) > tol * np.sqrt(alpha) * np.sqrt(beta))
            n_active = int(np.count_nonzero(active))
            if not n_active:
                continue
            if n_active < p.size:
                p, q = p[active], q[active]
                gp, gq = gp[active], gq[active]
                alpha, beta, gamma = alpha[active], beta[active], gamma[active]
            rotated += n_active
            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.copysign(1.0, zeta) / (np.abs(zeta) + np.hypot(1.0, zeta))
            c = (1.0 / np.sqrt(1.0 + t * t))[:, None]
            s = c * t[:, None]
            cols[p] = c * gp - s * gq
            cols[q] = s * gp + c * gq
            vp, vq = vt[p], vt[q]
            vt[p] = c * vp - s * vq
            vt[q] = s * vp + c * vq
        if rotated == 0:
            return cols, vt, sweep + 1
    return cols, vt, -1
