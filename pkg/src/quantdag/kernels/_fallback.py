"""Pure-numpy implementations of the hot inner-loop kernels.

Signatures and numerical behaviour match ``quantdag.kernels._core`` exactly;
the compiled module is preferred at import time when available.
"""

import numpy as np


def checkloss_sum(u, tau):
    """Sum of the asymmetric check loss over a residual vector.

    psi_tau(x) = tau*x for x >= 0 and (tau-1)*x for x < 0; x = 0 lies on the
    tau-slope branch by convention.
    """
    u = np.asarray(u)
    return float(np.sum(np.where(u >= 0.0, tau * u, (tau - 1.0) * u)))


def apply_threshold(theta, t, beta_out):
    """beta = theta * 1(|theta| > t), written into beta_out.

    Returns the number of nonzero entries. The inequality is strict, so
    |theta| == t maps to exactly zero.
    """
    theta = np.asarray(theta)
    mask = np.abs(theta) > t
    np.multiply(theta, mask, out=beta_out)
    return int(np.count_nonzero(beta_out))


def axpy(base, v, s, out):
    """out = base + s * v (no temporaries beyond one)."""
    np.multiply(v, s, out=out)
    np.add(out, base, out=out)


def propose_eval(theta_new, t, w, resid, beta_old, tau, beta_out, resid_out):
    """Score one edge-coefficient proposal in a single pass.

    Thresholds theta_new at t into beta_out, updates the node residual
    (resid - (beta_new - beta_old) * w) into resid_out and returns
    (check-loss sum of resid_out, number of nonzero beta entries).
    """
    nnz = apply_threshold(theta_new, t, beta_out)
    np.subtract(beta_out, beta_old, out=resid_out)
    np.multiply(resid_out, w, out=resid_out)
    np.subtract(resid, resid_out, out=resid_out)
    return checkloss_sum(resid_out, tau), nnz
