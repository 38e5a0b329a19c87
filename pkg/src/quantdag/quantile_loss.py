"""Check loss, asymmetric-Laplace log-density and the working log-likelihoods.

The node-conditional working likelihood of observation vector ``y`` given
fitted conditional quantiles ``f`` at level ``tau`` is
``prod_i tau*(1-tau)*exp(-psi_tau(y_i - f_i))``; the joint version over all
nodes additionally carries the indicator that the union graph of the fitted
model is acyclic (log 0 = -inf when it is not).
"""

import math

import numpy as np

from . import kernels
from .errors import DimensionError


def check_loss(x, tau):
    """psi_tau(x): tau*x for x >= 0, else (tau-1)*x. Zero iff x == 0.

    The x == 0 case sits on the tau-slope branch, which is irrelevant for
    continuous data but fixed for determinism.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie strictly inside (0, 1)")
    return tau * x if x >= 0.0 else (tau - 1.0) * x


def al_logdensity(u, tau):
    """Log density of the asymmetric Laplace working noise at ``u``."""
    return math.log(tau) + math.log1p(-tau) - check_loss(u, tau)


def node_loglik(y, fitted, tau):
    """Working log-likelihood of one node: sum_i al_logdensity(y_i - f_i)."""
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie strictly inside (0, 1)")
    y = np.ascontiguousarray(y, dtype=float)
    fitted = np.ascontiguousarray(fitted, dtype=float)
    if y.shape != fitted.shape or y.ndim != 1:
        raise DimensionError("y and fitted must be equal-length vectors")
    const = y.size * (math.log(tau) + math.log1p(-tau))
    return const - kernels.checkloss_sum(y - fitted, tau)


def al_noise(rng, tau, size=None):
    """Asymmetric-Laplace draws by inverse-CDF from uniforms.

    F(u) = tau * exp((1-tau) u) for u < 0 and
    F(u) = tau + (1-tau) (1 - exp(-tau u)) for u >= 0.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie strictly inside (0, 1)")
    v = rng.random(size)
    return np.where(v < tau,
                    np.log(v / tau) / (1.0 - tau),
                    -np.log((1.0 - v) / (1.0 - tau)) / tau)


def joint_loglik(y, fitted_all, union_is_dag, tau):
    """Joint working log-likelihood over all nodes.

    ``fitted_all`` maps each node (column of ``y``) to its fitted quantile
    vector; a violated union-DAG condition sends the whole likelihood to
    ``-inf`` through the acyclicity indicator.
    """
    if not union_is_dag:
        return -math.inf
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise DimensionError("y must be an n x p matrix")
    if len(fitted_all) != y.shape[1]:
        raise DimensionError("need one fitted vector per node")
    return sum(node_loglik(y[:, h], fitted_all[h], tau) for h in range(y.shape[1]))
